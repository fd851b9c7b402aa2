#include "ssmx/fixedpoint.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ssmx/integrate.hpp"

namespace ssmx {

namespace {

// Collar shells shared by the weighted norm and the operator resampling:
// same geometry as the expansion residual, so the two norms are comparable.
struct CollarSet {
  std::vector<Eigen::Vector2cd> z;
  std::vector<double> absz;
};

CollarSet collar_set(const DiskGrid& g) {
  CollarSet cs;
  const double tau = 0.05 * g.delta;
  const double rho_min = 0.25 * g.delta;
  const Complex ii(0.0, 1.0);
  for (int shell = 1; shell <= 3; ++shell) {
    const double eta = tau * shell / 3.0;
    for (int j = 0; j < g.nrad; ++j) {
      const double rho = g.rho[j];
      if (rho < rho_min) continue;
      for (int i = 0; i < g.nsamples; i += 8) {
        const double theta = 2.0 * kPi * i / g.nsamples;
        const Eigen::Vector2d e(std::cos(theta), std::sin(theta));
        for (int dir = 0; dir < 2; ++dir) {
          const Eigen::Vector2d u = dir == 0 ? e : Eigen::Vector2d(e(1), -e(0));
          cs.z.push_back((rho * e).cast<Complex>() + ii * eta * u.cast<Complex>());
          cs.absz.push_back(std::sqrt(rho * rho + eta * eta));
        }
      }
    }
  }
  return cs;
}

// Largest directional stretch of phi_inv along the embedded disk, by finite
// differences at a handful of footpoints. Feeds the contraction budget
// effective_rate = gamma_hat^d * phi_inv_growth.
double measure_phi_inv_growth(const TimeMaps& maps) {
  const Expansion& ex = *maps.ex;
  const double delta = ex.chart->grid->delta;
  const int nc = ex.chart->dim;
  double growth = 0.0;
  for (double frac : {0.3, 0.6, 0.9}) {
    for (int a = 0; a < 4; ++a) {
      const double th = 0.5 * kPi * a;
      const Eigen::Vector2cd z(frac * delta * std::cos(th), frac * delta * std::sin(th));
      const Eigen::VectorXcd x = ex.embed(z, maps.eps, maps.order);
      const Eigen::VectorXcd y0 = maps.phi_inv(x);
      const double h = 1e-6 * (1.0 + x.norm());
      for (int k = 0; k < nc; ++k) {
        Eigen::VectorXcd xp = x;
        xp(k) += h;
        growth = std::max(growth, (maps.phi_inv(xp) - y0).norm() / h);
      }
    }
  }
  return growth;
}

}  // namespace

int choose_d(double alpha, double beta, double margin) {
  require(alpha > 0.0, "choose_d: tangential decay rate must be positive");
  require(beta >= 0.0, "choose_d: transverse rate must be nonnegative");
  require(0.0 <= margin && margin < 1.0, "choose_d: margin out of range");
  int d = 1;
  while (!(beta < d * alpha * (1.0 - margin))) {
    ++d;
    require(d <= 64, "choose_d: no admissible weight below 64");
  }
  return d;
}

Eigen::VectorXcd TimeMaps::phi(const Eigen::VectorXcd& x, double t) const {
  if (t == 0.0) return x;
  return flow_complex(flow_spec, x, 0.0, t, eps, tol);
}

Eigen::Vector2cd TimeMaps::disk(const Eigen::Vector2cd& z, double t) const {
  if (t == 0.0) return z;
  auto rhs = [this](double, const VecX<Complex>& y) {
    const Eigen::Vector2cd v = ex->reduced(Eigen::Vector2cd(y(0), y(1)), eps, order);
    VecX<Complex> out(2);
    out << v(0), v(1);
    return out;
  };
  IntOpts o;
  o.tol = tol;
  VecX<Complex> y0(2);
  y0 << z(0), z(1);
  const VecX<Complex> y1 = integrate_to(rhs, 0.0, t, y0, o);
  return {y1(0), y1(1)};
}

TimeMaps time_t0_maps(const Expansion& ex, Complex eps, int order, double tol) {
  require(ex.chart != nullptr, "time_t0_maps: empty expansion");
  require(0 <= order && order <= ex.order, "time_t0_maps: order out of range");
  TimeMaps m;
  m.ex = &ex;
  m.eps = eps;
  m.order = order;
  m.tol = tol;
  m.t0 = 2.0 * kPi / ex.chart->omega0;
  // Corrected states flow a full period backward through the damped field,
  // which inflates imaginary parts beyond the chart's own collar samples;
  // give the analyticity guard headroom for that transient.
  m.flow_spec = ex.chart->rspec;
  m.flow_spec.collar_halfwidth *= 2.0;

  const double delta = ex.chart->grid->delta;
  double gmax = 0.0;
  double bmax = 0.0;
  for (double frac : {0.25, 0.5, 0.75, 1.0}) {
    for (int i = 0; i < 16; ++i) {
      const double th = 2.0 * kPi * i / 16.0;
      const Eigen::Vector2cd z(frac * delta * std::cos(th), frac * delta * std::sin(th));
      const double rn = m.r(z).norm();
      gmax = std::max(gmax, rn / (frac * delta));
      if (frac == 1.0) bmax = std::max(bmax, rn);
    }
  }
  m.gamma_hat = gmax;
  m.delta_eff = bmax <= delta ? delta : delta * (delta / bmax);

  const Eigen::VectorXcd x = ex.embed(Eigen::Vector2cd(0.5 * delta, 0.0), eps, order);
  const Eigen::VectorXcd xx = m.phi(m.phi_inv(x), m.t0);
  require((xx - x).norm() <= 1e-8 * (1.0 + x.norm()),
          "time_t0_maps: flow inverse consistency failed");
  return m;
}

double WeightedFunction::norm() const {
  require(grid != nullptr, "WeightedFunction: empty");
  const DiskGrid& g = *grid;
  const int nc = f.ncomp();
  std::vector<Eigen::MatrixXcd> v;
  v.reserve(nc);
  for (int c = 0; c < nc; ++c) v.push_back(f.values(c));
  double sup = 0.0;
  for (int j = 0; j < g.nrad; ++j) {
    const double w = std::pow(g.rho[j], -static_cast<double>(d));
    for (int i = 0; i < g.nsamples; ++i) {
      double s2 = 0.0;
      for (int c = 0; c < nc; ++c) s2 += std::norm(v[c](j, i));
      sup = std::max(sup, w * std::sqrt(s2));
    }
  }
  const CollarSet cs = collar_set(g);
  require(collar.cols() == static_cast<Eigen::Index>(cs.z.size()),
          "WeightedFunction: collar sample count mismatch");
  for (std::size_t k = 0; k < cs.z.size(); ++k) {
    sup = std::max(sup, collar.col(static_cast<Eigen::Index>(k)).norm() *
                            std::pow(cs.absz[k], -static_cast<double>(d)));
  }
  return sup;
}

WeightedFunction zero_correction(const Expansion& ex, int d) {
  require(ex.chart != nullptr, "zero_correction: empty expansion");
  require(d >= 1, "zero_correction: weight must be at least 1");
  const DiskGrid& g = *ex.chart->grid;
  const int nc = ex.chart->dim;
  WeightedFunction w;
  w.grid = ex.chart->grid;
  w.d = d;
  std::vector<Eigen::MatrixXcd> zv(nc, Eigen::MatrixXcd::Zero(g.nrad, g.nsamples));
  w.f = GridFunction::from_value_matrices(ex.chart->grid, zv);
  w.collar = Eigen::MatrixXcd::Zero(nc, static_cast<Eigen::Index>(collar_set(g).z.size()));
  return w;
}

WeightedFunction make_correction(const Expansion& ex, const GridFunction& f, int d) {
  require(ex.chart != nullptr, "make_correction: empty expansion");
  require(d >= 1, "make_correction: weight must be at least 1");
  require(f.ncomp() == ex.chart->dim, "make_correction: component count mismatch");
  WeightedFunction w;
  w.grid = ex.chart->grid;
  w.d = d;
  w.f = f;
  const CollarSet cs = collar_set(*w.grid);
  w.collar.resize(f.ncomp(), static_cast<Eigen::Index>(cs.z.size()));
  for (std::size_t k = 0; k < cs.z.size(); ++k) {
    w.collar.col(static_cast<Eigen::Index>(k)) = f.eval(cs.z[k]);
  }
  return w;
}

double distance(const WeightedFunction& a, const WeightedFunction& b) {
  require(a.grid == b.grid && a.d == b.d, "distance: incompatible corrections");
  WeightedFunction diff;
  diff.grid = a.grid;
  diff.d = a.d;
  diff.f = a.f - b.f;
  diff.collar = a.collar - b.collar;
  return diff.norm();
}

WeightedFunction apply_T(const WeightedFunction& c, const TimeMaps& maps, ApplyStats* stats) {
  require(maps.ex != nullptr, "apply_T: empty maps");
  const Expansion& ex = *maps.ex;
  const ConservativeChart& ch = *ex.chart;
  const DiskGrid& g = *ch.grid;
  const int nc = ch.dim;
  const Complex eps = maps.eps;
  const int N = maps.order;
  const bool with_c = c.grid != nullptr;

  auto push = [&](const Eigen::Vector2cd& z) {
    const Eigen::Vector2cd w = maps.r(z);
    Eigen::VectorXcd x = ex.embed(w, eps, N);
    if (with_c) x += c.f.eval(w);
    return (maps.phi_inv(x) - ex.embed(z, eps, N)).eval();
  };

  std::vector<Eigen::MatrixXcd> out(nc, Eigen::MatrixXcd(g.nrad, g.nsamples));
  for (int j = 0; j < g.nrad; ++j) {
    const double rho = g.rho[j];
    for (int i = 0; i < g.nsamples; ++i) {
      const double theta = 2.0 * kPi * i / g.nsamples;
      const Eigen::VectorXcd val =
          push(Eigen::Vector2cd(rho * std::cos(theta), rho * std::sin(theta)));
      for (int cc = 0; cc < nc; ++cc) out[cc](j, i) = val(cc);
    }
  }

  WeightedFunction next;
  next.grid = ch.grid;
  next.d = with_c ? c.d : 1;
  next.f = GridFunction::from_value_matrices(ch.grid, out);
  const double low = next.f.remove_below_order(next.d);
  if (stats) stats->low_order = low;

  // Collar samples carry the raw operator values; the low-order projection
  // only touches the real grid and stays at the noise scale reported above.
  const CollarSet cs = collar_set(g);
  next.collar.resize(nc, static_cast<Eigen::Index>(cs.z.size()));
  for (std::size_t k = 0; k < cs.z.size(); ++k) {
    next.collar.col(static_cast<Eigen::Index>(k)) = push(cs.z[k]);
  }
  return next;
}

RefineResult iterate(const Expansion& ex, Complex eps, int order, int d, const IterOpts& opts) {
  require(d >= 1, "iterate: weight must be at least 1");
  const TimeMaps maps = time_t0_maps(ex, eps, order, opts.map_tol);

  RefineResult res;
  ContractionReport& rep = res.report;
  rep.gamma_hat = maps.gamma_hat;
  rep.phi_inv_growth = measure_phi_inv_growth(maps);
  rep.beta_hat = std::abs(eps) > 0.0 ? (rep.phi_inv_growth - 1.0) / std::abs(eps) : 0.0;
  rep.effective_rate = std::pow(maps.gamma_hat, d) * rep.phi_inv_growth;

  WeightedFunction c = zero_correction(ex, d);
  double prev = -1.0;
  for (int m = 1; m <= opts.max_iter; ++m) {
    ApplyStats st;
    WeightedFunction cn = apply_T(c, maps, &st);
    rep.low_order = std::max(rep.low_order, st.low_order);
    const double diff = distance(cn, c);
    rep.step_norms.push_back(diff);
    rep.iterations = m;
    c = std::move(cn);
    if (diff < opts.stop_tol) {
      rep.converged = true;
      break;
    }
    if (prev > 0.0 && m <= 3 && diff >= prev && diff > 10.0 * opts.stop_tol) {
      rep.aborted = true;
      rep.note = "contraction failed: step ratio " + format_g17(diff / prev) +
                 " at iteration " + std::to_string(m);
      break;
    }
    prev = diff;
  }
  rep.final_residual = rep.step_norms.back();
  rep.distance_to_seed = c.norm();
  res.correction = std::move(c);
  return res;
}

std::vector<double> semiflow_check(const WeightedFunction& c, const TimeMaps& maps,
                                   const std::vector<double>& s_values) {
  require(maps.ex != nullptr && c.grid != nullptr, "semiflow_check: empty inputs");
  const Expansion& ex = *maps.ex;
  const DiskGrid& g = *c.grid;
  const Complex eps = maps.eps;
  const int N = maps.order;

  std::vector<double> defects;
  defects.reserve(s_values.size());
  for (double s : s_values) {
    double sup = 0.0;
    for (int j = 0; j < g.nrad; ++j) {
      const double rho = g.rho[j];
      if (rho > 0.85 * g.delta) continue;
      const double wgt = std::pow(rho, -static_cast<double>(c.d));
      for (int i = 0; i < g.nsamples; i += 4) {
        const double theta = 2.0 * kPi * i / g.nsamples;
        const Eigen::Vector2cd z(rho * std::cos(theta), rho * std::sin(theta));
        const Eigen::Vector2cd w = maps.disk(z, -s);
        if (w.norm() > g.delta) continue;
        const Eigen::VectorXcd x = ex.embed(w, eps, N) + c.f.eval(w);
        const Eigen::VectorXcd kf = ex.embed(z, eps, N) + c.f.eval(z);
        sup = std::max(sup, wgt * (maps.phi(x, s) - kf).norm());
      }
    }
    defects.push_back(sup);
  }
  return defects;
}

}  // namespace ssmx
