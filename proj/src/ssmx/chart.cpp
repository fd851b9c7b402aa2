#include "ssmx/chart.hpp"

#include <cmath>
#include <limits>

#include "ssmx/util.hpp"

namespace ssmx {

namespace {

Eigen::Matrix2d rot2(double s) {
  Eigen::Matrix2d r;
  r << std::cos(s), std::sin(s), -std::sin(s), std::cos(s);
  return r;
}

}  // namespace

int ConservativeChart::angle_index(int i) const {
  const int n = grid->nsamples;
  return ((n / 4 - i) % n + n) % n;
}

Eigen::Matrix2d ConservativeChart::a2(int j, int p) const {
  const TransversePair& tp = floquet[j].pairs[p];
  Eigen::Matrix2d m;
  m << tp.rate, tp.mu, -tp.mu, tp.rate;
  return m;
}

const Eigen::MatrixXd& ConservativeChart::frame(int j, int a) const {
  return frames_[static_cast<size_t>(j) * grid->nsamples + a];
}

const Eigen::MatrixXd& ConservativeChart::frame_inverse(int j, int a) const {
  return frame_inv_[static_cast<size_t>(j) * grid->nsamples + a];
}

double ConservativeChart::resolvent_margin(int kmax) const {
  double margin = std::numeric_limits<double>::infinity();
  for (const FloquetData& fd : floquet) {
    for (const TransversePair& tp : fd.pairs) {
      for (int k = -kmax; k <= kmax; ++k) {
        margin = std::min(margin, std::hypot(tp.rate, k * omega0 - tp.mu));
        margin = std::min(margin, std::hypot(tp.rate, k * omega0 + tp.mu));
      }
    }
  }
  return margin;
}

ConservativeChart adapted_chart(const SystemSpec& spec, const SpectralData& sd, double delta,
                                const ChartOpts& opts) {
  ConservativeChart ch;
  ch.sd = sd;
  ch.dim = spec.dim;
  ch.npairs = (spec.dim - 2) / 2;
  ch.omega0 = sd.omega0;
  ch.grid = std::make_shared<const DiskGrid>(delta, opts.nrad, opts.nmodes, opts.nsamples);

  ch.family = build_family(spec, sd, delta, opts.nrad, opts.shoot);
  ch.rspec = rescale_time(spec, ch.family);
  ch.floquet = floquet_family(ch.rspec, ch.family, sd, opts.int_tol);
  for (int j = 0; j < opts.nrad; ++j) {
    require(std::abs(ch.family.orbits[j].rho - ch.grid->rho[j]) < 1e-12 * (1.0 + ch.grid->rho[j]),
            "adapted_chart: family radii do not sit on the grid nodes");
  }

  const int n = spec.dim;
  const int ns = opts.nsamples;
  const double t0 = 2.0 * kPi / ch.omega0;
  std::vector<double> times(ns);
  for (int i = 0; i < ns; ++i) times[i] = t0 * i / ns;

  // Sample each orbit of the renormalized flow over one common period; the
  // embedding K0 and the transverse frame come from the same pass.
  std::vector<Eigen::MatrixXd> k0_samples(n, Eigen::MatrixXd(opts.nrad, ns));
  std::vector<Eigen::MatrixXd> v_samples(static_cast<size_t>(ch.npairs * 2) * n,
                                         Eigen::MatrixXd(opts.nrad, ns));
  ch.orbit_states.resize(opts.nrad);
  ch.orbit_fundamentals.resize(opts.nrad);
  for (int j = 0; j < opts.nrad; ++j) {
    std::vector<Eigen::VectorXd> states;
    std::vector<Eigen::MatrixXd> funds;
    flow_samples(ch.rspec, ch.family.orbits[j].x0, 0.0, opts.int_tol, times, &states, &funds);
    for (int i = 0; i < ns; ++i) {
      for (int c = 0; c < n; ++c) k0_samples[c](j, i) = states[i](c);
      for (int p = 0; p < ch.npairs; ++p) {
        const TransversePair& tp = ch.floquet[j].pairs[p];
        Eigen::MatrixXd vi = funds[i] * tp.frame * std::exp(-tp.rate * times[i]) *
                             rot2(-tp.mu * times[i]);
        for (int col = 0; col < 2; ++col) {
          for (int a = 0; a < n; ++a) {
            v_samples[static_cast<size_t>(p * 2 + col) * n + a](j, i) = vi(a, col);
          }
        }
      }
    }
    ch.orbit_states[j] = std::move(states);
    ch.orbit_fundamentals[j] = std::move(funds);
  }

  ch.K0 = GridFunction::from_flow_samples(ch.grid, k0_samples, kPi / 2.0);
  ch.V = GridFunction::from_flow_samples(ch.grid, v_samples, kPi / 2.0);
  auto grad = ch.K0.gradient();
  ch.T1 = std::move(grad.first);
  ch.T2 = std::move(grad.second);

  // The complex collar of the disk chart maps into ambient states with
  // imaginary part up to roughly max ||DK0|| times the chart collar width;
  // widen the state guard so those evaluations are admitted.
  double dk_max = 0.0;
  for (int c = 0; c < n; ++c) {
    dk_max = std::max(dk_max, ch.T1.values(c).cwiseAbs().maxCoeff());
    dk_max = std::max(dk_max, ch.T2.values(c).cwiseAbs().maxCoeff());
  }
  double chart_tau = 0.05 * delta;
  ch.rspec.collar_halfwidth = std::max(
      ch.rspec.collar_halfwidth, 2.0 * std::sqrt(2.0 * n) * dk_max * chart_tau);

  // Pointwise combined frames and their inverses on the value grid.
  std::vector<Eigen::MatrixXcd> t1v(n), t2v(n);
  for (int c = 0; c < n; ++c) {
    t1v[c] = ch.T1.values(c);
    t2v[c] = ch.T2.values(c);
  }
  std::vector<Eigen::MatrixXcd> vv(ch.V.ncomp());
  for (int c = 0; c < ch.V.ncomp(); ++c) vv[c] = ch.V.values(c);
  ch.frames_.resize(static_cast<size_t>(opts.nrad) * ns);
  ch.frame_inv_.resize(static_cast<size_t>(opts.nrad) * ns);
  for (int j = 0; j < opts.nrad; ++j) {
    for (int a = 0; a < ns; ++a) {
      Eigen::MatrixXd fr(n, n);
      for (int c = 0; c < n; ++c) {
        fr(c, 0) = t1v[c](j, a).real();
        fr(c, 1) = t2v[c](j, a).real();
      }
      for (int col = 0; col < n - 2; ++col) {
        for (int c = 0; c < n; ++c) {
          fr(c, 2 + col) = vv[static_cast<size_t>(col) * n + c](j, a).real();
        }
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(fr);
      require(lu.isInvertible(), "adapted_chart: degenerate frame at a grid point");
      size_t idx = static_cast<size_t>(j) * ns + a;
      ch.frames_[idx] = fr;
      ch.frame_inv_[idx] = lu.inverse();
    }
  }
  return ch;
}

}  // namespace ssmx
