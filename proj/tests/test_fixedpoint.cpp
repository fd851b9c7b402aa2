#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ssmx/chart.hpp"
#include "ssmx/expansion.hpp"
#include "ssmx/fixedpoint.hpp"
#include "ssmx/models.hpp"

using namespace ssmx;

namespace {

const ConservativeChart& small_pendulum_chart() {
  static ConservativeChart ch = [] {
    SystemSpec spec = pendulum_system();
    SpectralData sd = decompose(spec);
    ChartOpts opts;
    opts.nrad = 8;
    opts.nmodes = 32;
    opts.nsamples = 64;
    return adapted_chart(spec, sd, 0.3, opts);
  }();
  return ch;
}

const Expansion& pendulum_expansion() {
  static Expansion ex = expand(small_pendulum_chart(), 2);
  return ex;
}

const Expansion& linear_expansion() {
  static ConservativeChart ch = [] {
    HyperParams par;
    par.nu = 0.0;
    par.g = 0.0;
    SystemSpec spec = hyper_system(par);
    SpectralData sd = decompose(spec);
    ChartOpts opts;
    opts.nrad = 8;
    opts.nmodes = 32;
    opts.nsamples = 64;
    return adapted_chart(spec, sd, 0.35, opts);
  }();
  static Expansion ex = expand(ch, 2);
  return ex;
}

const RefineResult& pendulum_refined() {
  static RefineResult res = iterate(pendulum_expansion(), Complex(0.08, 0.0), 2, 2);
  return res;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  double xm = 0.0, ym = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    xm += xs[i];
    ym += ys[i];
  }
  xm /= xs.size();
  ym /= ys.size();
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - xm) * (ys[i] - ym);
    den += (xs[i] - xm) * (xs[i] - xm);
  }
  return num / den;
}

// Random smooth correction vanishing to order d: a handful of polynomial
// terms of degree d through d+2 with Gaussian coefficients.
WeightedFunction random_correction(const Expansion& ex, int d, unsigned seed, double scale) {
  const int nc = ex.chart->dim;
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  PolyMap p(2, nc);
  for (int deg = d; deg <= d + 2; ++deg) {
    for (int a = 0; a <= deg; ++a) {
      MultiIndex e{static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(deg - a)};
      Eigen::VectorXd cv(nc);
      for (int c = 0; c < nc; ++c) cv(c) = scale * gauss(rng);
      p.add_term(e, cv);
    }
  }
  GridFunction f = GridFunction::from_point_values(
      ex.chart->grid,
      [&p](double x1, double x2) {
        Eigen::VectorXd x(2);
        x << x1, x2;
        return p.eval(x);
      },
      nc);
  return make_correction(ex, f, d);
}

}  // namespace

TEST_SUITE("fixedpoint") {
  TEST_CASE("the weight exponent clears the spectral margin") {
    CHECK(choose_d(5.0, 0.0) == 1);
    CHECK(choose_d(1.0, 2.5) == 4);
    CHECK(choose_d(5.0, 5.0) == 2);
    CHECK(choose_d(5.0, 5.0, 0.0) == 2);
    CHECK_THROWS(choose_d(0.0, 1.0));
    CHECK_THROWS(choose_d(-1.0, 0.0));

    for (auto [a, b] : std::vector<std::pair<double, double>>{{2, 3}, {1, 7}, {5, 5}}) {
      CHECK(choose_d(a, b, 0.0) <= choose_d(a, b, 0.2));
    }
  }

  TEST_CASE("one period of the rescaled conservative flow is the identity") {
    const Expansion& ex = pendulum_expansion();
    const double delta = ex.chart->grid->delta;

    TimeMaps m0 = time_t0_maps(ex, Complex(0.0, 0.0), 2);
    CHECK(m0.delta_eff == delta);
    CHECK(std::abs(m0.gamma_hat - 1.0) <= 1e-7);
    for (double frac : {0.4, 0.7, 1.0}) {
      for (int a = 0; a < 4; ++a) {
        const double th = 0.5 * kPi * a + 0.2;
        const Eigen::Vector2cd z(frac * delta * std::cos(th), frac * delta * std::sin(th));
        CHECK((m0.r(z) - z).norm() <= 1e-9);
      }
    }

    const Eigen::VectorXcd x = ex.embed(Eigen::Vector2cd(0.12, -0.2), Complex(0.0, 0.0), 2);
    CHECK((m0.phi(m0.phi_inv(x), m0.t0) - x).norm() <= 1e-8 * (1.0 + x.norm()));

    TimeMaps md = time_t0_maps(ex, Complex(0.05, 0.0), 2);
    CHECK(md.gamma_hat < 1.0);
    CHECK(md.gamma_hat > 0.5);
    CHECK(md.delta_eff == delta);
  }

  TEST_CASE("the refinement operator fixes an exact linear manifold") {
    const Expansion& ex = linear_expansion();
    const int d = choose_d(1.0, 1.0);
    CHECK(d == 2);

    TimeMaps maps = time_t0_maps(ex, Complex(0.1, 0.0), 2);
    ApplyStats st;
    WeightedFunction t0 = apply_T(zero_correction(ex, d), maps, &st);
    // The inner grid radius amplifies integrator noise by 1/rho^2, so the
    // zero image sits at the weighted quadrature floor rather than at zero.
    CHECK(t0.norm() <= 1e-7);
    CHECK(st.low_order <= 1e-7);

    IterOpts lo;
    lo.stop_tol = 1e-7;
    RefineResult res = iterate(ex, Complex(0.1, 0.0), 2, d, lo);
    CHECK(res.report.converged);
    CHECK(!res.report.aborted);
    CHECK(res.report.iterations == 1);
    CHECK(res.report.distance_to_seed <= 1e-7);
    CHECK(res.report.effective_rate < 1.0);
  }

  TEST_CASE("zero seed application scales with the truncation error") {
    const Expansion& ex = pendulum_expansion();
    std::vector<double> le, ln;
    for (double eps : {0.02, 0.04, 0.07, 0.1}) {
      TimeMaps maps = time_t0_maps(ex, Complex(eps, 0.0), 2);
      WeightedFunction t0 = apply_T(zero_correction(ex, 2), maps);
      le.push_back(std::log(eps));
      ln.push_back(std::log(t0.norm()));
    }
    CHECK(fit_slope(le, ln) >= 1.8);
  }

  TEST_CASE("picard refinement contracts onto the invariant manifold") {
    const Expansion& ex = pendulum_expansion();
    const RefineResult& res = pendulum_refined();
    const ContractionReport& rep = res.report;
    const double stop_tol = 1e-9;

    CHECK(rep.converged);
    CHECK(!rep.aborted);
    CHECK(rep.effective_rate < 1.0);
    CHECK(rep.final_residual < stop_tol);
    CHECK(rep.iterations >= 3);

    // Per-iteration contraction below one and within the predicted budget,
    // geometric after the opening iterates.
    const double budget = (1.0 + rep.beta_hat * 0.08) * std::pow(rep.gamma_hat, 2);
    for (size_t m = 1; m < rep.step_norms.size(); ++m) {
      if (rep.step_norms[m] < 50.0 * stop_tol) continue;
      const double ratio = rep.step_norms[m] / rep.step_norms[m - 1];
      CHECK(ratio < 1.0);
      CHECK(ratio <= 1.1 * budget);
      if (m >= 3) CHECK(ratio <= rep.effective_rate + 0.05);
    }

    // The refined embedding satisfies the invariance equation in ODE form.
    const Complex eps(0.08, 0.0);
    const ConservativeChart& ch = *ex.chart;
    const DiskGrid& g = *ch.grid;
    const int nc = ch.dim;
    std::vector<Eigen::MatrixXcd> kv(nc), gxv(nc), gyv(nc);
    auto grad = res.correction.f.gradient();
    for (int c = 0; c < nc; ++c) {
      Eigen::MatrixXcd a = res.correction.f.values(c);
      Eigen::MatrixXcd gx = grad.first.values(c);
      Eigen::MatrixXcd gy = grad.second.values(c);
      for (int m = 2; m >= 0; --m) {
        auto gm = std::make_pair(ex.Kx[m].values(c), ex.Ky[m].values(c));
        a = ex.K[m].values(c) + eps * a;
        gx = gm.first + eps * gx;
        gy = gm.second + eps * gy;
      }
      kv[c] = a;
      gxv[c] = gx;
      gyv[c] = gy;
    }
    double ode_res = 0.0;
    Eigen::VectorXcd y(nc), gx(nc), gy(nc);
    for (int j = 0; j < g.nrad; ++j) {
      const double w = std::pow(g.rho[j], -2.0);
      for (int i = 0; i < g.nsamples; ++i) {
        for (int c = 0; c < nc; ++c) {
          y(c) = kv[c](j, i);
          gx(c) = gxv[c](j, i);
          gy(c) = gyv[c](j, i);
        }
        const double th = 2.0 * kPi * i / g.nsamples;
        const Eigen::Vector2cd z(g.rho[j] * std::cos(th), g.rho[j] * std::sin(th));
        const Eigen::Vector2cd r = ex.reduced(z, eps, 2);
        const Eigen::VectorXcd f = ch.rspec.field(y, eps);
        ode_res = std::max(ode_res, w * (f - gx * r(0) - gy * r(1)).norm());
      }
    }
    CHECK(ode_res <= 1e2 * stop_tol);
  }

  TEST_CASE("the distance to the seed shrinks with epsilon") {
    const Expansion& ex = pendulum_expansion();
    IterOpts opts;
    opts.stop_tol = 1e-8;
    std::vector<double> le, ld;
    for (double eps : {0.05, 0.08, 0.12}) {
      RefineResult res = iterate(ex, Complex(eps, 0.0), 2, 2, opts);
      CHECK(res.report.converged);
      le.push_back(std::log(eps));
      ld.push_back(std::log(res.report.distance_to_seed));
    }
    CHECK(fit_slope(le, ld) >= 1.8);
  }

  TEST_CASE("the refined manifold obeys the flow at fractional times") {
    const Expansion& ex = pendulum_expansion();
    const RefineResult& res = pendulum_refined();
    TimeMaps maps = time_t0_maps(ex, Complex(0.08, 0.0), 2);
    const std::vector<double> svals = {0.0, maps.t0 / 7.0, maps.t0};
    std::vector<double> defects = semiflow_check(res.correction, maps, svals);
    REQUIRE(defects.size() == 3);
    CHECK(defects[0] == 0.0);
    CHECK(defects[1] < 1e-8);
    CHECK(defects[2] < 1e-8);
  }

  TEST_CASE("the operator is Lipschitz with the predicted constant") {
    const Expansion& ex = pendulum_expansion();
    const ContractionReport& rep = pendulum_refined().report;
    TimeMaps maps = time_t0_maps(ex, Complex(0.08, 0.0), 2);

    const double budget = 1.1 * (1.0 + rep.beta_hat * 0.08) * std::pow(rep.gamma_hat, 2);
    const int npairs = 20;
    std::vector<WeightedFunction> cs, ts;
    for (int k = 0; k <= npairs; ++k) {
      cs.push_back(random_correction(ex, 2, 500u + k, 1e-4));
      ts.push_back(apply_T(cs.back(), maps));
    }
    for (int k = 0; k < npairs; ++k) {
      const double num = distance(ts[k + 1], ts[k]);
      const double den = distance(cs[k + 1], cs[k]);
      CHECK(num <= budget * den);
    }
  }

  TEST_CASE("composition with the return map respects the weighted norm") {
    const Expansion& ex = pendulum_expansion();
    TimeMaps maps = time_t0_maps(ex, Complex(0.08, 0.0), 2);
    WeightedFunction c = random_correction(ex, 2, 99u, 1e-3);

    GridFunction comp = GridFunction::from_point_values(
        ex.chart->grid,
        [&](double x1, double x2) {
          const Eigen::Vector2cd w = maps.r(Eigen::Vector2cd(x1, x2));
          return c.f.eval(w(0).real(), w(1).real());
        },
        ex.chart->dim);
    WeightedFunction cr = make_correction(ex, comp, 2);
    CHECK(cr.norm() <= 1.05 * std::pow(maps.gamma_hat, 2) * c.norm());
  }

  TEST_CASE("a complex ray refinement stays contractive") {
    const Expansion& ex = pendulum_expansion();
    const Complex eps = 0.08 * std::exp(Complex(0.0, 0.1));
    IterOpts opts;
    opts.stop_tol = 1e-8;
    opts.max_iter = 25;
    RefineResult res = iterate(ex, eps, 2, 2, opts);
    CHECK(!res.report.aborted);
    CHECK(res.report.effective_rate < 1.0);
    for (size_t m = 1; m < res.report.step_norms.size(); ++m) {
      if (res.report.step_norms[m] < 50.0 * opts.stop_tol) continue;
      CHECK(res.report.step_norms[m] < res.report.step_norms[m - 1]);
    }
    CHECK(res.report.distance_to_seed < 1.0);
  }
}
