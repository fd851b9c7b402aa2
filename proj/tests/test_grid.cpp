#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "ssmx/grid.hpp"
#include "ssmx/poly.hpp"
#include "ssmx/util.hpp"

using namespace ssmx;

namespace {

DiskGridPtr make_grid(double delta = 0.5) { return std::make_shared<DiskGrid>(delta); }

PolyMap sample_poly() {
  PolyMap p(2, 2);
  auto put = [&](int out, std::vector<int> e, double c) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(2);
    v(out) = c;
    p.add_term(e, v);
  };
  put(0, {0, 0}, 0.7);
  put(0, {1, 0}, -1.2);
  put(0, {1, 1}, 0.5);
  put(0, {3, 0}, 2.0);
  put(0, {0, 4}, -0.8);
  put(1, {0, 1}, 0.9);
  put(1, {2, 0}, 1.5);
  put(1, {2, 2}, -0.6);
  put(1, {0, 3}, 0.4);
  return p;
}

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("fft transforms match the definition and round-trip") {
  const int n = 16;
  Rng rng = seeded_rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Complex> x(n);
  for (auto& v : x) v = Complex(u(rng), u(rng));
  std::vector<Complex> fw = x;
  fft_radix2(fw, false);
  for (int k = 0; k < n; ++k) {
    Complex ref = 0.0;
    for (int j = 0; j < n; ++j)
      ref += x[j] * std::exp(Complex(0.0, -2.0 * M_PI * j * k / n));
    CHECK(std::abs(fw[k] - ref) < 1e-12);
  }
  std::vector<Complex> back = fw;
  fft_radix2(back, true);
  for (int j = 0; j < n; ++j) CHECK(std::abs(back[j] - x[j]) < 1e-13);
}

TEST_CASE("disk grid node layout") {
  DiskGrid g(0.5);
  CHECK(g.delta == 0.5);
  CHECK(g.smax == doctest::Approx((1.05 * 0.5) * (1.05 * 0.5)).epsilon(1e-15));
  REQUIRE(static_cast<int>(g.s.size()) == g.nrad);
  for (int j = 0; j < g.nrad; ++j) {
    CHECK(g.s[j] > 0.0);
    CHECK(g.s[j] < g.smax);
    CHECK(g.rho[j] == doctest::Approx(std::sqrt(g.s[j])).epsilon(1e-15));
    if (j > 0) CHECK(g.s[j] > g.s[j - 1]);
  }
  CHECK(g.kmax() == g.nmodes / 2 - 1);
}

TEST_CASE("point sampling reproduces an analytic function off the nodes") {
  auto grid = make_grid();
  auto f = [](double x1, double x2) {
    Eigen::VectorXd v(2);
    v(0) = std::exp(0.3 * x1) * std::cos(x2);
    v(1) = std::sin(x1 * x2) + 0.2 * x1;
    return v;
  };
  GridFunction gf = GridFunction::from_point_values(grid, f, 2);
  Rng rng = seeded_rng(42);
  std::uniform_real_distribution<double> ur(0.05, 0.45), ut(0.0, 2.0 * M_PI);
  for (int it = 0; it < 20; ++it) {
    const double r = ur(rng), t = ut(rng);
    const double x1 = r * std::cos(t), x2 = r * std::sin(t);
    Eigen::VectorXd got = gf.eval(x1, x2);
    Eigen::VectorXd want = f(x1, x2);
    CHECK((got - want).norm() < 1e-10);
  }
}

TEST_CASE("gradient matches analytic partial derivatives") {
  auto grid = make_grid();
  auto f = [](double x1, double x2) {
    return Eigen::VectorXd::Constant(1, std::exp(0.4 * x1 - 0.2 * x2) + x1 * x1 * x2);
  };
  GridFunction gf = GridFunction::from_point_values(grid, f, 1);
  auto [d1, d2] = gf.gradient();
  Rng rng = seeded_rng(43);
  std::uniform_real_distribution<double> ur(0.05, 0.4), ut(0.0, 2.0 * M_PI);
  for (int it = 0; it < 15; ++it) {
    const double r = ur(rng), t = ut(rng);
    const double x1 = r * std::cos(t), x2 = r * std::sin(t);
    const double e = std::exp(0.4 * x1 - 0.2 * x2);
    CHECK(d1.eval(x1, x2)(0) == doctest::Approx(0.4 * e + 2 * x1 * x2).epsilon(1e-8));
    CHECK(d2.eval(x1, x2)(0) == doctest::Approx(-0.2 * e + x1 * x1).epsilon(1e-8));
  }
}

TEST_CASE("angular derivative rotates the coordinate functions") {
  auto grid = make_grid();
  auto f = [](double x1, double x2) {
    Eigen::VectorXd v(2);
    v(0) = x1;
    v(1) = x2;
    return v;
  };
  GridFunction gf = GridFunction::from_point_values(grid, f, 2);
  GridFunction dt = gf.dtheta();
  for (double t : {0.3, 1.7, 4.0}) {
    const double r = 0.3;
    const double x1 = r * std::cos(t), x2 = r * std::sin(t);
    Eigen::VectorXd v = dt.eval(x1, x2);
    CHECK(v(0) == doctest::Approx(-x2).epsilon(1e-11));
    CHECK(v(1) == doctest::Approx(x1).epsilon(1e-11));
  }
}

TEST_CASE("taylor jet recovers polynomial coefficients exactly") {
  auto grid = make_grid();
  PolyMap p = sample_poly();
  GridFunction gf = GridFunction::from_point_values(
      grid, [&](double x1, double x2) {
        Eigen::VectorXd x(2);
        x << x1, x2;
        return p.eval(x);
      },
      2);
  PolyMap jet = gf.taylor(4);
  CHECK((jet - p).max_abs_coef() < 1e-10);
}

TEST_CASE("radial taylor extracts s-series coefficients") {
  DiskGrid g(0.5);
  std::vector<Complex> poly(g.nrad), expo(g.nrad);
  for (int j = 0; j < g.nrad; ++j) {
    const double s = g.s[j];
    poly[j] = 1.0 + 2.0 * s + 3.0 * s * s;
    expo[j] = std::exp(s);
  }
  auto cp = radial_taylor(g, poly, 2);
  REQUIRE(cp.size() == 3);
  CHECK(std::abs(cp[0] - 1.0) < 1e-12);
  CHECK(std::abs(cp[1] - 2.0) < 1e-11);
  CHECK(std::abs(cp[2] - 3.0) < 1e-10);
  auto ce = radial_taylor(g, expo, 2);
  CHECK(std::abs(ce[0] - 1.0) < 1e-12);
  CHECK(std::abs(ce[1] - 1.0) < 1e-10);
  CHECK(std::abs(ce[2] - 0.5) < 5e-9);
}

TEST_CASE("remove_below_order strips the low jet and reports its size") {
  auto grid = make_grid();
  auto f = [](double x1, double x2) {
    return Eigen::VectorXd::Constant(1, 0.3 + x1 - 2.0 * x1 * x2 + 0.7 * x1 * x1 * x2);
  };
  GridFunction gf = GridFunction::from_point_values(grid, f, 1);
  const double removed = gf.remove_below_order(3);
  CHECK(removed > 0.05);
  for (double t : {0.4, 2.2}) {
    const double r = 0.35;
    const double x1 = r * std::cos(t), x2 = r * std::sin(t);
    CHECK(gf.eval(x1, x2)(0) == doctest::Approx(0.7 * x1 * x1 * x2).epsilon(1e-9));
  }
  // What remains vanishes to third order: the weighted sup stays finite.
  CHECK(std::isfinite(gf.weighted_sup(3)));
  CHECK(gf.weighted_sup(3) < 1.0);
}

TEST_CASE("weighted sup of a pure quadratic is its angular peak") {
  auto grid = make_grid();
  GridFunction gf = GridFunction::from_point_values(
      grid, [](double x1, double x2) { return Eigen::VectorXd::Constant(1, x1 * x1); }, 1);
  CHECK(gf.weighted_sup(2) == doctest::Approx(1.0).epsilon(1e-12));
  // Divided by rho^1 instead the sup scales with the largest node radius.
  CHECK(gf.weighted_sup(1) == doctest::Approx(grid->rho.back()).epsilon(1e-10));
}

TEST_CASE("flow sampling with a phase offset matches direct sampling") {
  auto grid = make_grid();
  auto f = [](double x1, double x2) {
    Eigen::VectorXd v(2);
    v(0) = x1 + 0.3 * x2 * x2;
    v(1) = std::cos(x1) * x2;
    return v;
  };
  const double theta0 = M_PI / 2;
  std::vector<Eigen::MatrixXd> samples(2, Eigen::MatrixXd(grid->nrad, grid->nsamples));
  for (int j = 0; j < grid->nrad; ++j) {
    for (int i = 0; i < grid->nsamples; ++i) {
      const double th = theta0 - 2.0 * M_PI * i / grid->nsamples;
      Eigen::VectorXd v = f(grid->rho[j] * std::cos(th), grid->rho[j] * std::sin(th));
      samples[0](j, i) = v(0);
      samples[1](j, i) = v(1);
    }
  }
  GridFunction a = GridFunction::from_flow_samples(grid, samples, theta0);
  GridFunction b = GridFunction::from_point_values(grid, f, 2);
  GridFunction diff = a - b;
  CHECK(diff.max_abs() < 1e-12);
}

TEST_CASE("complex evaluation continues a polynomial off the real slice") {
  auto grid = make_grid();
  PolyMap p = sample_poly();
  GridFunction gf = GridFunction::from_point_values(
      grid, [&](double x1, double x2) {
        Eigen::VectorXd x(2);
        x << x1, x2;
        return p.eval(x);
      },
      2);
  Eigen::Vector2cd z;
  z << Complex(0.3, 0.04), Complex(-0.2, 0.05);
  REQUIRE((z(0) * z(0) + z(1) * z(1)).real() > 0.0);
  Eigen::VectorXcd got = gf.eval(z);
  Eigen::Matrix<Complex, Eigen::Dynamic, 1> zc(2);
  zc << z(0), z(1);
  Eigen::Matrix<Complex, Eigen::Dynamic, 1> want = p.eval(zc);
  CHECK((got - want).norm() < 1e-9);
}

TEST_CASE("arithmetic and symmetrize behave") {
  auto grid = make_grid();
  auto f = [](double x1, double x2) { return Eigen::VectorXd::Constant(1, x1 * x2 + 0.1); };
  auto g = [](double x1, double x2) { return Eigen::VectorXd::Constant(1, x2 - x1 * x1); };
  GridFunction a = GridFunction::from_point_values(grid, f, 1);
  GridFunction b = GridFunction::from_point_values(grid, g, 1);
  GridFunction sum = a + b;
  CHECK(sum.eval(0.2, -0.1)(0) ==
        doctest::Approx(f(0.2, -0.1)(0) + g(0.2, -0.1)(0)).epsilon(1e-11));
  GridFunction sc = a.scaled(-2.5);
  CHECK(sc.eval(0.1, 0.3)(0) == doctest::Approx(-2.5 * f(0.1, 0.3)(0)).epsilon(1e-11));
  GridFunction c = a;
  c.symmetrize();
  CHECK((c - a).max_abs() < 1e-13);
}

}  // TEST_SUITE
