#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ssmx/io.hpp"
#include "ssmx/models.hpp"

using namespace ssmx;

namespace {

// Quadratic-graph coefficients of the two-mass model solved from first
// principles: substitute (q2, p2) = w(q1, p1) into the equations of motion and
// match the quadratic monomials. Unknown order (A1, B1, C1, A2, B2, C2) with
// q2 = A1 x^2 + B1 xy + C1 y^2, p2 = A2 x^2 + B2 xy + C2 y^2 in x = q1, y = p1.
Eigen::VectorXd graph_matching_solve(const PendulumParams& par, double eps) {
  const double m = par.m, k = par.k, K = par.kq, l0 = par.l0;
  const double a = 2 * k + 4 * K * l0 * l0;
  const double b = 2 * k + 12 * K * l0 * l0;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 6);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(6);
  // d/dt q2 = p2 / m, coefficients of x^2, xy, y^2:
  A.row(0) << 0, -a, 0, -1 / m, 0, 0;
  A.row(1) << 2 / m, -eps / m, -2 * a, 0, -1 / m, 0;
  A.row(2) << 0, 1 / m, -2 * eps / m, 0, 0, -1 / m;
  // d/dt p2 = -b q2 - (eps/m) p2 + 4 K l0 x^2:
  A.row(3) << b, 0, 0, eps / m, -a, 0;
  rhs(3) = 4 * K * l0;
  A.row(4) << 0, b, 0, 2 / m, 0, -2 * a;
  A.row(5) << 0, 0, b, 0, 1 / m, -eps / m;
  return A.fullPivLu().solve(rhs);
}

GraphCoefficients as_graph(const Eigen::VectorXd& u) {
  GraphCoefficients g;
  g.w20 << u(0), u(3);
  g.w11 << u(1), u(4);
  g.w02 << u(2), u(5);
  return g;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("two-mass factory is the generic mechanical constructor") {
  PendulumParams par;
  const double m = par.m, k = par.k, K = par.kq, l0 = par.l0;
  Eigen::Matrix2d M = m * Eigen::Matrix2d::Identity();
  Eigen::Matrix2d Cd = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d Kmat;
  Kmat << 2 * k + 4 * K * l0 * l0, 0.0, 0.0, 2 * k + 12 * K * l0 * l0;
  PolyMap V(2, 1);
  V.add_term(std::vector<int>{2, 1}, Eigen::VectorXd::Constant(1, -4 * K * l0));
  V.add_term(std::vector<int>{0, 3}, Eigen::VectorXd::Constant(1, -4 * K * l0));
  V.add_term(std::vector<int>{4, 0}, Eigen::VectorXd::Constant(1, K));
  V.add_term(std::vector<int>{2, 2}, Eigen::VectorXd::Constant(1, 2 * K));
  V.add_term(std::vector<int>{0, 4}, Eigen::VectorXd::Constant(1, K));
  SystemSpec manual = mechanical_system(M, Cd, Kmat, V, "pendulum");
  CHECK(serialize_model(pendulum_system(par)) == serialize_model(manual));
}

TEST_CASE("two-mass energy matches the handwritten Hamiltonian") {
  PendulumParams par;
  SystemSpec spec = pendulum_system(par);
  REQUIRE(spec.conserved.has_value());
  CHECK(spec.hamiltonian);
  const double m = par.m, k = par.k, K = par.kq, l0 = par.l0;
  Rng rng = seeded_rng(31);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (int it = 0; it < 10; ++it) {
    const double q1 = u(rng), q2 = u(rng), p1 = u(rng), p2 = u(rng);
    Eigen::VectorXd x(4);
    x << q1, q2, p1, p2;
    const double href = (p1 * p1 + p2 * p2) / (2 * m) + (k + 2 * K * l0 * l0) * q1 * q1 +
                        (k + 6 * K * l0 * l0) * q2 * q2 - 4 * K * l0 * q1 * q1 * q2 -
                        4 * K * l0 * q2 * q2 * q2 +
                        K * (q1 * q1 + q2 * q2) * (q1 * q1 + q2 * q2);
    CHECK(spec.conserved_value(x) == doctest::Approx(href).epsilon(1e-13));
  }
}

// The potential is even under (q1, p1) -> (-q1, -p1), so the first correction
// beyond the quadratic graph is quartic and the matching residual scales h^4.
TEST_CASE("matching solve closes: graph residual decays quartically") {
  PendulumParams par;
  SystemSpec spec = pendulum_system(par);
  for (double eps : {0.0, 0.1}) {
    Eigen::VectorXd u = graph_matching_solve(par, eps);
    auto graph_resid = [&](double h) {
      const double x = 0.8 * h, y = 0.5 * h;
      const double q2 = u(0) * x * x + u(1) * x * y + u(2) * y * y;
      const double p2 = u(3) * x * x + u(4) * x * y + u(5) * y * y;
      Eigen::VectorXd s(4);
      s << x, q2, y, p2;
      Eigen::VectorXd f = spec.field(s, eps);
      const double rq = f(1) - ((2 * u(0) * x + u(1) * y) * f(0) + (u(1) * x + 2 * u(2) * y) * f(2));
      const double rp = f(3) - ((2 * u(3) * x + u(4) * y) * f(0) + (u(4) * x + 2 * u(5) * y) * f(2));
      return std::sqrt(rq * rq + rp * rp);
    };
    const double r1 = graph_resid(1e-2), r2 = graph_resid(5e-3);
    CHECK(r1 > 0.0);
    CHECK(r1 / r2 == doctest::Approx(16.0).epsilon(0.1));
  }
}

TEST_CASE("matching solve reproduces the closed forms at eps = 0") {
  PendulumParams par;
  const double m = par.m, k = par.k, K = par.kq, l0 = par.l0;
  const double a = 2 * k + 4 * K * l0 * l0;
  const double b = 2 * k + 12 * K * l0 * l0;
  Eigen::VectorXd u = graph_matching_solve(par, 0.0);
  const double C1 = 8 * K * l0 / (m * b * (4 * a - b));
  CHECK(u(2) == doctest::Approx(C1).epsilon(1e-12));
  CHECK(u(0) == doctest::Approx(m * (2 * a - b) * C1 / 2).epsilon(1e-12));
  CHECK(u(4) == doctest::Approx(-b * m * C1).epsilon(1e-12));
  CHECK(std::abs(u(1)) < 1e-14);
  CHECK(std::abs(u(3)) < 1e-14);
  CHECK(std::abs(u(5)) < 1e-14);

  // Structural identities that hold at every eps.
  for (double eps : {0.02, 0.1}) {
    Eigen::VectorXd v = graph_matching_solve(par, eps);
    CHECK(v(3) == doctest::Approx(-a * m * v(1)).epsilon(1e-12));            // A2 = -a m B1
    CHECK(v(5) == doctest::Approx(v(1) - 2 * eps * v(2)).epsilon(1e-12));    // C2 = B1 - 2 eps C1
  }
}

TEST_CASE("reference table: four entries track the matching solve, two are off") {
  PendulumParams par;
  GraphCoefficients printed0 = pendulum_reference_w(par, 0.0);
  Eigen::VectorXd u0 = graph_matching_solve(par, 0.0);

  // Agreeing entries at eps = 0.
  CHECK(printed0.w20(0) == doctest::Approx(u0(0)).epsilon(1e-10));
  CHECK(printed0.w11(1) == doctest::Approx(u0(4)).epsilon(1e-10));
  CHECK(printed0.w20(1) == 0.0);
  CHECK(printed0.w11(0) == 0.0);
  CHECK(printed0.w02(1) == 0.0);

  // The q2 coefficient of p1^2 is exactly twice the value the matching
  // equations admit; the table is internally inconsistent there.
  CHECK(printed0.w02(0) == doctest::Approx(2.0 * u0(2)).epsilon(1e-10));

  // First-order motion in eps: finite differences of both sources.
  const double h = 1e-6;
  Eigen::VectorXd uh = graph_matching_solve(par, h);
  GraphCoefficients ph = pendulum_reference_w(par, h);
  auto slope_true = [&](int i) { return (uh(i) - u0(i)) / h; };
  const double s_w11q = (ph.w11(0) - printed0.w11(0)) / h;
  const double s_w02p = (ph.w02(1) - printed0.w02(1)) / h;
  const double s_w20p = (ph.w20(1) - printed0.w20(1)) / h;
  CHECK(s_w11q == doctest::Approx(slope_true(1)).epsilon(1e-6));
  CHECK(s_w02p == doctest::Approx(slope_true(5)).epsilon(1e-6));
  // The p2 coefficient of q1^2 moves at exactly half the admissible rate.
  CHECK(s_w20p == doctest::Approx(0.5 * slope_true(3)).epsilon(1e-6));
}

TEST_CASE("linearized reference is the first-order Taylor of the full table") {
  PendulumParams par;
  GraphCoefficients full0 = pendulum_reference_w(par, 0.0);
  const double h = 1e-6;
  GraphCoefficients fullh = pendulum_reference_w(par, h);
  auto check_component = [&](auto pick) {
    const double v0 = pick(full0);
    const double slope = (pick(fullh) - v0) / h;
    for (double eps : {0.0, 0.05, 0.1}) {
      GraphCoefficients lin = pendulum_reference_w_linear(par, eps);
      CHECK(std::abs(pick(lin) - (v0 + eps * slope)) < 1e-5);
    }
  };
  check_component([](const GraphCoefficients& g) { return g.w20(0); });
  check_component([](const GraphCoefficients& g) { return g.w20(1); });
  check_component([](const GraphCoefficients& g) { return g.w11(0); });
  check_component([](const GraphCoefficients& g) { return g.w11(1); });
  check_component([](const GraphCoefficients& g) { return g.w02(0); });
  check_component([](const GraphCoefficients& g) { return g.w02(1); });
  GraphCoefficients at0 = pendulum_reference_w_linear(par, 0.0);
  CHECK(at0.w20(0) == full0.w20(0));
  CHECK(at0.w02(0) == full0.w02(0));
  CHECK(at0.w11(1) == full0.w11(1));
}

TEST_CASE("reduced reference expands the printed closed form") {
  PendulumParams par;
  const double m = par.m, k = par.k, K = par.kq, l0 = par.l0;
  for (double eps : {0.0, 0.1}) {
    PolyMap red = pendulum_reduced_reference(par, eps);
    REQUIRE(red.n_in() == 2);
    REQUIRE(red.n_out() == 2);
    const double kap = 1.0 / ((k + 6 * K * l0 * l0) *
                              (-eps * eps * (k - 2 * K * l0 * l0) +
                               2 * std::pow(3 * k + 2 * K * l0 * l0, 2) * m));
    const double al = -(k + 6 * K * l0 * l0) *
                      (-eps * eps * (k - 2 * K * l0 * l0) +
                       2 * std::pow(3 * k + 2 * K * l0 * l0, 2) * m);
    const double be = 16 * eps * K * (k + 2 * K * l0 * l0);
    const double ga = 2 * K * (eps * eps * (k + 6 * K * l0 * l0) +
                               2 * (3 * k * k - 4 * k * K * l0 * l0 -
                                    4 * K * K * l0 * l0 * l0 * l0) * m);
    const double de = 8 * K * (3 * k + 2 * K * l0 * l0);
    Rng rng = seeded_rng(33);
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    for (int it = 0; it < 8; ++it) {
      const double x = u(rng), y = u(rng);
      Eigen::VectorXd xy(2);
      xy << x, y;
      Eigen::VectorXd val = red.eval(xy);
      const double bracket = al + be * x * y + ga * x * x + de * y * y;
      const double fy = -2 * (k + 2 * K * l0 * l0) * x - eps * y / m +
                        4 * K * kap * kap * x * (x * x + l0 * l0 * bracket * bracket);
      CHECK(val(0) == doctest::Approx(2.0 * y / m).epsilon(1e-12));
      CHECK(val(1) == doctest::Approx(fy).epsilon(1e-11));
    }
  }
}

TEST_CASE("slow-damping cover field matches its polar definition") {
  Example1Params par;
  SystemSpec spec = example1_system(par);
  REQUIRE(spec.dim == 4);
  Rng rng = seeded_rng(34);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (double eps : {0.0, 0.05}) {
    for (int it = 0; it < 8; ++it) {
      Eigen::VectorXd z(4);
      for (int i = 0; i < 4; ++i) z(i) = u(rng);
      Eigen::VectorXd f = spec.field(z, eps);
      const double r2 = z(0) * z(0) + z(1) * z(1);
      // z block: (omega/2) J z - (eps^2/2) z + (eps/2) |z|^2 z
      CHECK(f(0) == doctest::Approx(par.omega / 2 * z(1) - eps * eps / 2 * z(0) +
                                    eps / 2 * r2 * z(0)).epsilon(1e-12));
      CHECK(f(1) == doctest::Approx(-par.omega / 2 * z(0) - eps * eps / 2 * z(1) +
                                    eps / 2 * r2 * z(1)).epsilon(1e-12));
      // transverse block: gamma J u + a eps^2 u
      CHECK(f(2) == doctest::Approx(par.gamma * z(3) + par.a * eps * eps * z(2)).epsilon(1e-12));
      CHECK(f(3) == doctest::Approx(-par.gamma * z(2) + par.a * eps * eps * z(3)).epsilon(1e-12));
    }
  }
  // The covered radius |z|^2 obeys d/dt rho = -eps^2 rho + eps rho^2.
  const double eps = 0.05;
  Eigen::VectorXd z(4);
  z << 0.3, 0.1, 0.0, 0.0;
  Eigen::VectorXd f = spec.field(z, eps);
  const double rho = z(0) * z(0) + z(1) * z(1);
  const double drho = 2 * (z(0) * f(0) + z(1) * f(1));
  CHECK(drho == doctest::Approx(-eps * eps * rho + eps * rho * rho).epsilon(1e-12));
}

TEST_CASE("resonant graph: direct solve, Schur route, and exact invariance") {
  ResonantParams par;
  for (double alpha : {3.0, 2.0}) {
    par.alpha = alpha;
    for (double eps : {1e-3, 0.05}) {
      QuadGraph g = resonant_graph_direct(par, eps);
      Eigen::Vector2d h11 = resonant_h11_schur(par, eps);
      CHECK((g.h11 - h11).norm() < 1e-10 * (1.0 + g.h11.norm()));

      // Substituted into the field, the graph is invariant with zero remainder
      // (the model has no cubic terms).
      SystemSpec spec = resonant_system(par);
      Rng rng = seeded_rng(35);
      std::uniform_real_distribution<double> u(-0.6, 0.6);
      for (int it = 0; it < 6; ++it) {
        const double x1 = u(rng), x2 = u(rng);
        Eigen::Vector2d eta = g.h20 * x1 * x1 + g.h11 * x1 * x2 + g.h02 * x2 * x2;
        Eigen::VectorXd s(4);
        s << x1, x2, eta(0), eta(1);
        Eigen::VectorXd f = spec.field(s, eps);
        Eigen::Matrix2d dh;
        dh.col(0) = 2 * g.h20 * x1 + g.h11 * x2;
        dh.col(1) = g.h11 * x1 + 2 * g.h02 * x2;
        Eigen::Vector2d resid = f.tail(2) - dh * f.head(2);
        CHECK(resid.norm() < 1e-12 * (1.0 + g.norm()));
      }
    }
  }
}

TEST_CASE("resonant graph grows like 1/eps at the 2:1 ratio") {
  ResonantParams par;
  par.alpha = 2.0;
  const double n1 = resonant_graph_direct(par, 1e-3).norm();
  const double n2 = resonant_graph_direct(par, 1e-4).norm();
  CHECK(n2 / n1 == doctest::Approx(10.0).epsilon(0.05));
  par.alpha = 3.0;
  const double m1 = resonant_graph_direct(par, 1e-3).norm();
  const double m2 = resonant_graph_direct(par, 1e-4).norm();
  CHECK(std::abs(m2 / m1 - 1.0) < 0.01);
}

TEST_CASE("amplitude-dependent model: field formula and exact conservation") {
  HyperParams par;
  SystemSpec spec = hyper_system(par);
  Rng rng = seeded_rng(36);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (int it = 0; it < 8; ++it) {
    Eigen::VectorXd s(4);
    for (int i = 0; i < 4; ++i) s(i) = u(rng);
    const double eps = 0.03;
    Eigen::VectorXd f = spec.field(s, eps);
    const double x2 = s(0) * s(0) + s(1) * s(1);
    const double y2 = s(2) * s(2) + s(3) * s(3);
    const double h = par.g / 2;
    CHECK(f(0) == doctest::Approx(par.omega1 * s(1) + par.nu * x2 * s(1) -
                                  h * y2 * x2 * s(0) - eps * par.cdamp * s(0)).epsilon(1e-12));
    CHECK(f(1) == doctest::Approx(-par.omega1 * s(0) - par.nu * x2 * s(0) -
                                  h * y2 * x2 * s(1) - eps * par.cdamp * s(1)).epsilon(1e-12));
    CHECK(f(2) == doctest::Approx(par.omega2 * s(3) + h * x2 * x2 * s(2) -
                                  eps * par.cdamp * s(2)).epsilon(1e-12));
    CHECK(f(3) == doctest::Approx(-par.omega2 * s(2) + h * x2 * x2 * s(3) -
                                  eps * par.cdamp * s(3)).epsilon(1e-12));
    // I = |x|^2 + |y|^2 is conserved by the eps = 0 field.
    Eigen::VectorXd f0 = spec.field(s, 0.0);
    Eigen::VectorXd gi = spec.conserved_gradient(s);
    CHECK(std::abs(gi.dot(f0)) < 1e-13);
  }
}

}  // TEST_SUITE
