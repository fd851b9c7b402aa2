#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ssmx/models.hpp"
#include "ssmx/spectral.hpp"

using namespace ssmx;

TEST_SUITE("spectral") {

TEST_CASE("two-mass decomposition: frequencies, plane, duals") {
  PendulumParams par;
  SystemSpec spec = pendulum_system(par);
  SpectralData sd = decompose(spec);
  const double w1 = std::sqrt((2 * par.k + 4 * par.kq * par.l0 * par.l0) / par.m);
  const double w2 = std::sqrt((2 * par.k + 12 * par.kq * par.l0 * par.l0) / par.m);
  CHECK(sd.omega0 == doctest::Approx(w1).epsilon(1e-12));
  CHECK(sd.semisimple);

  REQUIRE(sd.mu.size() == 2);
  for (const auto& mu : sd.mu) {
    CHECK(std::abs(mu.real()) < 1e-10);
    CHECK(std::abs(mu.imag()) == doctest::Approx(w2).epsilon(1e-12));
  }

  // L plane = plane (omega0 J): clockwise rotation in chart coordinates.
  Eigen::Matrix2d J;
  J << 0.0, 1.0, -1.0, 0.0;
  CHECK((spec.L * sd.plane - sd.plane * (sd.omega0 * J)).norm() < 1e-10);

  CHECK(sd.plane.col(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(sd.plane.col(0).dot(sd.plane.col(1))) < 1e-10);

  CHECK((sd.dual * sd.plane - Eigen::Matrix2d::Identity()).norm() < 1e-10);
  CHECK((sd.dual * sd.basis2).norm() < 1e-10);
  CHECK((sd.basis2.transpose() * sd.basis2 - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);

  // Left/right pairing is normalized.
  CHECK(std::abs((sd.lvec.transpose() * sd.v.cast<Complex>())(0) - Complex(1.0, 0.0)) < 1e-10);

  // The slow plane is the (q1, p1) plane: v = (1, 0, i m omega0, 0) up to sign.
  CHECK(std::abs(std::abs(sd.v(0)) - 1.0) < 1e-10);
  CHECK(std::abs(sd.v(1)) < 1e-10);
  CHECK(std::abs(std::abs(sd.v(2)) - par.m * w1) < 1e-8);
  CHECK(std::abs(sd.v(3)) < 1e-10);
}

TEST_CASE("pair selection by index") {
  SystemSpec spec = hyper_system({});
  SpectralData s0 = decompose(spec, 0);
  SpectralData s1 = decompose(spec, 1);
  CHECK(s0.omega0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s1.omega0 == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  CHECK(decompose(spec, -1).omega0 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("first-order eigenvalue motion under damping") {
  PendulumParams par;
  SystemSpec spec = pendulum_system(par);
  SpectralData sd = decompose(spec);
  PerturbedPair pp = perturbed_pair(spec, sd);
  CHECK(pp.alpha == doctest::Approx(1.0 / (2.0 * par.m)).epsilon(1e-10));
  CHECK(std::abs(pp.alpha_im) < 1e-10);
  CHECK(pp.crosscheck_rel < 1e-3);

  HyperParams hp;
  SystemSpec hyper = hyper_system(hp);
  PerturbedPair hpp = perturbed_pair(hyper, decompose(hyper));
  CHECK(hpp.alpha == doctest::Approx(hp.cdamp).epsilon(1e-10));

  // Slow-damping counterexample: no order-eps decay at all.
  SystemSpec ex1 = example1_system({});
  PerturbedPair epp = perturbed_pair(ex1, decompose(ex1));
  CHECK(std::abs(epp.alpha) < 1e-12);
}

TEST_CASE("nonresonance margins") {
  PendulumParams par;
  SystemSpec spec = pendulum_system(par);
  SpectralData sd = decompose(spec);
  const double w1 = sd.omega0;
  const double w2 = std::sqrt((2 * par.k + 12 * par.kq * par.l0 * par.l0) / par.m);

  NonresReport lyap = check_nonresonance(spec, sd, "lyapunov");
  CHECK(lyap.pass);
  CHECK(lyap.margin == doctest::Approx(2.0 - w2 / w1).epsilon(1e-8));

  NonresReport pw = check_nonresonance(spec, sd, "pairwise");
  CHECK(pw.pass);
  CHECK(pw.margin == doctest::Approx(2.0 * w2 - 3.0 * w1).epsilon(1e-8));

  NonresOptions ko;
  ko.eps = 0.0;
  NonresReport kp = check_nonresonance(spec, sd, "kappa", ko);
  CHECK(kp.pass);
  CHECK(kp.kmax >= 4);
}

TEST_CASE("integer frequency ratios are flagged") {
  ResonantParams rp;
  rp.alpha = 2.0;
  SystemSpec spec = resonant_system(rp);
  SpectralData sd = decompose(spec);
  CHECK(sd.omega0 == doctest::Approx(1.0).epsilon(1e-12));

  NonresReport lyap = check_nonresonance(spec, sd, "lyapunov");
  CHECK_FALSE(lyap.pass);
  CHECK(lyap.margin < 1e-10);

  NonresOptions ko;
  NonresReport kp = check_nonresonance(spec, sd, "kappa", ko);
  CHECK_FALSE(kp.pass);
  CHECK(kp.margin < 1e-10);

  rp.alpha = std::sqrt(7.0);
  NonresReport ok = check_nonresonance(resonant_system(rp), decompose(resonant_system(rp)),
                                       "lyapunov");
  CHECK(ok.pass);
}

}  // TEST_SUITE
