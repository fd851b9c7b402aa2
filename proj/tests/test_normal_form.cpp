#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "doctest.h"
#include "ssmx/models.hpp"
#include "ssmx/normal_form.hpp"
#include "ssmx/poly.hpp"
#include "ssmx/spectral.hpp"
#include "ssmx/system.hpp"

using namespace ssmx;

namespace {

Eigen::Matrix2d jrot() {
  Eigen::Matrix2d j;
  j << 0.0, 1.0, -1.0, 0.0;
  return j;
}

MultiIndex mono4(int a, int b, int c, int d) {
  return MultiIndex{static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b),
                    static_cast<std::uint8_t>(c), static_cast<std::uint8_t>(d)};
}

// Two uncoupled elliptic pairs with frequencies 1.3 and 2.1 and a uniform
// linear damping layer. The small-divisor floor for this pair of frequencies
// is |2 * 1.3 - 2.1| = 0.5.
SystemSpec two_block_spec() {
  SystemSpec s;
  s.name = "two_block";
  s.dim = 4;
  s.L = Eigen::MatrixXd::Zero(4, 4);
  s.L.block<2, 2>(0, 0) = 1.3 * jrot();
  s.L.block<2, 2>(2, 2) = 2.1 * jrot();
  s.N = PolyMap(4, 4);
  s.C = {-0.1 * Eigen::MatrixXd::Identity(4, 4)};
  return s;
}

int total_deg(const MultiIndex& e) {
  int d = 0;
  for (auto v : e) d += v;
  return d;
}

}  // namespace

TEST_SUITE("normalform") {

TEST_CASE("block diagonal linear systems pass through unchanged") {
  SystemSpec spec = two_block_spec();
  NormalFormResult nf = partial_normal_form(spec, 3, 0.4);

  CHECK(nf.record.forward.degree() == 1);
  for (int j = 0; j < 4; ++j) {
    MultiIndex e(4, 0);
    e[j] = 1;
    Eigen::VectorXd c = nf.record.forward.coefficient(e);
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(c(i) - (i == j ? 1.0 : 0.0)) <= 1e-12);
    }
  }

  CHECK(nf.spec.N.max_abs_coef() <= 1e-13);
  CHECK((nf.spec.L - spec.L).norm() <= 1e-9);

  REQUIRE(nf.spec.C.size() == 1);
  CHECK((nf.spec.C[0] + 0.1 * Eigen::MatrixXd::Identity(4, 4)).norm() <= 1e-10);
  for (const auto& g : nf.spec.G) CHECK(g.max_abs_coef() <= 1e-12);

  CHECK(nf.record.det_bound == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(nf.record.min_divisor == 0.0);
  CHECK(nf.record.kappa == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("a forced transverse quadratic is removed by the homological solve") {
  SystemSpec spec = two_block_spec();
  Eigen::VectorXd c2 = Eigen::VectorXd::Zero(4);
  c2(2) = 0.7;
  spec.N.add_term(mono4(2, 0, 0, 0), c2);
  Eigen::VectorXd c0 = Eigen::VectorXd::Zero(4);
  c0(0) = 0.4;
  spec.N.add_term(mono4(0, 0, 1, 1), c0);

  NormalFormResult nf = partial_normal_form(spec, 2, 0.5);
  const Eigen::MatrixXd& bas = nf.record.basis;
  const Eigen::MatrixXd& binv = nf.record.basis_inv;

  // Quadratic coefficients of binv * N(bas * u) for every quadratic monomial.
  std::vector<MultiIndex> quads;
  for (int a = 0; a < 4; ++a) {
    for (int b = a; b < 4; ++b) {
      MultiIndex e(4, 0);
      e[a] += 1;
      e[b] += 1;
      quads.push_back(e);
    }
  }
  std::map<MultiIndex, Eigen::Vector4d> nmid;
  for (const auto& e : quads) {
    int a = -1, b = -1;
    for (int j = 0; j < 4; ++j) {
      for (int r = 0; r < e[j]; ++r) (a < 0 ? a : b) = j;
    }
    Eigen::Vector4d raw = Eigen::Vector4d::Zero();
    raw(2) = 0.7 * (a == b ? bas(0, a) * bas(0, b)
                           : bas(0, a) * bas(0, b) + bas(0, b) * bas(0, a));
    raw(0) = 0.4 * (a == b ? bas(2, a) * bas(3, b)
                           : bas(2, a) * bas(3, b) + bas(2, b) * bas(3, a));
    nmid[e] = binv * raw;
  }

  // Independent homological solve on the removable quadratic classes. The
  // operator h -> Lb h - Dh Lb v preserves the span of these monomials
  // because Lb is block diagonal.
  Eigen::MatrixXd lb = binv * spec.L * bas;
  std::vector<MultiIndex> kill = {mono4(2, 0, 0, 0), mono4(1, 1, 0, 0), mono4(0, 2, 0, 0),
                                  mono4(1, 0, 1, 0), mono4(1, 0, 0, 1), mono4(0, 1, 1, 0),
                                  mono4(0, 1, 0, 1)};
  auto kill_index = [&](const MultiIndex& e) {
    for (int i = 0; i < static_cast<int>(kill.size()); ++i) {
      if (kill[i] == e) return i;
    }
    return -1;
  };
  int nk = static_cast<int>(kill.size());
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(4 * nk, 4 * nk);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(4 * nk);
  auto idx = [&](int row, int m) { return row * nk + m; };
  for (int r = 0; r < 4; ++r) {
    for (int m = 0; m < nk; ++m) {
      const MultiIndex& e = kill[m];
      for (int r2 = 0; r2 < 4; ++r2) {
        if (std::abs(lb(r2, r)) > 1e-9) op(idx(r2, m), idx(r, m)) += lb(r2, r);
      }
      for (int j = 0; j < 4; ++j) {
        if (e[j] == 0) continue;
        for (int j2 = 0; j2 < 4; ++j2) {
          if (std::abs(lb(j, j2)) <= 1e-9) continue;
          MultiIndex e2 = e;
          e2[j] -= 1;
          e2[j2] += 1;
          int m2 = kill_index(e2);
          REQUIRE(m2 >= 0);
          op(idx(r, m2), idx(r, m)) -= e[j] * lb(j, j2);
        }
      }
      rhs(idx(r, m)) = -nmid[e](r);
    }
  }
  Eigen::VectorXd h = Eigen::FullPivLU<Eigen::MatrixXd>(op).solve(rhs);

  for (int r = 0; r < 4; ++r) {
    for (int m = 0; m < nk; ++m) {
      double got = nf.record.forward.coefficient(kill[m])(r);
      CHECK(std::abs(got - h(idx(r, m))) <= 1e-10);
    }
  }

  // The removable classes vanish from the transformed field while the pure
  // transverse quadratics survive with their block-coordinate coefficients.
  for (int m = 0; m < nk; ++m) {
    CHECK(nf.spec.N.coefficient(kill[m]).cwiseAbs().maxCoeff() <= 1e-11);
  }
  for (const auto& e : {mono4(0, 0, 2, 0), mono4(0, 0, 1, 1), mono4(0, 0, 0, 2)}) {
    Eigen::VectorXd kept = nf.spec.N.coefficient(e);
    CHECK((kept - nmid[e]).cwiseAbs().maxCoeff() <= 1e-11);
  }

  CHECK(nf.record.min_divisor == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(nf.record.det_bound >= 0.9);
}

TEST_CASE("the pendulum field reduces to its resonant skeleton") {
  SystemSpec spec = pendulum_system({});
  NormalFormResult nf = partial_normal_form(spec, 3, 0.3);
  const PolyMap& nn = nf.spec.N;

  SpectralData sd = decompose(spec);
  CHECK((nf.spec.L.block(0, 0, 2, 2) - sd.omega0 * jrot()).norm() <= 1e-9);

  // Everything the reduction advertises as removed must be gone: pure
  // tangent terms except the cubic backbone, and non-resonant y-linear terms.
  double offender = 0.0;
  for (const auto& [e, c] : nn.terms()) {
    int deg = total_deg(e);
    if (deg > 3) continue;
    int q = e[2] + e[3];
    if (q >= 2) continue;
    if (q == 0) {
      offender = std::max(offender, std::max(std::abs(c(2)), std::abs(c(3))));
      if (deg == 2) offender = std::max(offender, std::max(std::abs(c(0)), std::abs(c(1))));
    } else if (deg == 2) {
      offender = std::max(offender, c.cwiseAbs().maxCoeff());
    } else {
      offender = std::max(offender, std::max(std::abs(c(0)), std::abs(c(1))));
    }
  }
  CHECK(offender <= 1e-9);

  // Surviving y-linear cubics act isotropically on each transverse pair:
  // the v0 v1 y_j coefficients vanish and v0^2 y_j matches v1^2 y_j.
  for (int j = 2; j < 4; ++j) {
    MultiIndex e20 = mono4(2, 0, 0, 0), e11 = mono4(1, 1, 0, 0), e02 = mono4(0, 2, 0, 0);
    e20[j] += 1;
    e11[j] += 1;
    e02[j] += 1;
    for (int r = 2; r < 4; ++r) {
      CHECK(std::abs(nn.coefficient(e11)(r)) <= 1e-9);
      CHECK(std::abs(nn.coefficient(e20)(r) - nn.coefficient(e02)(r)) <= 1e-9);
    }
  }

  // The tangent backbone is a multiple of s*(v0, v1) plus s*(v1, -v0).
  auto cf = [&](int a, int b, int row) { return nn.coefficient(mono4(a, b, 0, 0))(row); };
  CHECK(std::abs(cf(3, 0, 0) - cf(1, 2, 0)) <= 1e-9);
  CHECK(std::abs(cf(2, 1, 0) - cf(0, 3, 0)) <= 1e-9);
  CHECK(std::abs(cf(2, 1, 1) - cf(0, 3, 1)) <= 1e-9);
  CHECK(std::abs(cf(3, 0, 1) - cf(1, 2, 1)) <= 1e-9);
  CHECK(std::abs(cf(3, 0, 0) - cf(2, 1, 1)) <= 1e-9);
  CHECK(std::abs(cf(2, 1, 0) + cf(3, 0, 1)) <= 1e-9);

  // The untouched remainder is a genuine nonlinearity, not an empty map.
  CHECK(nn.max_abs_coef() > 1e-8);

  // Conjugacy: D(bas . forward)(v) field'(v) equals field(bas . forward(v))
  // up to the truncation order, for the conservative and the damped field.
  std::mt19937 rng(71u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int t = 0; t < 6; ++t) {
    Eigen::VectorXd v(4);
    for (int i = 0; i < 4; ++i) v(i) = gauss(rng);
    v *= 0.02 / v.norm();
    Eigen::VectorXd x = nf.record.basis * nf.record.forward.eval(v);
    Eigen::MatrixXd dt = nf.record.basis * nf.record.forward.jacobian(v);
    for (double eps : {0.0, 0.05}) {
      Eigen::VectorXd lhs = dt * nf.spec.field(v, eps);
      Eigen::VectorXd rhs = spec.field(x, eps);
      CHECK((lhs - rhs).norm() <= 1e-7 * (1.0 + rhs.norm()));
    }
    REQUIRE(nf.spec.conserved.has_value());
    double ia = nf.spec.conserved->eval(v)(0);
    double ib = spec.conserved->eval(x)(0);
    CHECK(std::abs(ia - ib) <= 1e-9 * (1.0 + std::abs(ib)));
  }

  CHECK(nf.record.det_bound >= 0.5);
  CHECK(nf.record.min_divisor >= 0.5 * nf.record.kappa);
}

}  // TEST_SUITE
