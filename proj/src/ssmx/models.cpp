#include "ssmx/models.hpp"

#include <Eigen/Dense>
#include <array>

#include "ssmx/util.hpp"

namespace ssmx {

namespace {

double sq(double v) { return v * v; }

void put(PolyMap& p, int out, const std::vector<int>& exps, double c) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p.n_out());
  v(out) = c;
  p.add_term(exps, v);
}

// Re-index a polynomial in q alone into the (q, p) state of dimension 2 nq.
MultiIndex lift_exps(const MultiIndex& a, int nq) {
  MultiIndex b(2 * nq, 0);
  for (int i = 0; i < nq; ++i) b[i] = a[i];
  return b;
}

}  // namespace

SystemSpec mechanical_system(const Eigen::MatrixXd& M, const Eigen::MatrixXd& Cd,
                             const Eigen::MatrixXd& Kmat, const PolyMap& V,
                             const std::string& name) {
  const int nq = static_cast<int>(M.rows());
  const int n = 2 * nq;
  require(M.cols() == nq && Cd.rows() == nq && Cd.cols() == nq && Kmat.rows() == nq &&
              Kmat.cols() == nq,
          "mechanical_system: matrix dimensions disagree");
  require(V.n_in() == nq && V.n_out() == 1, "mechanical_system: V must be scalar in q");
  require(V.max_abs_coef_below_degree(3) == 0.0,
          "mechanical_system: V may not contain terms below degree 3");
  require((M - M.transpose()).norm() == 0.0 && (Kmat - Kmat.transpose()).norm() == 0.0,
          "mechanical_system: M and Kmat must be symmetric");

  const Eigen::MatrixXd Minv = M.inverse();

  SystemSpec s;
  s.name = name;
  s.dim = n;
  s.hamiltonian = true;

  s.L = Eigen::MatrixXd::Zero(n, n);
  s.L.topRightCorner(nq, nq) = Minv;
  s.L.bottomLeftCorner(nq, nq) = -Kmat;

  Eigen::MatrixXd C1 = Eigen::MatrixXd::Zero(n, n);
  C1.bottomRightCorner(nq, nq) = -Cd * Minv;
  s.C = {C1};

  PolyMap N(n, n);
  const PolyMap gradV = V.gradient();
  for (const auto& [a, c] : gradV.terms()) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v.tail(nq) = -c;
    N.add_term(lift_exps(a, nq), v);
  }
  s.N = N;

  PolyMap H(n, 1);
  for (int i = 0; i < nq; ++i) {
    for (int j = i; j < nq; ++j) {
      const double cp = (i == j) ? 0.5 * Minv(i, i) : Minv(i, j);
      const double cq = (i == j) ? 0.5 * Kmat(i, i) : Kmat(i, j);
      std::vector<int> ep(n, 0), eq(n, 0);
      ep[nq + i] += 1;
      ep[nq + j] += 1;
      eq[i] += 1;
      eq[j] += 1;
      if (cp != 0.0) put(H, 0, ep, cp);
      if (cq != 0.0) put(H, 0, eq, cq);
    }
  }
  for (const auto& [a, c] : V.terms()) {
    Eigen::VectorXd v(1);
    v(0) = c(0);
    H.add_term(lift_exps(a, nq), v);
  }
  s.conserved = H;

  s.validate();
  return s;
}

SystemSpec pendulum_system(const PendulumParams& par) {
  const double k = par.k, K = par.kq, l0 = par.l0;
  const double l2 = l0 * l0;
  const Eigen::Matrix2d M = par.m * Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d Cd = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d Kmat = Eigen::Matrix2d::Zero();
  Kmat(0, 0) = 2.0 * k + 4.0 * K * l2;
  Kmat(1, 1) = 2.0 * k + 12.0 * K * l2;

  PolyMap V(2, 1);
  put(V, 0, {2, 1}, -4.0 * K * l0);
  put(V, 0, {0, 3}, -4.0 * K * l0);
  put(V, 0, {4, 0}, K);
  put(V, 0, {2, 2}, 2.0 * K);
  put(V, 0, {0, 4}, K);

  return mechanical_system(M, Cd, Kmat, V, "pendulum");
}

GraphCoefficients pendulum_reference_w(const PendulumParams& par, double eps) {
  const double m = par.m, k = par.k, K = par.kq, l0 = par.l0;
  const double l2 = l0 * l0, l4 = l2 * l2, e2 = eps * eps;
  const double kap =
      1.0 / ((k + 6.0 * K * l2) * (-e2 * (k - 2.0 * K * l2) + 2.0 * sq(3.0 * k + 2.0 * K * l2) * m));
  GraphCoefficients g;
  g.w20 << -2.0 * K * l0 *
               (-e2 * (k + 6.0 * K * l2) - 6.0 * k * k * m + 8.0 * k * K * l2 * m + 8.0 * K * K * l4 * m),
      -16.0 * eps * K * l0 * sq(k + 2.0 * K * l2) * m;
  g.w11 << 16.0 * eps * K * l0 * (k + 2.0 * K * l2),
      -4.0 * K * l0 * (e2 * (k - 2.0 * K * l2) + 2.0 * (3.0 * k * k + 20.0 * k * K * l2 + 12.0 * K * K * l4) * m);
  g.w02 << 8.0 * K * l0 * (3.0 * k + 2.0 * K * l2), 8.0 * eps * K * l0 * (-k + 2.0 * K * l2);
  g.w20 *= kap;
  g.w11 *= kap;
  g.w02 *= kap;
  return g;
}

GraphCoefficients pendulum_reference_w_linear(const PendulumParams& par, double eps) {
  const double m = par.m, k = par.k, K = par.kq, l0 = par.l0;
  const double l2 = l0 * l0;
  const double kap0 = 1.0 / ((k + 6.0 * K * l2) * 2.0 * sq(3.0 * k + 2.0 * K * l2) * m);
  GraphCoefficients g = pendulum_reference_w(par, 0.0);
  g.w20(1) += eps * kap0 * (-16.0 * K * l0 * sq(k + 2.0 * K * l2) * m);
  g.w11(0) += eps * kap0 * (16.0 * K * l0 * (k + 2.0 * K * l2));
  g.w02(1) += eps * kap0 * (8.0 * K * l0 * (2.0 * K * l2 - k));
  return g;
}

PolyMap pendulum_reduced_reference(const PendulumParams& par, double eps) {
  const double m = par.m, k = par.k, K = par.kq, l0 = par.l0;
  const double l2 = l0 * l0, l4 = l2 * l2, e2 = eps * eps;
  const double denom = -e2 * (k - 2.0 * K * l2) + 2.0 * sq(3.0 * k + 2.0 * K * l2) * m;
  const double kap = 1.0 / ((k + 6.0 * K * l2) * denom);
  const double alp = -(k + 6.0 * K * l2) * denom;
  const double bet = 16.0 * eps * K * (k + 2.0 * K * l2);
  const double gam = 2.0 * K * (e2 * (k + 6.0 * K * l2) + 2.0 * (3.0 * k * k - 4.0 * k * K * l2 - 4.0 * K * K * l4) * m);
  const double del = 8.0 * K * (3.0 * k + 2.0 * K * l2);

  PolyMap f(2, 2);
  put(f, 0, {0, 1}, 2.0 / m);
  put(f, 1, {1, 0}, -2.0 * (k + 2.0 * K * l2));
  put(f, 1, {0, 1}, -eps / m);

  // 4 K kap^2 x (x^2 + l2 (alp + P)^2) with P = gam x^2 + bet x y + del y^2.
  const double c = 4.0 * K * kap * kap;
  put(f, 1, {3, 0}, c);
  put(f, 1, {1, 0}, c * l2 * alp * alp);
  struct Term {
    int ex, ey;
    double c;
  };
  const std::array<Term, 3> pp{{{2, 0, gam}, {1, 1, bet}, {0, 2, del}}};
  for (const auto& t : pp) put(f, 1, {1 + t.ex, t.ey}, 2.0 * c * l2 * alp * t.c);
  for (const auto& ti : pp)
    for (const auto& tj : pp) put(f, 1, {1 + ti.ex + tj.ex, ti.ey + tj.ey}, c * l2 * ti.c * tj.c);
  return f;
}

SystemSpec example1_system(const Example1Params& par) {
  SystemSpec s;
  s.name = "example1";
  s.dim = 4;
  s.hamiltonian = false;

  const double h = 0.5 * par.omega;
  s.L = Eigen::MatrixXd::Zero(4, 4);
  s.L(0, 1) = h;
  s.L(1, 0) = -h;
  s.L(2, 3) = par.gamma;
  s.L(3, 2) = -par.gamma;

  Eigen::MatrixXd C2 = Eigen::MatrixXd::Zero(4, 4);
  C2(0, 0) = -0.5;
  C2(1, 1) = -0.5;
  C2(2, 2) = par.a;
  C2(3, 3) = par.a;
  s.C = {Eigen::MatrixXd::Zero(4, 4), C2};

  PolyMap G1(4, 4);
  put(G1, 0, {3, 0, 0, 0}, 0.5);
  put(G1, 0, {1, 2, 0, 0}, 0.5);
  put(G1, 1, {2, 1, 0, 0}, 0.5);
  put(G1, 1, {0, 3, 0, 0}, 0.5);
  s.G = {G1};

  PolyMap I(4, 1);
  put(I, 0, {2, 0, 0, 0}, 1.0);
  put(I, 0, {0, 2, 0, 0}, 1.0);
  s.conserved = I;

  s.validate();
  return s;
}

SystemSpec resonant_system(const ResonantParams& par) {
  SystemSpec s;
  s.name = "resonant";
  s.dim = 4;
  s.hamiltonian = false;

  s.L = Eigen::MatrixXd::Zero(4, 4);
  s.L(0, 1) = 1.0;
  s.L(1, 0) = -1.0;
  s.L(2, 3) = par.alpha;
  s.L(3, 2) = -par.alpha;

  Eigen::MatrixXd C1 = Eigen::MatrixXd::Zero(4, 4);
  C1(0, 0) = -par.lambda;
  C1(1, 1) = -par.lambda;
  C1(2, 2) = -par.mu;
  C1(3, 3) = -par.mu;
  s.C = {C1};

  PolyMap N(4, 4);
  for (int r = 0; r < 2; ++r) {
    put(N, 2 + r, {2, 0, 0, 0}, par.f20(r));
    put(N, 2 + r, {1, 1, 0, 0}, par.f11(r));
    put(N, 2 + r, {0, 2, 0, 0}, par.f02(r));
  }
  s.N = N;

  PolyMap I(4, 1);
  put(I, 0, {2, 0, 0, 0}, 1.0);
  put(I, 0, {0, 2, 0, 0}, 1.0);
  s.conserved = I;

  s.validate();
  return s;
}

double QuadGraph::norm() const {
  return std::sqrt(h20.squaredNorm() + h11.squaredNorm() + h02.squaredNorm());
}

namespace {

Eigen::Matrix2d resonant_B(const ResonantParams& par, double eps) {
  Eigen::Matrix2d B;
  const double d = eps * (2.0 * par.lambda - par.mu);
  B << d, par.alpha, -par.alpha, d;
  return B;
}

}  // namespace

QuadGraph resonant_graph_direct(const ResonantParams& par, double eps) {
  // Monomial matching of DH(xi) Axi xi - Aeta H(xi) = F(xi) for the quadratic
  // graph eta = h20 xi1^2 + h11 xi1 xi2 + h02 xi2^2, unknowns ordered
  // (h20, h02, h11).
  const Eigen::Matrix2d B = resonant_B(par, eps);
  const Eigen::Matrix2d I2 = Eigen::Matrix2d::Identity();
  Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
  A.block<2, 2>(0, 0) = -B;
  A.block<2, 2>(0, 4) = -I2;
  A.block<2, 2>(2, 2) = -B;
  A.block<2, 2>(2, 4) = I2;
  A.block<2, 2>(4, 0) = 2.0 * I2;
  A.block<2, 2>(4, 2) = -2.0 * I2;
  A.block<2, 2>(4, 4) = -B;
  Eigen::Matrix<double, 6, 1> rhs;
  rhs << par.f20, par.f02, par.f11;
  Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(A);
  require(lu.isInvertible(), "resonant_graph_direct: matching system is singular");
  const Eigen::Matrix<double, 6, 1> u = lu.solve(rhs);
  QuadGraph g;
  g.h20 = u.segment<2>(0);
  g.h02 = u.segment<2>(2);
  g.h11 = u.segment<2>(4);
  return g;
}

Eigen::Vector2d resonant_h11_schur(const ResonantParams& par, double eps) {
  const Eigen::Matrix2d B = resonant_B(par, eps);
  const Eigen::Matrix2d Binv = B.inverse();
  const Eigen::Matrix2d delta = B + 4.0 * Binv;
  return delta.fullPivLu().solve(-(par.f11 + 2.0 * Binv * (par.f20 - par.f02)));
}

SystemSpec hyper_system(const HyperParams& par) {
  SystemSpec s;
  s.name = "hyper";
  s.dim = 4;
  s.hamiltonian = false;

  s.L = Eigen::MatrixXd::Zero(4, 4);
  s.L(0, 1) = par.omega1;
  s.L(1, 0) = -par.omega1;
  s.L(2, 3) = par.omega2;
  s.L(3, 2) = -par.omega2;

  s.C = {-par.cdamp * Eigen::MatrixXd::Identity(4, 4)};

  PolyMap N(4, 4);
  // Tangential frequency shift nu |x|^2 J x.
  put(N, 0, {2, 1, 0, 0}, par.nu);
  put(N, 0, {0, 3, 0, 0}, par.nu);
  put(N, 1, {3, 0, 0, 0}, -par.nu);
  put(N, 1, {1, 2, 0, 0}, -par.nu);
  // Compensating tangential term -(g/2) |y|^2 |x|^2 x, expanded per monomial:
  // -(g/2)(y1^2 + y2^2)(x1^2 + x2^2) x1
  const double h = 0.5 * par.g;
  put(N, 0, {3, 0, 2, 0}, -h);
  put(N, 0, {3, 0, 0, 2}, -h);
  put(N, 0, {1, 2, 2, 0}, -h);
  put(N, 0, {1, 2, 0, 2}, -h);
  // same with x2
  put(N, 1, {2, 1, 2, 0}, -h);
  put(N, 1, {2, 1, 0, 2}, -h);
  put(N, 1, {0, 3, 2, 0}, -h);
  put(N, 1, {0, 3, 0, 2}, -h);
  // (g/2) |x|^4 y, |x|^4 = x1^4 + 2 x1^2 x2^2 + x2^4
  put(N, 2, {4, 0, 1, 0}, h);
  put(N, 2, {2, 2, 1, 0}, 2.0 * h);
  put(N, 2, {0, 4, 1, 0}, h);
  put(N, 3, {4, 0, 0, 1}, h);
  put(N, 3, {2, 2, 0, 1}, 2.0 * h);
  put(N, 3, {0, 4, 0, 1}, h);
  s.N = N;

  PolyMap I(4, 1);
  put(I, 0, {2, 0, 0, 0}, 1.0);
  put(I, 0, {0, 2, 0, 0}, 1.0);
  put(I, 0, {0, 0, 2, 0}, 1.0);
  put(I, 0, {0, 0, 0, 2}, 1.0);
  s.conserved = I;

  s.validate();
  return s;
}

}  // namespace ssmx
