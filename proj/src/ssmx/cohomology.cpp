#include "ssmx/cohomology.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "ssmx/integrate.hpp"
#include "ssmx/poly.hpp"
#include "ssmx/util.hpp"

namespace ssmx {

namespace {

const Complex kI(0.0, 1.0);

// Orthonormal eigenvectors of J: J eminus = -i eminus, J eplus = +i eplus.
Eigen::Vector2cd eminus() { return Eigen::Vector2cd(1.0, -kI) / std::sqrt(2.0); }
Eigen::Vector2cd eplus() { return Eigen::Vector2cd(1.0, kI) / std::sqrt(2.0); }

// Pointwise frame resolution of an ambient grid function: returns the tangent
// components (2) and transverse components (dim - 2) as grid functions.
std::pair<GridFunction, GridFunction> split_components(const ConservativeChart& ch,
                                                       const GridFunction& eta) {
  const int n = ch.dim;
  const int nr = ch.grid->nrad;
  const int ns = ch.grid->nsamples;
  require(eta.ncomp() == n, "split_components: forcing has wrong component count");

  std::vector<Eigen::MatrixXcd> vals(n);
  for (int c = 0; c < n; ++c) vals[c] = eta.values(c);
  std::vector<Eigen::MatrixXcd> tcomp(2, Eigen::MatrixXcd(nr, ns));
  std::vector<Eigen::MatrixXcd> vcomp(n - 2, Eigen::MatrixXcd(nr, ns));
  Eigen::VectorXcd point(n), xi(n);
  for (int j = 0; j < nr; ++j) {
    for (int a = 0; a < ns; ++a) {
      for (int c = 0; c < n; ++c) point(c) = vals[c](j, a);
      xi = ch.frame_inverse(j, a) * point;
      tcomp[0](j, a) = xi(0);
      tcomp[1](j, a) = xi(1);
      for (int c = 0; c < n - 2; ++c) vcomp[c](j, a) = xi(2 + c);
    }
  }
  GridFunction ut = GridFunction::from_value_matrices(ch.grid, tcomp);
  GridFunction wt = GridFunction::from_value_matrices(ch.grid, vcomp);
  return {std::move(ut), std::move(wt)};
}

// Assemble an ambient grid function from frame components, k = T u + V w.
GridFunction assemble_ambient(const ConservativeChart& ch, const GridFunction& u,
                              const GridFunction& w) {
  const int n = ch.dim;
  const int nr = ch.grid->nrad;
  const int ns = ch.grid->nsamples;
  std::vector<Eigen::MatrixXcd> uv(2), wv(n - 2);
  for (int c = 0; c < 2; ++c) uv[c] = u.values(c);
  for (int c = 0; c < n - 2; ++c) wv[c] = w.values(c);
  std::vector<Eigen::MatrixXcd> out(n, Eigen::MatrixXcd(nr, ns));
  Eigen::VectorXcd xi(n), point(n);
  for (int j = 0; j < nr; ++j) {
    for (int a = 0; a < ns; ++a) {
      xi(0) = uv[0](j, a);
      xi(1) = uv[1](j, a);
      for (int c = 0; c < n - 2; ++c) xi(2 + c) = wv[c](j, a);
      point = ch.frame(j, a) * xi;
      for (int c = 0; c < n; ++c) out[c](j, a) = point(c);
    }
  }
  return GridFunction::from_value_matrices(ch.grid, out);
}

void fit_reduced(const ConservativeChart& ch, ReducedCorrection* rn) {
  std::vector<double> ss(ch.grid->s.begin(), ch.grid->s.end());
  const int deg = ch.grid->nrad - 1;
  rn->alpha_of_s = ChebFit::fit(ss, rn->alpha, deg, 0.0, ch.grid->smax);
  rn->beta_of_s = ChebFit::fit(ss, rn->beta, deg, 0.0, ch.grid->smax);
}

// Band sum of one radial row, evaluated at arbitrary angles through a phase
// recurrence. Columns of coef are indexed by k + kmax.
struct RowEval {
  Eigen::MatrixXcd coef;  // ncomp x (2 kmax + 1)
  int kmax = 0;

  RowEval() = default;
  RowEval(const GridFunction& f, int j) {
    kmax = f.grid()->kmax();
    coef = Eigen::MatrixXcd::Zero(f.ncomp(), 2 * kmax + 1);
    for (int idx = 0; idx < f.grid()->nmodes; ++idx) {
      int k = f.mode_number(idx);
      if (std::abs(k) > kmax) continue;
      for (int c = 0; c < f.ncomp(); ++c) coef(c, k + kmax) = f.modes(c)(j, idx);
    }
  }

  Eigen::VectorXd eval(double theta) const {
    Eigen::VectorXcd ph(2 * kmax + 1);
    Complex z = std::exp(kI * theta), p = 1.0;
    ph(kmax) = 1.0;
    for (int k = 1; k <= kmax; ++k) {
      p *= z;
      ph(kmax + k) = p;
      ph(kmax - k) = std::conj(p);
    }
    return (coef * ph).real();
  }
};

// Gauge functional: the kernel coefficient of the tangent mode k = +1 at each
// radius, extracted from an ambient grid function.
Eigen::VectorXcd kernel_coefficients(const ConservativeChart& ch, const GridFunction& kn) {
  auto [u, w] = split_components(ch, kn);
  (void)w;
  const int nr = ch.grid->nrad;
  int idx1 = -1;
  for (int idx = 0; idx < ch.grid->nmodes; ++idx) {
    if (u.mode_number(idx) == 1) idx1 = idx;
  }
  require(idx1 >= 0, "kernel_coefficients: mode +1 column not found");
  Eigen::VectorXcd zeta(nr);
  Eigen::Vector2cd em = eminus();
  for (int j = 0; j < nr; ++j) {
    Eigen::Vector2cd u1(u.modes(0)(j, idx1), u.modes(1)(j, idx1));
    zeta(j) = em.dot(u1);
  }
  return zeta;
}

// Subtract the reparameterization kernel T * Re(2 zeta eminus e^{i theta}).
void remove_kernel(const ConservativeChart& ch, const Eigen::VectorXcd& zeta, GridFunction* kn) {
  const int n = ch.dim;
  const int nr = ch.grid->nrad;
  const int ns = ch.grid->nsamples;
  std::vector<Eigen::MatrixXcd> vals(n);
  for (int c = 0; c < n; ++c) vals[c] = kn->values(c);
  Eigen::Vector2cd em = eminus();
  for (int j = 0; j < nr; ++j) {
    for (int a = 0; a < ns; ++a) {
      double th = 2.0 * kPi * a / ns;
      Eigen::Vector2cd uh = zeta(j) * em * std::exp(kI * th);
      Eigen::Vector2d uhr = 2.0 * uh.real();
      const Eigen::MatrixXd& fr = ch.frame(j, a);
      for (int c = 0; c < n; ++c) {
        vals[c](j, a) -= fr(c, 0) * uhr(0) + fr(c, 1) * uhr(1);
      }
    }
  }
  *kn = GridFunction::from_value_matrices(ch.grid, vals);
  kn->symmetrize();
}

}  // namespace

Eigen::Vector2d ReducedCorrection::eval(double x1, double x2) const {
  double s = x1 * x1 + x2 * x2;
  double a = alpha_of_s.eval(s);
  double b = beta_of_s.eval(s);
  return Eigen::Vector2d(a * x1 + b * x2, a * x2 - b * x1);
}

CohomologySolution solve_cohomology_fourier(const ConservativeChart& ch, const GridFunction& eta) {
  const int n = ch.dim;
  const int nr = ch.grid->nrad;
  const int nm = ch.grid->nmodes;
  const double om = ch.omega0;

  auto [ut, wt] = split_components(ch, eta);
  GridFunction u(ch.grid, 2), w(ch.grid, n - 2);
  CohomologySolution sol;
  sol.rn.alpha.resize(nr);
  sol.rn.beta.resize(nr);
  sol.margin = ch.resolvent_margin(ch.grid->kmax());
  require(sol.margin > 1e-4, "solve_cohomology_fourier: transverse resolvent margin below 1e-4");

  Eigen::Vector2cd em = eminus(), ep = eplus();
  for (int j = 0; j < nr; ++j) {
    for (int idx = 0; idx < nm; ++idx) {
      int k = ut.mode_number(idx);
      if (std::abs(k) > ch.grid->kmax()) continue;

      // Transverse block: (A2 + i k omega0) w_k = -etaV_k, pair by pair.
      for (int p = 0; p < ch.npairs; ++p) {
        Eigen::Matrix2cd op = ch.a2(j, p).cast<Complex>();
        op(0, 0) += kI * (k * om);
        op(1, 1) += kI * (k * om);
        Eigen::Vector2cd rhs(-wt.modes(2 * p)(j, idx), -wt.modes(2 * p + 1)(j, idx));
        Eigen::Vector2cd wk = op.lu().solve(rhs);
        w.modes(2 * p)(j, idx) = wk(0);
        w.modes(2 * p + 1)(j, idx) = wk(1);
      }

      // Tangent block: omega0 (i k + J) u_k - r_k = -etaT_k.
      Eigen::Vector2cd ek(ut.modes(0)(j, idx), ut.modes(1)(j, idx));
      if (k == 1 || k == -1) {
        // The eigenvector of J matching -i k spans the kernel; its component
        // of the forcing is absorbed by the reduced correction, the range
        // component is inverted on the complementary eigenvector.
        Eigen::Vector2cd ker = (k == 1) ? em : ep;
        Eigen::Vector2cd ran = (k == 1) ? ep : em;
        Complex cker = ker.dot(ek);
        Complex cran = ran.dot(ek);
        Eigen::Vector2cd uk = -cran / (2.0 * kI * (k * om)) * ran;
        u.modes(0)(j, idx) = uk(0);
        u.modes(1)(j, idx) = uk(1);
        if (k == 1) {
          // r_1 = rho (alpha - i beta) / sqrt(2) eminus.
          Complex z = cker / (ch.grid->rho[j] / std::sqrt(2.0));
          sol.rn.alpha[j] = z.real();
          sol.rn.beta[j] = -z.imag();
        } else {
          Complex z = cker / (ch.grid->rho[j] / std::sqrt(2.0));
          double mismatch = std::hypot(z.real() - sol.rn.alpha[j], -z.imag() + sol.rn.beta[j]);
          sol.defect = std::max(sol.defect, mismatch);
        }
      } else {
        Eigen::Matrix2cd op;
        op << kI * static_cast<double>(k), Complex(1.0), Complex(-1.0),
            kI * static_cast<double>(k);
        op *= om;
        Eigen::Vector2cd uk = op.lu().solve((-ek).eval());
        u.modes(0)(j, idx) = uk(0);
        u.modes(1)(j, idx) = uk(1);
      }
    }
  }
  u.symmetrize();
  w.symmetrize();
  sol.kn = assemble_ambient(ch, u, w);
  sol.kn.symmetrize();
  fit_reduced(ch, &sol.rn);
  return sol;
}

CohomologySolution solve_cohomology_bvp(const ConservativeChart& ch, const GridFunction& eta,
                                        double int_tol) {
  const int n = ch.dim;
  const int nr = ch.grid->nrad;
  const int ns = ch.grid->nsamples;
  const double om = ch.omega0;
  const double t0 = 2.0 * kPi / om;

  CohomologySolution sol;
  sol.rn.alpha.resize(nr);
  sol.rn.beta.resize(nr);
  sol.margin = ch.resolvent_margin(ch.grid->kmax());

  IntOpts iopts;
  iopts.tol = int_tol;
  std::vector<double> times(ns);
  for (int i = 0; i < ns; ++i) times[i] = t0 * i / ns;

  std::vector<Eigen::MatrixXd> samples(n, Eigen::MatrixXd(nr, ns));
  for (int j = 0; j < nr; ++j) {
    const double rho = ch.grid->rho[j];
    const Eigen::VectorXd& x0 = ch.family.orbits[j].x0;
    const Eigen::MatrixXd& mon = ch.floquet[j].monodromy;

    // Basis forcings along the orbit: the data itself and the two reduced
    // generators. theta(t) = pi/2 - omega0 t on every renormalized orbit.
    RowEval eta_row(eta, j), t1_row(ch.T1, j), t2_row(ch.T2, j);
    auto eta_at = [&](double th) { return eta_row.eval(th); };
    auto tr_at = [&](double th, bool jgen) {
      Eigen::Vector2d r = jgen ? Eigen::Vector2d(rho * std::sin(th), -rho * std::cos(th))
                               : Eigen::Vector2d(rho * std::cos(th), rho * std::sin(th));
      return (t1_row.eval(th) * r(0) + t2_row.eval(th) * r(1)).eval();
    };

    // One pass with three stacked responses: y' = A(t) y + g(t), y(0) = 0.
    auto rhs3 = [&](double t, const Eigen::VectorXd& y) {
      double th = kPi / 2.0 - om * t;
      Eigen::VectorXd x = y.head(n);
      Eigen::MatrixXd jac = ch.rspec.field_jacobian(x, 0.0);
      Eigen::VectorXd dy(4 * n);
      dy.head(n) = ch.rspec.field(x, 0.0);
      dy.segment(n, n) = jac * y.segment(n, n) + eta_at(th);
      dy.segment(2 * n, n) = jac * y.segment(2 * n, n) - tr_at(th, false);
      dy.segment(3 * n, n) = jac * y.segment(3 * n, n) - tr_at(th, true);
      return dy;
    };
    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(4 * n);
    y0.head(n) = x0;
    Eigen::VectorXd yT = integrate_to<double>(rhs3, 0.0, t0, y0, iopts);
    Eigen::VectorXd pe = yT.segment(n, n), pa = yT.segment(2 * n, n), pb = yT.segment(3 * n, n);

    // Left unit eigenvectors of the monodromy span the obstruction; choosing
    // (alpha, beta) cancels the projection of the accumulated forcing.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mon.transpose() - Eigen::MatrixXd::Identity(n, n),
                                          Eigen::ComputeFullV);
    Eigen::VectorXd psi1 = svd.matrixV().col(n - 1);
    Eigen::VectorXd psi2 = svd.matrixV().col(n - 2);
    Eigen::Matrix2d small;
    small << psi1.dot(pa), psi1.dot(pb), psi2.dot(pa), psi2.dot(pb);
    Eigen::Vector2d rhs2(-psi1.dot(pe), -psi2.dot(pe));
    Eigen::Vector2d ab = small.lu().solve(rhs2);
    sol.rn.alpha[j] = ab(0);
    sol.rn.beta[j] = ab(1);
    // Both unit directions have to be genuinely null for the 2 x 2 solvability
    // reduction to be exact.
    sol.defect = std::max(sol.defect, svd.singularValues()(n - 2) / svd.singularValues()(0));

    // Min-norm periodic point, then one more pass collecting the samples.
    Eigen::VectorXd p = pe + ab(0) * pa + ab(1) * pb;
    Eigen::MatrixXd imm = Eigen::MatrixXd::Identity(n, n) - mon;
    Eigen::VectorXd v0 = imm.completeOrthogonalDecomposition().solve(p);

    auto rhs1 = [&](double t, const Eigen::VectorXd& y) {
      double th = kPi / 2.0 - om * t;
      Eigen::VectorXd x = y.head(n);
      Eigen::VectorXd dy(2 * n);
      dy.head(n) = ch.rspec.field(x, 0.0);
      dy.tail(n) = ch.rspec.field_jacobian(x, 0.0) * y.tail(n) + eta_at(th) -
                   ab(0) * tr_at(th, false) - ab(1) * tr_at(th, true);
      return dy;
    };
    Eigen::VectorXd z0(2 * n);
    z0.head(n) = x0;
    z0.tail(n) = v0;
    std::vector<Eigen::VectorXd> path = integrate_samples<double>(rhs1, 0.0, z0, times, iopts);
    for (int i = 0; i < ns; ++i) {
      for (int c = 0; c < n; ++c) samples[c](j, i) = path[i](n + c);
    }
  }

  sol.kn = GridFunction::from_flow_samples(ch.grid, samples, kPi / 2.0);
  sol.kn.symmetrize();
  Eigen::VectorXcd zeta = kernel_coefficients(ch, sol.kn);
  remove_kernel(ch, zeta, &sol.kn);
  fit_reduced(ch, &sol.rn);
  return sol;
}

GridFunction seeded_forcing(DiskGridPtr grid, int ncomp, int degree, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto draw = [&]() { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1p-53) - 1.0; };
  PolyMap pm(2, ncomp);
  for (int d = 0; d <= degree; ++d) {
    for (int i = 0; i <= d; ++i) {
      Eigen::VectorXd c(ncomp);
      for (int q = 0; q < ncomp; ++q) c(q) = draw();
      pm.add_term(MultiIndex{static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(d - i)}, c);
    }
  }
  return GridFunction::from_point_values(
      grid,
      [&](double x1, double x2) {
        Eigen::VectorXd x(2);
        x << x1, x2;
        return pm.eval<double>(x);
      },
      ncomp);
}

}  // namespace ssmx
