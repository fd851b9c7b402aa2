#include "ssmx/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace ssmx {

namespace {

Eigen::MatrixXd linearization(const SystemSpec& spec, double eps) {
  Eigen::MatrixXd a = spec.L;
  double ep = eps;
  for (const auto& c : spec.C) {
    a += ep * c;
    ep *= eps;
  }
  return a;
}

double matrix_cond(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  return smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

SpectralData decompose(const SystemSpec& spec, int pair_index) {
  spec.validate();
  int n = spec.dim;
  Eigen::EigenSolver<Eigen::MatrixXd> es(spec.L);
  require(es.info() == Eigen::Success, "decompose: eigensolver failed");
  Eigen::VectorXcd vals = es.eigenvalues();
  Eigen::MatrixXcd vecs = es.eigenvectors();

  double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());

  // Candidate elliptic pairs: purely imaginary, positive frequency.
  std::vector<int> cand;
  for (int i = 0; i < n; ++i) {
    if (vals(i).imag() > 1e-12 * scale && std::abs(vals(i).real()) < 1e-10 * scale) {
      cand.push_back(i);
    }
  }
  require(!cand.empty(), "decompose: no purely imaginary eigenvalue pair found");
  std::sort(cand.begin(), cand.end(),
            [&](int a, int b) { return vals(a).imag() < vals(b).imag(); });
  if (pair_index < 0) pair_index = 0;
  require(pair_index < static_cast<int>(cand.size()),
          "decompose: pair index " + std::to_string(pair_index) + " out of range (found " +
              std::to_string(cand.size()) + " imaginary pairs)");
  int sel = cand[pair_index];

  SpectralData sd;
  sd.pair_index = pair_index;
  sd.omega0 = vals(sel).imag();
  sd.lambda = Complex(0.0, sd.omega0);
  sd.eig_cond = matrix_cond(vecs);
  sd.semisimple = sd.eig_cond < 1e8;

  // Deterministic eigenvector normalization. Rotating the phase so v^T v is
  // real and nonnegative makes Re v and Im v orthogonal; then scale so
  // |Re v| = 1 and fix the overall sign by the first significant entry.
  // With v = u1 + i u2 and L v = i omega0 v one gets L u1 = -omega0 u2 and
  // L u2 = omega0 u1, which is exactly L [u1 u2] = [u1 u2] (omega0 J).
  Eigen::VectorXcd v = vecs.col(sel);
  Complex vtv = (v.transpose() * v)(0);
  double phase = 0.5 * std::atan2(vtv.imag(), vtv.real());
  v *= std::exp(Complex(0.0, -phase));
  vtv = (v.transpose() * v)(0);
  if (vtv.real() < 0) v *= Complex(0.0, 1.0);
  if (v.real().norm() < 1e-12) v *= std::exp(Complex(0.0, -kPi / 4));
  v /= v.real().norm();
  for (int i = 0; i < n; ++i) {
    if (std::abs(v.real()(i)) > 1e-8) {
      if (v.real()(i) < 0) v = -v;
      break;
    }
  }
  sd.v = v;
  sd.plane.resize(n, 2);
  sd.plane.col(0) = v.real();
  sd.plane.col(1) = v.imag();

  // Complementary eigenvalues and a real basis for their invariant subspace.
  int conj_partner = -1;
  double cpd = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    if (i == sel) continue;
    double d = std::abs(vals(i) - std::conj(vals(sel)));
    if (d < cpd) {
      cpd = d;
      conj_partner = i;
    }
  }
  require(conj_partner >= 0 && cpd < 1e-8 * scale,
          "decompose: conjugate partner of the selected pair not found");
  std::vector<int> rest;
  for (int i = 0; i < n; ++i) {
    if (i != sel && i != conj_partner) rest.push_back(i);
  }

  Eigen::MatrixXd span(n, n - 2);
  int col = 0;
  std::vector<bool> used(n, false);
  sd.mu.clear();
  for (int idx : rest) {
    if (used[idx]) continue;
    used[idx] = true;
    Complex mu = vals(idx);
    sd.mu.push_back(mu);
    if (std::abs(mu.imag()) < 1e-12 * scale) {
      span.col(col++) = vecs.col(idx).real();
    } else {
      // find and mark the conjugate partner within rest
      for (int jdx : rest) {
        if (!used[jdx] && std::abs(vals(jdx) - std::conj(mu)) < 1e-10 * scale) {
          used[jdx] = true;
          sd.mu.push_back(vals(jdx));
          break;
        }
      }
      span.col(col++) = vecs.col(idx).real();
      span.col(col++) = vecs.col(idx).imag();
    }
  }
  require(col == n - 2, "decompose: complement basis assembly failed");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(span);
  sd.basis2 = qr.householderQ() * Eigen::MatrixXd::Identity(n, n - 2);

  // Dual functionals of the plane along the complement.
  Eigen::MatrixXd tfull(n, n);
  tfull.leftCols(2) = sd.plane;
  tfull.rightCols(n - 2) = sd.basis2;
  Eigen::MatrixXd tinv = tfull.inverse();
  sd.dual = tinv.topRows(2);

  // Left eigenvector with plain-transpose pairing lvec^T v = 1.
  Eigen::MatrixXcd at = spec.L.transpose().cast<Complex>();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> esl(at);
  require(esl.info() == Eigen::Success, "decompose: left eigensolver failed");
  int best = 0;
  double bestdist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    double d = std::abs(esl.eigenvalues()(i) - sd.lambda);
    if (d < bestdist) {
      bestdist = d;
      best = i;
    }
  }
  require(bestdist < 1e-8 * scale, "decompose: left eigenvalue match failed");
  Eigen::VectorXcd l = esl.eigenvectors().col(best);
  Complex pairing = (l.transpose() * sd.v)(0);
  require(std::abs(pairing) > 1e-12, "decompose: defective pairing between left/right vectors");
  sd.lvec = l / pairing;
  return sd;
}

namespace {

// Distance from z to the set { i k w : k integer }.
double dist_to_imaginary_lattice(const Complex& z, double w, int* k_at) {
  double kreal = z.imag() / w;
  double best = std::numeric_limits<double>::infinity();
  int kb = 0;
  for (double kc : {std::floor(kreal), std::ceil(kreal)}) {
    double d = std::abs(z - Complex(0.0, w * kc));
    if (d < best) {
      best = d;
      kb = static_cast<int>(kc);
    }
  }
  if (k_at) *k_at = kb;
  return best;
}

}  // namespace

NonresReport check_nonresonance(const SystemSpec& spec, const SpectralData& sd,
                                const std::string& mode, const NonresOptions& opts) {
  NonresReport rep;
  rep.mode = mode;
  double w = sd.omega0;

  if (mode == "lyapunov") {
    // mu_k / (i omega0) at integer distance >= tol  <=>  mu_k not in i omega0 Z
    // (in the normalized variable, so the margin is frequency independent).
    rep.margin = std::numeric_limits<double>::infinity();
    for (const auto& mu : sd.mu) {
      Complex q = mu / Complex(0.0, w);
      double d = std::abs(q - std::round(q.real()));
      if (d < rep.margin) {
        rep.margin = d;
        rep.detail = "mu = " + format_g17(mu.real()) + (mu.imag() >= 0 ? "+" : "") +
                     format_g17(mu.imag()) + "i vs " + std::to_string((int)std::round(q.real())) +
                     " * i omega0";
      }
    }
    rep.pass = rep.margin > opts.tol;
    return rep;
  }

  if (mode == "pairwise") {
    // Distinct Floquet multipliers of the complement at the origin:
    // mu_k - mu_l not in i omega0 Z for k != l.
    rep.margin = std::numeric_limits<double>::infinity();
    int m = static_cast<int>(sd.mu.size());
    for (int k = 0; k < m; ++k) {
      for (int l = 0; l < m; ++l) {
        if (k == l) continue;
        int kk = 0;
        double d = dist_to_imaginary_lattice(sd.mu[k] - sd.mu[l], w, &kk);
        if (d < rep.margin) {
          rep.margin = d;
          rep.detail = "mu_" + std::to_string(k) + " - mu_" + std::to_string(l) + " vs " +
                       std::to_string(kk) + " * i omega0";
        }
      }
    }
    if (m <= 1) {
      rep.margin = std::numeric_limits<double>::infinity();
      rep.detail = "complement has at most one eigenvalue";
    }
    rep.pass = rep.margin > opts.tol;
    return rep;
  }

  if (mode == "kappa") {
    // |k lambda_eps - mu_j(eps)| over |k| <= kmax, evaluated on the perturbed
    // linearization at opts.eps.
    Eigen::MatrixXd a = linearization(spec, opts.eps);
    Eigen::EigenSolver<Eigen::MatrixXd> es(a);
    require(es.info() == Eigen::Success, "check_nonresonance: eigensolver failed");
    Eigen::VectorXcd vals = es.eigenvalues();
    int n = spec.dim;
    int sel = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      double d = std::abs(vals(i) - sd.lambda);
      if (d < bd) {
        bd = d;
        sel = i;
      }
    }
    Complex lam = vals(sel);
    int conj_sel = 0;
    bd = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (i == sel) continue;
      double d = std::abs(vals(i) - std::conj(lam));
      if (d < bd) {
        bd = d;
        conj_sel = i;
      }
    }
    double mu_imax = 0.0;
    for (int i = 0; i < n; ++i) {
      if (i == sel || i == conj_sel) continue;
      mu_imax = std::max(mu_imax, std::abs(vals(i).imag()));
    }
    int kmax = opts.kmax_override > 0
                   ? opts.kmax_override
                   : static_cast<int>(std::ceil(2.0 * mu_imax / w)) + opts.d + 2;
    rep.kmax = kmax;
    rep.margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (i == sel || i == conj_sel) continue;
      for (int k = -kmax; k <= kmax; ++k) {
        double d = std::abs(static_cast<double>(k) * lam - vals(i));
        if (d < rep.margin) {
          rep.margin = d;
          rep.detail = "k = " + std::to_string(k) + ", mu = " + format_g17(vals(i).real()) +
                       (vals(i).imag() >= 0 ? "+" : "") + format_g17(vals(i).imag()) + "i";
        }
      }
    }
    rep.pass = rep.margin > opts.tol;
    return rep;
  }

  fail("check_nonresonance: unknown mode '" + mode + "'");
}

PerturbedPair perturbed_pair(const SystemSpec& spec, const SpectralData& sd, double eps_ref) {
  PerturbedPair pp;
  require(!spec.C.empty(), "perturbed_pair: model has no damping matrices");
  Complex dl = (sd.lvec.transpose() * (spec.C[0] * sd.v.cast<Complex>()))(0);
  pp.dlambda = dl;
  pp.alpha = -dl.real();
  pp.alpha_im = dl.imag();

  // Finite cross-check at eps_ref on the full perturbed linearization.
  Eigen::MatrixXd a = linearization(spec, eps_ref);
  Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  require(es.info() == Eigen::Success, "perturbed_pair: eigensolver failed");
  Eigen::VectorXcd vals = es.eigenvalues();
  int sel = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (int i = 0; i < vals.size(); ++i) {
    double d = std::abs(vals(i) - sd.lambda);
    if (d < bd) {
      bd = d;
      sel = i;
    }
  }
  Complex fd = (vals(sel) - sd.lambda) / eps_ref;
  double denom = std::max(std::abs(dl), std::abs(sd.lambda));
  pp.crosscheck_rel = std::abs(fd - dl) / denom;
  return pp;
}

}  // namespace ssmx
