#pragma once

#include <string>
#include <vector>

#include "ssmx/system.hpp"

namespace ssmx {

// Elliptic eigenpair of the unperturbed linearization together with the real
// plane it spans and a complement basis. Conventions:
//   L v = i omega0 v,  v = u1 + i u2,  plane = [u1 u2],
// so the linearized flow in plane coordinates is x' = omega0 J x with
// J = [[0,1],[-1,0]] (clockwise rotation, theta(t) = theta0 - omega0 t).
struct SpectralData {
  double omega0 = 0.0;
  Complex lambda;
  Eigen::VectorXcd v;      // right eigenvector, deterministic normalization
  Eigen::VectorXcd lvec;   // left eigenvector, plain-transpose pairing lvec^T v = 1
  Eigen::MatrixXd plane;   // n x 2
  Eigen::MatrixXd dual;    // 2 x n, dual functionals of the plane along basis2
  Eigen::MatrixXd basis2;  // n x (n-2), orthonormal basis of the spectral complement
  std::vector<Complex> mu;  // complementary eigenvalues
  bool semisimple = true;
  double eig_cond = 0.0;
  int pair_index = 0;

  // Embedding of chart coordinates: K0_lin(x) = plane * x.
  Eigen::VectorXd embed(double x1, double x2) const { return plane.col(0) * x1 + plane.col(1) * x2; }
};

// Pick a purely imaginary eigenvalue pair of L. pair_index orders the
// candidate pairs by increasing frequency; -1 selects the smallest.
SpectralData decompose(const SystemSpec& spec, int pair_index = -1);

struct NonresOptions {
  double tol = 1e-8;   // distance below which a relation counts as resonant
  double eps = 0.0;    // evaluation point for the perturbed (kappa) scan
  int d = 2;           // smoothness order entering the default scan cutoff
  int kmax_override = 0;
};

struct NonresReport {
  std::string mode;
  bool pass = false;
  double margin = 0.0;  // smallest distance encountered
  int kmax = 0;
  std::string detail;   // closest relation, human readable
};

// mode "lyapunov":  mu_k / (i omega0) stays away from the integers.
// mode "pairwise":  mu_k - mu_l stays away from i omega0 Z for k != l.
// mode "kappa":     |k lambda_eps - mu_j(eps)| stays positive for |k| <= kmax.
NonresReport check_nonresonance(const SystemSpec& spec, const SpectralData& sd,
                                const std::string& mode, const NonresOptions& opts = {});

// First-order motion of the elliptic pair under the perturbation, with a
// finite-difference eigenvalue cross-check at a small reference epsilon.
struct PerturbedPair {
  Complex dlambda;        // d lambda / d eps at eps = 0
  double alpha = 0.0;     // decay rate, -Re dlambda
  double alpha_im = 0.0;  // frequency shift, Im dlambda
  double crosscheck_rel = 0.0;
};

PerturbedPair perturbed_pair(const SystemSpec& spec, const SpectralData& sd,
                             double eps_ref = 1e-4);

}  // namespace ssmx
