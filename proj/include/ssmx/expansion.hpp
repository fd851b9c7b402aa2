#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ssmx/chart.hpp"
#include "ssmx/cohomology.hpp"
#include "ssmx/grid.hpp"

namespace ssmx {

enum class SolveRoute { fourier, bvp };

// Perturbative continuation of the conservative chart: the embedding and the
// reduced field as truncated power series in the dissipation strength,
//   K(x, eps) = K0(x) + eps K1(x) + ...,
//   R(x, eps) = omega0 J x + eps R1(x) + ...,
// with each order solved from the linearized invariance equation on the grid.
// R[0] is the rigid rotation and is kept implicit (stored entry is zero).
struct Expansion {
  const ConservativeChart* chart = nullptr;
  int order = 0;

  std::vector<GridFunction> K;       // K[0..order]
  std::vector<GridFunction> Kx, Ky;  // partial derivatives of each K[n]
  std::vector<ReducedCorrection> R;  // R[1..order]; R[0] zero placeholder
  std::vector<double> defects;       // solvability re-evaluation defect, order 1..order

  // Embedding truncated at order N <= order, Horner in eps. The complex form
  // continues the radial profiles analytically and needs Re(z1^2+z2^2) > 0.
  Eigen::VectorXd embed(const Eigen::Vector2d& x, double eps, int N) const;
  Eigen::VectorXcd embed(const Eigen::Vector2cd& z, Complex eps, int N) const;

  // Reduced field truncated at order N, including the rigid rotation.
  Eigen::Vector2d reduced(const Eigen::Vector2d& x, double eps, int N) const;
  Eigen::Vector2cd reduced(const Eigen::Vector2cd& z, Complex eps, int N) const;

  // Jacobian of the truncated embedding times the truncated reduced field.
  Eigen::VectorXcd transport(const Eigen::Vector2cd& z, Complex eps, int N) const;
};

// Known forcing of the order-n equation: the eps^n jet coefficient of the
// field composed with the lower-order embedding, minus the transport terms
// sum_{j=1}^{n-1} DK_j R_{n-j}. The unknown DK0 R_n term is excluded; the
// order-n equation reads  DF0(K0) K_n + omega0 d_theta K_n - DK0 R_n = -eta_n.
GridFunction order_forcing(const ConservativeChart& ch, const std::vector<GridFunction>& K,
                           const std::vector<ReducedCorrection>& R, int n);

Expansion expand(const ConservativeChart& ch, int order,
                 SolveRoute route = SolveRoute::fourier, double bvp_tol = 1e-11);

// Weighted invariance residual of the order-N truncation at perturbation eps:
//   sup |z|^{-d} | F(K(z), eps) - DK(z) R(z) |
// over the real value grid plus three imaginary-collar shells at
// |Im| in {tau/3, 2tau/3, tau}, tau = 0.05 delta, with collar footpoints
// restricted to rho >= 0.25 delta and offsets along the radial and tangential
// directions. Finite for complex eps; the quantity the truncation theorem
// bounds by C |eps|^{N+1}.
double weighted_residual(const Expansion& ex, Complex eps, int N, int d);

}  // namespace ssmx
