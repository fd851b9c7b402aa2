#pragma once

#include <cmath>
#include <string>

#include "ssmx/poly.hpp"
#include "ssmx/system.hpp"

namespace ssmx {

// General linear mechanical system with a polynomial potential correction.
// State is (q, p) with Hamiltonian p . Minv p / 2 + q . Kmat q / 2 + V(q) and
// Rayleigh damping eps * Cd. V is a scalar polynomial in q with no terms of
// degree below 3; M, Kmat symmetric positive definite.
SystemSpec mechanical_system(const Eigen::MatrixXd& M, const Eigen::MatrixXd& Cd,
                             const Eigen::MatrixXd& Kmat, const PolyMap& V,
                             const std::string& name = "mechanical");

// Two-mass spring chain with quartic coupling, the running worked example.
struct PendulumParams {
  double m = 0.1;    // mass
  double k = 0.1414; // linear spring constant
  double kq = 0.4;   // quartic spring strength
  double l0 = 1.0;   // rest offset
};

SystemSpec pendulum_system(const PendulumParams& par = {});

// Quadratic graph coefficients of the slow manifold over the (q1, p1) plane:
// (q2, p2) = w20 q1^2 + w11 q1 p1 + w02 p1^2.
struct GraphCoefficients {
  Eigen::Vector2d w20 = Eigen::Vector2d::Zero();
  Eigen::Vector2d w11 = Eigen::Vector2d::Zero();
  Eigen::Vector2d w02 = Eigen::Vector2d::Zero();
};

// Closed-form reference table for the pendulum graph coefficients.
GraphCoefficients pendulum_reference_w(const PendulumParams& par, double eps);

// First-order Taylor of the reference table in eps about 0.
GraphCoefficients pendulum_reference_w_linear(const PendulumParams& par, double eps);

// Reference reduced field on the (q1, p1) graph in variables (x, y), expanded
// into a degree-5 polynomial map.
PolyMap pendulum_reduced_reference(const PendulumParams& par, double eps);

// Planar double cover of the slowly damped counterexample. The z block covers
// the polar system rho' = -eps^2 rho + eps rho^2, theta' = omega under
// rho = |z|^2, so the eps-damping enters only at order eps^2 and an unstable
// limit cycle sits at |z|^2 = eps. The (w, gamma) block is a decoupled
// transverse rotation with eps^2 damping a.
struct Example1Params {
  double omega = 1.0;
  double a = -1.0;
  double gamma = std::sqrt(2.0); // transverse frequency, off the omega/2 lattice
};

SystemSpec example1_system(const Example1Params& par = {});

// Planar oscillator pair with a 1:alpha internal frequency ratio and quadratic
// forcing of the fast block by the slow block. At alpha = 2 the quadratic
// graph equations are singular in the conservative limit and the graph blows
// up like 1/eps as the damping is removed.
struct ResonantParams {
  double alpha = 3.0;
  double lambda = 1.0; // eps damping on the slow block
  double mu = 1.0;     // eps damping on the fast block
  Eigen::Vector2d f20{1.0, 0.0};
  Eigen::Vector2d f11{1.0, 1.0};
  Eigen::Vector2d f02{0.0, 1.0};
};

SystemSpec resonant_system(const ResonantParams& par = {});

struct QuadGraph {
  Eigen::Vector2d h20 = Eigen::Vector2d::Zero();
  Eigen::Vector2d h11 = Eigen::Vector2d::Zero();
  Eigen::Vector2d h02 = Eigen::Vector2d::Zero();
  double norm() const;
};

// Quadratic graph eta = H(xi) of the resonant system, solved from the full
// 6x6 monomial matching system.
QuadGraph resonant_graph_direct(const ResonantParams& par, double eps);

// Same h11 through the Schur route (B + 4 B^{-1}) h11 = rhs, used as a
// cross-check of the direct solve.
Eigen::Vector2d resonant_h11_schur(const ResonantParams& par, double eps);

// Four-dimensional system with exactly conserved I = |x|^2 + |y|^2 at eps = 0,
// an amplitude-dependent tangential frequency and an amplitude-dependent
// transverse growth rate. Exercises the hypothesis gates and radius-dependent
// transverse data without a mechanical structure.
struct HyperParams {
  double omega1 = 1.0;
  double omega2 = std::sqrt(3.0);
  double nu = 0.3;    // tangential frequency slope in |x|^2
  double g = 0.6;     // transverse trace coefficient
  double cdamp = 1.0; // eps damping, both blocks
};

SystemSpec hyper_system(const HyperParams& par = {});

}  // namespace ssmx
