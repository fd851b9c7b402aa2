#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "ssmx/expansion.hpp"

namespace ssmx {

// Smallest integer weight d with beta < d * alpha * (1 - margin): the
// vanishing order at which the tangential decay rate alpha beats the
// transverse rate beta with room to spare. alpha must be positive; that is
// the gate the dissipative continuation needs before refinement can work.
int choose_d(double alpha, double beta, double margin = 0.2);

// Time-T0 maps of the rescaled flow at fixed eps: phi moves ambient states,
// disk moves chart points under the truncated reduced field, r = disk over
// one full period. gamma_hat records the measured contraction factor of r
// and delta_eff the radius the boundary sweep certifies as forward
// invariant (shrunk below the grid radius when a boundary sample escapes).
struct TimeMaps {
  const Expansion* ex = nullptr;
  SystemSpec flow_spec;
  Complex eps{0.0, 0.0};
  int order = 0;
  double t0 = 0.0;
  double tol = 1e-11;
  double delta_eff = 0.0;
  double gamma_hat = 0.0;

  Eigen::VectorXcd phi(const Eigen::VectorXcd& x, double t) const;
  Eigen::Vector2cd disk(const Eigen::Vector2cd& z, double t) const;
  Eigen::VectorXcd phi_inv(const Eigen::VectorXcd& x) const { return phi(x, -t0); }
  Eigen::Vector2cd r(const Eigen::Vector2cd& z) const { return disk(z, t0); }
  Eigen::Vector2cd r_inv(const Eigen::Vector2cd& z) const { return disk(z, -t0); }
};

TimeMaps time_t0_maps(const Expansion& ex, Complex eps, int order, double tol = 1e-11);

// Embedding correction with vanishing order d: values on the chart grid plus
// cached samples on the three imaginary-collar shells, measured in the
// weighted norm sup |value(z)| / |z|^d over both sample sets.
struct WeightedFunction {
  DiskGridPtr grid;
  GridFunction f;
  Eigen::MatrixXcd collar;  // component x collar-sample values
  int d = 1;

  double norm() const;
};

WeightedFunction zero_correction(const Expansion& ex, int d);

// Lift a grid function to a weighted correction; collar samples are filled
// from its interpolant, so the function enters the norm together with its
// analytic continuation onto the shells.
WeightedFunction make_correction(const Expansion& ex, const GridFunction& f, int d);

double distance(const WeightedFunction& a, const WeightedFunction& b);

struct ApplyStats {
  double low_order = 0.0;  // size of the projected Taylor content below order d
};

// One application of the refinement operator
//   T(c) = phi^{-1} o (K^{<=N} o r + c o r) - K^{<=N}
// resampled on the grid and the collar shells. Grid noise injects spurious
// Taylor content below order d; it is projected off the grid values each
// application and its size reported through stats.
WeightedFunction apply_T(const WeightedFunction& c, const TimeMaps& maps,
                         ApplyStats* stats = nullptr);

struct ContractionReport {
  double gamma_hat = 0.0;         // contraction factor of r on the disk
  double phi_inv_growth = 0.0;    // measured directional growth of phi_inv
  double effective_rate = 0.0;    // gamma_hat^d * phi_inv_growth
  double beta_hat = 0.0;          // (phi_inv_growth - 1) / |eps|
  int iterations = 0;
  double final_residual = 0.0;    // weighted norm of T(c) - c at the last step
  double distance_to_seed = 0.0;  // weighted norm of the converged correction
  double low_order = 0.0;         // largest projected low-order content seen
  std::vector<double> step_norms;
  bool converged = false;
  bool aborted = false;  // measured rate >= 1 on the opening iterates
  std::string note;
};

struct RefineResult {
  WeightedFunction correction;
  ContractionReport report;
};

struct IterOpts {
  double stop_tol = 1e-9;
  int max_iter = 40;
  double map_tol = 1e-11;
};

// Picard iteration of apply_T from the zero correction. The reduced field
// stays at its truncated expansion; only the embedding is refined.
RefineResult iterate(const Expansion& ex, Complex eps, int order, int d,
                     const IterOpts& opts = {});

// Flow-property defects || phi^s o K_fixed o r^{-s} - K_fixed || for each s,
// over footpoints the backward disk map keeps inside the grid radius.
std::vector<double> semiflow_check(const WeightedFunction& c, const TimeMaps& maps,
                                   const std::vector<double>& s_values);

}  // namespace ssmx
