#pragma once

#include <Eigen/Dense>

#include "ssmx/poly.hpp"
#include "ssmx/spectral.hpp"
#include "ssmx/system.hpp"

namespace ssmx {

// Record of the change of variables produced by partial_normal_form. The new
// coordinates are x_old = basis * forward(v): a linear pass to the real
// eigen-block basis of the conservative linear part (tangent pair first,
// every pair in the clockwise convention mu * J), followed by a polynomial
// near-identity map. det_bound is the smallest Jacobian determinant of the
// near-identity part sampled on the working disk; min_divisor the smallest
// nonresonant divisor crossed while solving the homological equations.
struct NormalFormRecord {
  Eigen::MatrixXd basis;
  Eigen::MatrixXd basis_inv;
  PolyMap forward;
  double min_divisor = 0.0;
  double det_bound = 0.0;
  double kappa = 0.0;
};

struct NormalFormResult {
  SystemSpec spec;  // transformed system in the new coordinates
  NormalFormRecord record;
};

// Polynomial partial normal form of the conservative layer up to total degree
// degree_d: in the block coordinates, transverse components lose all pure
// tangent-variable terms, tangent components keep only the resonant backbone
// among them, and terms linear in the transverse variables survive only on
// their own resonance (the A(x) y structure). Terms at least quadratic in the
// transverse variables are untouched. Parameter layers and the conserved
// quantity are transported through the same change of variables. Fails if a
// divisor below kappa / 2 is met or the transform loses invertibility on the
// radius-delta ball.
NormalFormResult partial_normal_form(const SystemSpec& spec, int degree_d, double delta);

}  // namespace ssmx
