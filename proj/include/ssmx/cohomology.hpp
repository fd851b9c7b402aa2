#pragma once

#include <cstdint>

#include "ssmx/chart.hpp"
#include "ssmx/grid.hpp"

namespace ssmx {

// Reduced-field correction with the normal-form gauge: constant in the angle,
// R(x) = alpha(s) x + beta(s) J x with s = rho^2. alpha carries the radial
// (damping) obstruction, beta the frequency shift.
struct ReducedCorrection {
  std::vector<double> alpha, beta;  // values at the radial nodes
  ChebFit alpha_of_s, beta_of_s;
  Eigen::Vector2d eval(double x1, double x2) const;
};

struct CohomologySolution {
  GridFunction kn;      // correction to the embedding
  ReducedCorrection rn;
  double margin = 0.0;  // smallest transverse resolvent distance encountered
  double defect = 0.0;  // consistency defect of the solvability extraction
};

// Solve the linearized invariance equation
//   DF0(K0) k + omega0 d_theta k - DK0 r = -eta
// for (k, r) in the adapted frame, radius by radius and angular mode by
// angular mode. The tangent modes k = +-1 are singular; their obstruction is
// absorbed by r and the kernel component of the solution is set to zero.
CohomologySolution solve_cohomology_fourier(const ConservativeChart& ch, const GridFunction& eta);

// Same equation solved as a periodic boundary value problem along each orbit
// in the ambient frame: the monodromy fixes the solvability pair through its
// unit left eigenvectors, the return condition is solved with a min-norm
// decomposition, and the result is projected onto the same gauge as the mode
// solver. Used as an independent cross-check.
CohomologySolution solve_cohomology_bvp(const ConservativeChart& ch, const GridFunction& eta,
                                        double int_tol = 1e-11);

// Deterministic polynomial forcing for solver cross-checks: every monomial
// through the given total degree gets a coefficient in [-1, 1] drawn from a
// seeded generator.
GridFunction seeded_forcing(DiskGridPtr grid, int ncomp, int degree, std::uint64_t seed);

}  // namespace ssmx
