#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ssmx/cheb.hpp"
#include "ssmx/spectral.hpp"
#include "ssmx/system.hpp"

namespace ssmx {

// One periodic orbit of the conservative system, anchored where the chart
// coordinates (dual projection) equal (0, rho), i.e. on the angle pi/2 ray.
struct Orbit {
  double rho = 0.0;     // section amplitude, the chart radius label
  double period = 0.0;  // period in original time
  double omega = 0.0;   // 2 pi / period
  double level = 0.0;   // conserved value on the orbit
  Eigen::VectorXd x0;   // section state
  double return_residual = 0.0;
};

struct ShootOpts {
  double tol = 1e-12;      // return-map residual target
  int max_iter = 30;
  double int_tol = 1e-12;  // integrator tolerance
};

// Gauss-Newton shooting for the periodic orbit through the section slice
// x = plane (0, rho) + basis2 w, unknowns (w, T).
Orbit continue_orbit(const SystemSpec& spec, const SpectralData& sd, double rho,
                     const Eigen::VectorXd& w_guess, double T_guess,
                     const ShootOpts& opts = {});

// Orbit family on Chebyshev-Gauss radii in s = rho^2 over (0, (1.05 delta)^2],
// continued outward from the smallest radius, with spectral fits of the
// frequency and energy profiles.
struct OrbitFamily {
  std::vector<Orbit> orbits;  // ascending rho
  double delta = 0.0;
  double smax = 0.0;
  double omega0 = 0.0;
  ChebFit omega_of_s;      // Omega(s) on [0, smax]
  ChebFit level_of_s;      // I(s) on [0, smax], strictly increasing
  ChebFit scale_of_level;  // omega0 / Omega as a function of I on [0, Imax]
  ChebFit omega_of_level;  // Omega as a function of I, for backbone reports
};

OrbitFamily build_family(const SystemSpec& spec, const SpectralData& sd, double delta,
                         int nradii = 20, const ShootOpts& opts = {});

// Copy of the system with the renormalization factor s(I) = omega0 / Omega(I)
// installed, making every family orbit 2 pi / omega0 periodic.
SystemSpec rescale_time(const SystemSpec& spec, const OrbitFamily& fam);

// One transverse Floquet pair of a renormalized orbit: monodromy eigenvalue
// |lambda| e^{i phi}, branch-tracked exponent mu (phase) and rate (radial),
// and the real 2-frame [Re v, Im v] of the eigenvector at the section. The
// transverse monodromy restricted to the frame is e^{T0 (rate I + mu J)}.
struct TransversePair {
  Eigen::MatrixXd frame;  // n x 2
  double mu = 0.0;
  double rate = 0.0;
  Complex multiplier;  // eigenvalue with Im >= 0
};

struct FloquetData {
  double rho = 0.0;
  Eigen::MatrixXd monodromy;  // renormalized time-T0 fundamental at the section
  double unit_defect = 0.0;   // max |lambda - 1| over the tangent pair
  std::vector<TransversePair> pairs;
};

// Floquet data for every orbit of the family, computed on the renormalized
// system; exponent branches are seeded by the linear data at rho -> 0 and
// tracked continuously outward.
std::vector<FloquetData> floquet_family(const SystemSpec& rspec, const OrbitFamily& fam,
                                        const SpectralData& sd, double int_tol = 1e-12);

}  // namespace ssmx
