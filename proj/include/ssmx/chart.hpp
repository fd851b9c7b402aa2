#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ssmx/grid.hpp"
#include "ssmx/orbits.hpp"
#include "ssmx/spectral.hpp"
#include "ssmx/system.hpp"

namespace ssmx {

struct ChartOpts {
  int nrad = 24;
  int nmodes = 64;
  int nsamples = 256;
  double int_tol = 1e-12;
  ShootOpts shoot{};
};

// Adapted chart of the unperturbed manifold: the orbit family embedded over
// the disk together with moving frames that block-diagonalize the linearized
// invariance operator. Columns of DK0 span the tangent directions; V carries
// the transverse Floquet frame, normalized so that along each orbit
//   dV/dt = DF0(K0) V - V A2(rho),    A2 = rate I + mu J per pair,
// which makes V periodic in the angle. The frames are stored as grid
// functions (angular Fourier modes per radius) plus pointwise inverses of the
// combined frame [DK0 | V] on the angular value grid.
struct ConservativeChart {
  DiskGridPtr grid;
  SystemSpec rspec;  // renormalized system, scale active
  SpectralData sd;
  OrbitFamily family;
  std::vector<FloquetData> floquet;  // one entry per radial node

  GridFunction K0;      // embedding, dim components
  GridFunction T1, T2;  // columns of DK0
  GridFunction V;       // transverse frame, component p * dim + a holds V(a, p)

  double omega0 = 0.0;
  int dim = 0;
  int npairs = 0;

  // States and fundamental matrices along each orbit at the flow sample times
  // t_i = T0 i / nsamples, indexed in time order (angle pi/2 - omega0 t).
  std::vector<std::vector<Eigen::VectorXd>> orbit_states;
  std::vector<std::vector<Eigen::MatrixXd>> orbit_fundamentals;

  // Value-grid angle column holding flow sample i (theta = 2 pi a / nsamples).
  int angle_index(int i) const;

  // Transverse block of pair p at radial node j.
  Eigen::Matrix2d a2(int j, int p) const;

  // Frame [T1 T2 V] at radial node j, value-grid angle column a.
  const Eigen::MatrixXd& frame(int j, int a) const;
  const Eigen::MatrixXd& frame_inverse(int j, int a) const;

  // Smallest |i k omega0 + eig A2| over radii, pairs, and |k| <= kmax; the
  // solvability margin of the transverse mode solves.
  double resolvent_margin(int kmax) const;

  std::vector<Eigen::MatrixXd> frames_, frame_inv_;  // nrad * nsamples entries
};

// Build the chart: continue the family, renormalize time, compute Floquet
// data, sample the embedding and the frames.
ConservativeChart adapted_chart(const SystemSpec& spec, const SpectralData& sd, double delta,
                                const ChartOpts& opts = {});

}  // namespace ssmx
