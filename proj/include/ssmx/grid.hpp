#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "ssmx/cheb.hpp"
#include "ssmx/poly.hpp"
#include "ssmx/util.hpp"

namespace ssmx {

// In-place radix-2 FFT. Forward maps samples x_j to X_k = sum_j x_j e^{-2pi i jk/N};
// inverse applies the conjugate transform and divides by N.
void fft_radix2(std::vector<Complex>& a, bool inverse);

// Polar tensor grid on a disk. Radial nodes are Chebyshev-Gauss points in
// s = rho^2 on (0, smax], so no node sits at the center and radial profiles of
// fixed angular parity are smooth functions of s. Angular content is stored as
// Fourier modes; nonlinear work happens on an oversampled angular value grid
// (nsamples > 2 * nmodes) so that pointwise products of band-limited data do
// not alias back into the kept band.
struct DiskGrid {
  DiskGrid(double delta_, int nrad_ = 24, int nmodes_ = 64, int nsamples_ = 256);

  double delta;    // working disk radius
  double smax;     // radial chart domain (1.05 delta)^2, headroom for compositions
  int nrad;        // radial node count
  int nmodes;      // kept angular modes (power of two); Nyquist column is unused
  int nsamples;    // angular value-grid size (power of two)
  std::vector<double> s;
  std::vector<double> rho;
  BaryInterp bary; // barycentric interpolant on the s nodes

  int kmax() const { return nmodes / 2 - 1; }
};

using DiskGridPtr = std::shared_ptr<const DiskGrid>;

// Taylor coefficients in s at s = 0 (length qmax + 1) of a smooth radial
// profile sampled at the grid nodes. Goes through Chebyshev coefficients with
// a noise-floor cut, which keeps the extraction stable for low orders.
std::vector<Complex> radial_taylor(const DiskGrid& grid, const std::vector<Complex>& vals,
                                   int qmax);

// Vector-valued function on the disk stored per component as a nrad x nmodes
// complex mode matrix in FFT column layout (column k holds mode k for
// k <= nmodes/2, column nmodes - k holds mode -k). Row j holds the raw radial
// samples f_k(rho_j); radial operations divide out the parity factor
// rho^(|k| mod 2) so that every interpolated profile is smooth in s = rho^2.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(DiskGridPtr grid, int ncomp);

  // Build from trajectory samples: samples[c] is nrad x nsamples with column i
  // taken at angle theta0 - 2 pi i / nsamples (the flow sweeps clockwise).
  static GridFunction from_flow_samples(DiskGridPtr grid,
                                        const std::vector<Eigen::MatrixXd>& samples,
                                        double theta0);
  // Sample a callable f(x1, x2) on the value grid (angles 2 pi i / nsamples).
  static GridFunction from_point_values(DiskGridPtr grid,
                                        const std::function<Eigen::VectorXd(double, double)>& f,
                                        int ncomp);
  // Forward transform of value matrices laid out like values() output.
  static GridFunction from_value_matrices(DiskGridPtr grid,
                                          const std::vector<Eigen::MatrixXcd>& vals);

  const DiskGridPtr& grid() const { return grid_; }
  int ncomp() const { return ncomp_; }
  Eigen::MatrixXcd& modes(int c) { return modes_[c]; }
  const Eigen::MatrixXcd& modes(int c) const { return modes_[c]; }

  // Signed mode number of an FFT column index.
  int mode_number(int idx) const;

  // Enforce realness (f_{-k} = conj f_k, real zero mode, empty Nyquist).
  void symmetrize();

  // Values on the angular value grid, nrad x nsamples, column i at angle
  // 2 pi i / nsamples.
  Eigen::MatrixXcd values(int c) const;

  GridFunction dtheta() const;
  // Cartesian partials (d/dx1 f, d/dx2 f) via the mode-coupling ladder.
  std::pair<GridFunction, GridFunction> gradient() const;

  Eigen::VectorXd eval(double x1, double x2) const;
  // Analytic continuation to complex points with Re(z1^2 + z2^2) > 0; used on
  // the collar shells, whose samples keep the real part away from the center.
  Eigen::VectorXcd eval(const Eigen::Vector2cd& z) const;

  // Polynomial jet at the origin through the given total degree.
  PolyMap taylor(int order) const;

  // Subtract the jet below order d; returns the max absolute value removed.
  double remove_below_order(int d);

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(double a);
  GridFunction operator+(const GridFunction& o) const;
  GridFunction operator-(const GridFunction& o) const;
  GridFunction scaled(double a) const;

  double max_abs() const;
  // max over radial nodes and angular samples of |f| / rho^d.
  double weighted_sup(int d) const;

  // Parity-reduced radial profile of mode k: f_k(s_j) / rho_j^(|k| mod 2).
  std::vector<Complex> reduced_profile(int c, int k) const;

 private:
  void check_compatible(const GridFunction& o) const;

  DiskGridPtr grid_;
  int ncomp_ = 0;
  std::vector<Eigen::MatrixXcd> modes_;
};

}  // namespace ssmx
