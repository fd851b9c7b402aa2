#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ssmx/util.hpp"

namespace ssmx {

// Chebyshev-Gauss nodes (first kind, no endpoints) mapped to [lo, hi], ascending.
std::vector<double> cheb_gauss_nodes(int n, double lo, double hi);

// Barycentric Lagrange interpolation on a fixed node set. Stable for
// Chebyshev-distributed nodes; evaluation extends to complex abscissae,
// which is how grid data is continued into the analyticity collar.
class BaryInterp {
 public:
  BaryInterp() = default;
  explicit BaryInterp(std::vector<double> nodes);

  int size() const { return static_cast<int>(x_.size()); }
  const std::vector<double>& nodes() const { return x_; }

  template <typename T>
  T eval(const std::vector<T>& vals, const T& x) const {
    require(static_cast<int>(vals.size()) == size(), "BaryInterp: value count mismatch");
    T num = x * 0.0;
    T den = x * 0.0;
    for (int i = 0; i < size(); ++i) {
      T dx = x - x_[i];
      if (ScalarTraits<T>::abs(dx) < 1e-300) return vals[i];
      T q = T(w_[i]) / dx;
      num = num + vals[i] * q;
      den = den + q;
    }
    return num / den;
  }

  // Derivative-at-nodes matrix: (D f)(x_i) for the interpolant of f.
  const Eigen::MatrixXd& diff_matrix() const;

 private:
  std::vector<double> x_;
  std::vector<double> w_;
  mutable Eigen::MatrixXd dmat_;
  mutable bool have_dmat_ = false;
};

// Truncated Chebyshev series on [lo, hi], evaluated by Clenshaw recurrence.
// Works for real, complex, and truncated-series arguments; this is the
// representation used for smooth radial profiles attached to vector fields.
class ChebFit {
 public:
  ChebFit() = default;
  ChebFit(double lo, double hi, std::vector<double> coeffs);

  // Least-squares fit of degree `degree` through samples (xs, ys).
  static ChebFit fit(const std::vector<double>& xs, const std::vector<double>& ys, int degree,
                     double lo, double hi);

  template <typename T>
  T eval(const T& x) const {
    T t = (x * 2.0 - (lo_ + hi_)) * (1.0 / (hi_ - lo_));
    T b1 = t * 0.0;
    T b2 = t * 0.0;
    for (int k = static_cast<int>(c_.size()) - 1; k >= 1; --k) {
      T b = t * b1 * 2.0 - b2 + c_[k];
      b2 = b1;
      b1 = b;
    }
    return t * b1 - b2 + c_[0];
  }

  ChebFit derivative() const;
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<double>& coeffs() const { return c_; }
  double max_fit_residual(const std::vector<double>& xs, const std::vector<double>& ys) const;

 private:
  double lo_ = 0.0, hi_ = 1.0;
  std::vector<double> c_;
};

}  // namespace ssmx
