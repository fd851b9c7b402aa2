#include "ssmx/cheb.hpp"

#include <cmath>

namespace ssmx {

std::vector<double> cheb_gauss_nodes(int n, double lo, double hi) {
  require(n >= 1, "cheb_gauss_nodes: n >= 1");
  std::vector<double> x(n);
  for (int j = 0; j < n; ++j) {
    double t = std::cos(kPi * (2.0 * (n - 1 - j) + 1.0) / (2.0 * n));
    x[j] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t;
  }
  return x;
}

BaryInterp::BaryInterp(std::vector<double> nodes) : x_(std::move(nodes)) {
  int n = size();
  require(n >= 2, "BaryInterp: need at least 2 nodes");
  w_.assign(n, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j != i) w_[i] /= (x_[i] - x_[j]);
    }
  }
  double wmax = 0.0;
  for (double w : w_) wmax = std::max(wmax, std::abs(w));
  require(wmax > 0.0, "BaryInterp: degenerate nodes");
  for (double& w : w_) w /= wmax;
}

const Eigen::MatrixXd& BaryInterp::diff_matrix() const {
  if (!have_dmat_) {
    int n = size();
    dmat_.setZero(n, n);
    for (int i = 0; i < n; ++i) {
      double row_sum = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        double d = (w_[j] / w_[i]) / (x_[i] - x_[j]);
        dmat_(i, j) = d;
        row_sum += d;
      }
      dmat_(i, i) = -row_sum;
    }
    have_dmat_ = true;
  }
  return dmat_;
}

ChebFit::ChebFit(double lo, double hi, std::vector<double> coeffs)
    : lo_(lo), hi_(hi), c_(std::move(coeffs)) {
  require(hi_ > lo_, "ChebFit: empty interval");
  require(!c_.empty(), "ChebFit: no coefficients");
}

ChebFit ChebFit::fit(const std::vector<double>& xs, const std::vector<double>& ys, int degree,
                     double lo, double hi) {
  require(xs.size() == ys.size() && !xs.empty(), "ChebFit::fit: bad samples");
  require(degree >= 0 && degree + 1 <= static_cast<int>(xs.size()), "ChebFit::fit: degree too high");
  int m = static_cast<int>(xs.size());
  Eigen::MatrixXd v(m, degree + 1);
  for (int r = 0; r < m; ++r) {
    double t = (2.0 * xs[r] - (lo + hi)) / (hi - lo);
    double t0 = 1.0, t1 = t;
    for (int k = 0; k <= degree; ++k) {
      if (k == 0) {
        v(r, k) = 1.0;
      } else if (k == 1) {
        v(r, k) = t;
      } else {
        double t2 = 2.0 * t * t1 - t0;
        t0 = t1;
        t1 = t2;
        v(r, k) = t2;
      }
    }
  }
  Eigen::VectorXd rhs(m);
  for (int r = 0; r < m; ++r) rhs(r) = ys[r];
  Eigen::VectorXd sol = v.colPivHouseholderQr().solve(rhs);
  std::vector<double> c(sol.data(), sol.data() + sol.size());
  return ChebFit(lo, hi, std::move(c));
}

ChebFit ChebFit::derivative() const {
  int n = static_cast<int>(c_.size());
  std::vector<double> d(std::max(1, n - 1), 0.0);
  // Chebyshev derivative recurrence on [-1,1], then chain rule for [lo,hi].
  std::vector<double> work(n + 2, 0.0);
  for (int k = n - 1; k >= 1; --k) {
    work[k - 1] = work[k + 1] + 2.0 * k * c_[k];
  }
  if (n >= 2) {
    work[0] *= 0.5;
    for (int k = 0; k < n - 1; ++k) d[k] = work[k] * (2.0 / (hi_ - lo_));
  }
  return ChebFit(lo_, hi_, std::move(d));
}

double ChebFit::max_fit_residual(const std::vector<double>& xs, const std::vector<double>& ys) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    worst = std::max(worst, std::abs(eval(xs[i]) - ys[i]));
  }
  return worst;
}

}  // namespace ssmx
