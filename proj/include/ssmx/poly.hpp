#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <vector>

#include "ssmx/eps_series.hpp"
#include "ssmx/util.hpp"

namespace ssmx {

using MultiIndex = std::vector<std::uint8_t>;

inline int mi_degree(const MultiIndex& a) {
  int d = 0;
  for (auto e : a) d += e;
  return d;
}

// Dense multivariate polynomial map R^n -> R^m stored as exponent -> coefficient
// vector. Exponent maps are ordered, so iteration and serialization are
// deterministic. Differentiation is exact; evaluation is templated over the
// scalar so states may be real, complex, or truncated series in the
// perturbation parameter.
class PolyMap {
 public:
  PolyMap() = default;
  PolyMap(int n_in, int n_out) : n_in_(n_in), n_out_(n_out) {}

  static PolyMap zero(int n_in, int n_out) { return PolyMap(n_in, n_out); }
  static PolyMap identity(int n);
  static PolyMap linear(const Eigen::MatrixXd& a);

  int n_in() const { return n_in_; }
  int n_out() const { return n_out_; }
  bool empty() const { return terms_.empty(); }
  int degree() const;
  std::size_t term_count() const { return terms_.size(); }
  const std::map<MultiIndex, Eigen::VectorXd>& terms() const { return terms_; }

  void add_term(const MultiIndex& exp, const Eigen::VectorXd& coef);
  void add_term(const std::vector<int>& exp, const Eigen::VectorXd& coef);
  Eigen::VectorXd coefficient(const MultiIndex& exp) const;
  void prune(double tol = 0.0);

  // Structure probes used by validity gates.
  double max_abs_coef_below_degree(int deg) const;  // terms with total degree < deg
  double max_abs_coef() const;

  template <typename T>
  Eigen::Matrix<T, Eigen::Dynamic, 1> eval(const Eigen::Matrix<T, Eigen::Dynamic, 1>& x) const {
    require(x.size() == n_in_, "PolyMap::eval: dimension mismatch");
    Eigen::Matrix<T, Eigen::Dynamic, 1> out =
        Eigen::Matrix<T, Eigen::Dynamic, 1>::Zero(n_out_);
    for (const auto& [a, c] : terms_) {
      T mono = power_product<T>(x, a);
      for (int i = 0; i < n_out_; ++i) out(i) += c(i) * mono;
    }
    return out;
  }

  template <typename T>
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> jacobian(
      const Eigen::Matrix<T, Eigen::Dynamic, 1>& x) const {
    require(x.size() == n_in_, "PolyMap::jacobian: dimension mismatch");
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> jac =
        Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>::Zero(n_out_, n_in_);
    MultiIndex b;
    for (const auto& [a, c] : terms_) {
      for (int v = 0; v < n_in_; ++v) {
        if (a[v] == 0) continue;
        b = a;
        b[v] -= 1;
        T mono = power_product<T>(x, b) * static_cast<double>(a[v]);
        for (int i = 0; i < n_out_; ++i) jac(i, v) += c(i) * mono;
      }
    }
    return jac;
  }

  // Directional second derivative D^2F(x)(u, .) as an n_out x n_in matrix.
  template <typename T>
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> djac(
      const Eigen::Matrix<T, Eigen::Dynamic, 1>& x,
      const Eigen::Matrix<T, Eigen::Dynamic, 1>& u) const {
    require(x.size() == n_in_ && u.size() == n_in_, "PolyMap::djac: dimension mismatch");
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> m =
        Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>::Zero(n_out_, n_in_);
    MultiIndex b;
    for (const auto& [a, c] : terms_) {
      for (int v = 0; v < n_in_; ++v) {
        if (a[v] == 0) continue;
        for (int w = 0; w < n_in_; ++w) {
          int factor = (v == w) ? a[v] * (a[v] - 1) : a[v] * a[w];
          if (factor == 0) continue;
          b = a;
          b[v] -= 1;
          if (b[w] == 0) continue;
          b[w] -= 1;
          T mono = power_product<T>(x, b) * static_cast<double>(factor) * u(w);
          for (int i = 0; i < n_out_; ++i) m(i, v) += c(i) * mono;
        }
      }
    }
    return m;
  }

  // Hessian of output component `comp` at x.
  Eigen::MatrixXd hessian(int comp, const Eigen::VectorXd& x) const;

  // Evaluation with truncated series components (used by order-by-order
  // right-hand-side assembly).
  template <typename U>
  std::vector<EpsSeries<U>> eval_series(const std::vector<EpsSeries<U>>& x) const {
    require(static_cast<int>(x.size()) == n_in_, "PolyMap::eval_series: dimension mismatch");
    int ord = x.empty() ? 0 : x[0].order();
    std::vector<EpsSeries<U>> out(n_out_, EpsSeries<U>(ord));
    for (const auto& [a, c] : terms_) {
      EpsSeries<U> mono(ord, U(1.0));
      for (int v = 0; v < n_in_; ++v) {
        for (int p = 0; p < a[v]; ++p) mono = mono * x[v];
      }
      for (int i = 0; i < n_out_; ++i) out[i] = out[i] + mono * c(i);
    }
    return out;
  }

  PolyMap operator+(const PolyMap& o) const;
  PolyMap operator-(const PolyMap& o) const;
  PolyMap scaled(double s) const;
  PolyMap truncated(int max_degree) const;
  PolyMap component(int i) const;  // scalar map keeping output component i

  // Scalar-poly product (both maps must have n_out == 1).
  PolyMap scalar_mul(const PolyMap& o) const;

  // Gradient of a scalar map as an R^n -> R^n map.
  PolyMap gradient() const;

  // F(G(x)) truncated to max_degree (exact if max_degree >= deg F * deg G).
  PolyMap compose(const PolyMap& inner, int max_degree) const;

  // Inverse of a near-identity map as a truncated power series.
  static PolyMap invert_near_identity(const PolyMap& h, int max_degree);

 private:
  template <typename T>
  static T power_product(const Eigen::Matrix<T, Eigen::Dynamic, 1>& x, const MultiIndex& a) {
    T p(1.0);
    for (int v = 0; v < static_cast<int>(a.size()); ++v) {
      for (int k = 0; k < a[v]; ++k) p *= x(v);
    }
    return p;
  }

  int n_in_ = 0;
  int n_out_ = 0;
  std::map<MultiIndex, Eigen::VectorXd> terms_;
};

// max |coefficient| of (grad I . F); equals 0 iff F annihilates I exactly.
double annihilation_defect(const PolyMap& conserved, const PolyMap& field);

}  // namespace ssmx
