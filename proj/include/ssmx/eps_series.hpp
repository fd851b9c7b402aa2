#pragma once

#include <algorithm>
#include <vector>

#include "ssmx/util.hpp"

namespace ssmx {

// Truncated power series in the perturbation parameter. All arithmetic
// truncates at the common declared order; coefficient type U is double,
// Complex, or any ring with +,-,* and construction from 0.0.
template <typename U>
class EpsSeries {
 public:
  EpsSeries() : c_(1, U(0.0)) {}
  explicit EpsSeries(int order) : c_(order + 1, U(0.0)) {}
  EpsSeries(int order, const U& constant) : c_(order + 1, U(0.0)) { c_[0] = constant; }

  static EpsSeries constant(int order, const U& v) { return EpsSeries(order, v); }
  static EpsSeries eps(int order) {
    require(order >= 1, "EpsSeries: eps() needs order >= 1");
    EpsSeries s(order);
    s.c_[1] = U(1.0);
    return s;
  }

  int order() const { return static_cast<int>(c_.size()) - 1; }
  const U& operator[](int k) const { return c_[k]; }
  U& operator[](int k) { return c_[k]; }
  const std::vector<U>& coeffs() const { return c_; }

  EpsSeries operator+(const EpsSeries& o) const {
    EpsSeries r(common(o));
    for (int k = 0; k <= r.order(); ++k) r.c_[k] = at(k) + o.at(k);
    return r;
  }
  EpsSeries operator-(const EpsSeries& o) const {
    EpsSeries r(common(o));
    for (int k = 0; k <= r.order(); ++k) r.c_[k] = at(k) - o.at(k);
    return r;
  }
  EpsSeries operator*(const EpsSeries& o) const {
    EpsSeries r(common(o));
    for (int i = 0; i <= order() && i <= r.order(); ++i) {
      for (int j = 0; j <= o.order() && i + j <= r.order(); ++j) {
        r.c_[i + j] = r.c_[i + j] + c_[i] * o.c_[j];
      }
    }
    return r;
  }
  EpsSeries operator*(double s) const {
    EpsSeries r = *this;
    for (auto& v : r.c_) v = v * s;
    return r;
  }
  EpsSeries operator+(double s) const {
    EpsSeries r = *this;
    r.c_[0] = r.c_[0] + s;
    return r;
  }
  EpsSeries operator-(double s) const { return *this + (-s); }
  friend EpsSeries operator*(double s, const EpsSeries& e) { return e * s; }

  // Horner evaluation at a concrete parameter value.
  template <typename E>
  auto eval(const E& eps_value) const {
    auto acc = c_[order()] * E(1.0);
    for (int k = order() - 1; k >= 0; --k) acc = acc * eps_value + c_[k];
    return acc;
  }

 private:
  U at(int k) const { return k <= order() ? c_[k] : U(0.0); }
  int common(const EpsSeries& o) const { return std::min(order(), o.order()); }
  std::vector<U> c_;
};

}  // namespace ssmx
