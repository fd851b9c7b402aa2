#include "ssmx/poly.hpp"

#include <cmath>

namespace ssmx {

PolyMap PolyMap::identity(int n) {
  PolyMap p(n, n);
  for (int i = 0; i < n; ++i) {
    MultiIndex a(n, 0);
    a[i] = 1;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    c(i) = 1.0;
    p.add_term(a, c);
  }
  return p;
}

PolyMap PolyMap::linear(const Eigen::MatrixXd& m) {
  PolyMap p(static_cast<int>(m.cols()), static_cast<int>(m.rows()));
  for (int v = 0; v < m.cols(); ++v) {
    MultiIndex a(m.cols(), 0);
    a[v] = 1;
    p.add_term(a, m.col(v));
  }
  return p;
}

int PolyMap::degree() const {
  int d = 0;
  for (const auto& [a, c] : terms_) d = std::max(d, mi_degree(a));
  return d;
}

void PolyMap::add_term(const MultiIndex& exp, const Eigen::VectorXd& coef) {
  require(static_cast<int>(exp.size()) == n_in_, "PolyMap::add_term: exponent arity mismatch");
  require(coef.size() == n_out_, "PolyMap::add_term: coefficient arity mismatch");
  auto it = terms_.find(exp);
  if (it == terms_.end()) {
    if (coef.cwiseAbs().maxCoeff() == 0.0) return;
    terms_.emplace(exp, coef);
  } else {
    it->second += coef;
    if (it->second.cwiseAbs().maxCoeff() == 0.0) terms_.erase(it);
  }
}

void PolyMap::add_term(const std::vector<int>& exp, const Eigen::VectorXd& coef) {
  MultiIndex a(exp.size());
  for (std::size_t i = 0; i < exp.size(); ++i) {
    require(exp[i] >= 0 && exp[i] < 256, "PolyMap::add_term: exponent out of range");
    a[i] = static_cast<std::uint8_t>(exp[i]);
  }
  add_term(a, coef);
}

Eigen::VectorXd PolyMap::coefficient(const MultiIndex& exp) const {
  auto it = terms_.find(exp);
  if (it == terms_.end()) return Eigen::VectorXd::Zero(n_out_);
  return it->second;
}

void PolyMap::prune(double tol) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (it->second.cwiseAbs().maxCoeff() <= tol) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
}

double PolyMap::max_abs_coef_below_degree(int deg) const {
  double worst = 0.0;
  for (const auto& [a, c] : terms_) {
    if (mi_degree(a) < deg) worst = std::max(worst, c.cwiseAbs().maxCoeff());
  }
  return worst;
}

double PolyMap::max_abs_coef() const {
  double worst = 0.0;
  for (const auto& [a, c] : terms_) worst = std::max(worst, c.cwiseAbs().maxCoeff());
  return worst;
}

Eigen::MatrixXd PolyMap::hessian(int comp, const Eigen::VectorXd& x) const {
  require(comp >= 0 && comp < n_out_, "PolyMap::hessian: bad component");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_in_, n_in_);
  MultiIndex b;
  for (const auto& [a, c] : terms_) {
    if (c(comp) == 0.0) continue;
    for (int v = 0; v < n_in_; ++v) {
      for (int w = v; w < n_in_; ++w) {
        int factor = (v == w) ? a[v] * (a[v] - 1) : a[v] * a[w];
        if (factor == 0) continue;
        b = a;
        b[v] -= 1;
        b[w] -= 1;
        double mono = 1.0;
        for (int q = 0; q < n_in_; ++q) {
          for (int k = 0; k < b[q]; ++k) mono *= x(q);
        }
        double val = c(comp) * factor * mono;
        h(v, w) += val;
        if (w != v) h(w, v) += val;
      }
    }
  }
  return h;
}

PolyMap PolyMap::operator+(const PolyMap& o) const {
  require(n_in_ == o.n_in_ && n_out_ == o.n_out_, "PolyMap::+: shape mismatch");
  PolyMap r = *this;
  for (const auto& [a, c] : o.terms_) r.add_term(a, c);
  return r;
}

PolyMap PolyMap::operator-(const PolyMap& o) const {
  require(n_in_ == o.n_in_ && n_out_ == o.n_out_, "PolyMap::-: shape mismatch");
  PolyMap r = *this;
  for (const auto& [a, c] : o.terms_) r.add_term(a, Eigen::VectorXd(-c));
  return r;
}

PolyMap PolyMap::scaled(double s) const {
  PolyMap r(n_in_, n_out_);
  if (s == 0.0) return r;
  for (const auto& [a, c] : terms_) r.terms_.emplace(a, c * s);
  return r;
}

PolyMap PolyMap::truncated(int max_degree) const {
  PolyMap r(n_in_, n_out_);
  for (const auto& [a, c] : terms_) {
    if (mi_degree(a) <= max_degree) r.terms_.emplace(a, c);
  }
  return r;
}

PolyMap PolyMap::component(int i) const {
  require(i >= 0 && i < n_out_, "PolyMap::component: bad index");
  PolyMap r(n_in_, 1);
  for (const auto& [a, c] : terms_) {
    if (c(i) != 0.0) {
      Eigen::VectorXd v(1);
      v(0) = c(i);
      r.terms_.emplace(a, v);
    }
  }
  return r;
}

PolyMap PolyMap::scalar_mul(const PolyMap& o) const {
  require(n_out_ == 1 && o.n_out_ == 1 && n_in_ == o.n_in_, "PolyMap::scalar_mul: scalar maps only");
  PolyMap r(n_in_, 1);
  for (const auto& [a, ca] : terms_) {
    for (const auto& [b, cb] : o.terms_) {
      MultiIndex s(n_in_);
      for (int v = 0; v < n_in_; ++v) {
        int e = a[v] + b[v];
        require(e < 256, "PolyMap::scalar_mul: exponent overflow");
        s[v] = static_cast<std::uint8_t>(e);
      }
      Eigen::VectorXd c(1);
      c(0) = ca(0) * cb(0);
      r.add_term(s, c);
    }
  }
  return r;
}

PolyMap PolyMap::gradient() const {
  require(n_out_ == 1, "PolyMap::gradient: scalar maps only");
  PolyMap g(n_in_, n_in_);
  for (const auto& [a, c] : terms_) {
    for (int v = 0; v < n_in_; ++v) {
      if (a[v] == 0) continue;
      MultiIndex b = a;
      b[v] -= 1;
      Eigen::VectorXd col = Eigen::VectorXd::Zero(n_in_);
      col(v) = c(0) * a[v];
      g.add_term(b, col);
    }
  }
  return g;
}

PolyMap PolyMap::compose(const PolyMap& inner, int max_degree) const {
  require(inner.n_out_ == n_in_, "PolyMap::compose: shape mismatch");
  int m = inner.n_in_;
  // Scalar components of the inner map, reused across terms.
  std::vector<PolyMap> comp(n_in_);
  for (int i = 0; i < n_in_; ++i) comp[i] = inner.component(i);

  PolyMap one(m, 1);
  {
    Eigen::VectorXd c(1);
    c(0) = 1.0;
    one.add_term(MultiIndex(m, 0), c);
  }

  PolyMap result(m, n_out_);
  for (const auto& [a, c] : terms_) {
    PolyMap mono = one;
    for (int v = 0; v < n_in_; ++v) {
      for (int k = 0; k < a[v]; ++k) {
        mono = mono.scalar_mul(comp[v]).truncated(max_degree);
        if (mono.empty()) break;
      }
      if (mono.empty()) break;
    }
    for (const auto& [b, mc] : mono.terms_) {
      result.add_term(b, Eigen::VectorXd(c * mc(0)));
    }
  }
  return result;
}

PolyMap PolyMap::invert_near_identity(const PolyMap& h, int max_degree) {
  require(h.n_in() == h.n_out(), "invert_near_identity: square maps only");
  int n = h.n_in();
  PolyMap id = PolyMap::identity(n);
  PolyMap tail = h - id;  // must vanish to second order
  require(tail.max_abs_coef_below_degree(2) == 0.0,
          "invert_near_identity: map must be identity plus higher order terms");
  PolyMap g = id;
  for (int it = 0; it < max_degree; ++it) {
    g = (id - tail.compose(g, max_degree)).truncated(max_degree);
  }
  return g;
}

double annihilation_defect(const PolyMap& conserved, const PolyMap& field) {
  require(conserved.n_out() == 1, "annihilation_defect: conserved quantity must be scalar");
  require(conserved.n_in() == field.n_in() && field.n_out() == field.n_in(),
          "annihilation_defect: shape mismatch");
  PolyMap grad = conserved.gradient();
  int n = field.n_in();
  PolyMap acc(n, 1);
  for (int i = 0; i < n; ++i) {
    acc = acc + grad.component(i).scalar_mul(field.component(i));
  }
  return acc.max_abs_coef();
}

}  // namespace ssmx
