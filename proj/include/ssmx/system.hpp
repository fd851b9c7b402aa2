#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ssmx/cheb.hpp"
#include "ssmx/eps_series.hpp"
#include "ssmx/integrate.hpp"
#include "ssmx/poly.hpp"
#include "ssmx/util.hpp"

namespace ssmx {

// Smooth positive factor s(E) multiplying the field after time
// renormalization; fitted so every unperturbed closed orbit has the same
// period. The reciprocal is fitted directly so series arguments need no
// division.
struct EnergyScale {
  bool active = false;
  double omega0 = 0.0;
  ChebFit scale_of_e;   // omega0 / Omega(E)
  ChebFit omega_of_e;   // Omega(E), kept for backbone reporting
};

// Vector field  F_eps(x) = L x + N(x) + sum_k eps^{k+1} C_k x + eps sum_k eps^k G_k(x),
// optionally multiplied by the renormalization factor s(I(x)).
//
// N vanishes to second order; every G_k has zero constant and linear part.
class SystemSpec {
 public:
  std::string name;
  int dim = 0;
  Eigen::MatrixXd L;
  PolyMap N;                          // conservative nonlinearity
  std::vector<Eigen::MatrixXd> C;     // damping matrices by eps power (C[0] is order eps)
  std::vector<PolyMap> G;             // perturbation nonlinearities by eps power
  std::optional<PolyMap> conserved;   // first integral of the eps=0 field
  bool hamiltonian = false;
  int degree_limit = 6;
  double eval_radius = 1e6;           // state box: ||Re x|| <= eval_radius
  double collar_halfwidth = 1e-2;     // complex states: ||Im x|| <= collar
  EnergyScale scale;

  void validate() const;

  template <typename T>
  VecX<T> field(const VecX<T>& x, const T& eps) const {
    check_box(x);
    VecX<T> out = base_field(x, eps);
    if (scale.active) {
      T e = conserved_value(x);
      out *= scale.scale_of_e.eval(e);
    }
    return out;
  }

  template <typename T>
  MatX<T> field_jacobian(const VecX<T>& x, const T& eps) const {
    check_box(x);
    MatX<T> jac = base_jacobian(x, eps);
    if (scale.active) {
      T e = conserved_value(x);
      T s = scale.scale_of_e.eval(e);
      T sp = scale_deriv().eval(e);
      VecX<T> b = base_field(x, eps);
      VecX<T> gi = conserved_gradient(x);
      jac = s * jac;
      jac.noalias() += sp * b * gi.transpose();
    }
    return jac;
  }

  // Directional second derivative D^2F(x)(u, .) including scale-factor terms.
  Eigen::MatrixXd field_djac(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                             double eps) const;

  // eps-series evaluation at a state given as truncated series per component.
  template <typename U>
  std::vector<EpsSeries<U>> field_series(const std::vector<EpsSeries<U>>& x) const;

  // Conserved quantity helpers (error if the model declares none).
  template <typename T>
  T conserved_value(const VecX<T>& x) const {
    require(conserved.has_value(), "SystemSpec: no conserved quantity declared");
    return conserved->eval(x)(0);
  }
  template <typename T>
  VecX<T> conserved_gradient(const VecX<T>& x) const {
    require(conserved.has_value(), "SystemSpec: no conserved quantity declared");
    return conserved_grad().eval(x);
  }

  const PolyMap& conserved_grad() const;
  const ChebFit& scale_deriv() const;

  // Structural gate: max |coefficient| of grad I . F0 (exact polynomial algebra).
  double annihilation_defect_value() const;

 private:
  template <typename T>
  VecX<T> base_field(const VecX<T>& x, const T& eps) const {
    VecX<T> out = L.cast<double>().template cast<T>() * x;
    if (!N.empty()) out += N.eval(x);
    T ep = eps;
    for (const auto& mat : C) {
      out += ep * (mat.template cast<T>() * x);
      ep = ep * eps;
    }
    ep = eps;
    for (const auto& g : G) {
      if (!g.empty()) out += ep * g.eval(x);
      ep = ep * eps;
    }
    return out;
  }

  template <typename T>
  MatX<T> base_jacobian(const VecX<T>& x, const T& eps) const {
    MatX<T> jac = L.template cast<T>();
    if (!N.empty()) jac += N.jacobian(x);
    T ep = eps;
    for (const auto& mat : C) {
      jac += ep * mat.template cast<T>();
      ep = ep * eps;
    }
    ep = eps;
    for (const auto& g : G) {
      if (!g.empty()) jac += ep * g.jacobian(x);
      ep = ep * eps;
    }
    return jac;
  }

  template <typename T>
  void check_box(const VecX<T>& x) const;

  mutable std::optional<PolyMap> conserved_grad_;
  mutable std::optional<ChebFit> scale_deriv_;
};

// Exact polynomial jet of the field at a point (orders 0..2).
struct Jet {
  Eigen::VectorXd base;
  int order = 0;
  Eigen::VectorXd value;
  Eigen::MatrixXd jac;
  std::vector<Eigen::MatrixXd> hess;  // per component, present when order >= 2
};

Jet eval_jet(const SystemSpec& spec, const Eigen::VectorXd& x, double eps, int order);

// Flow of the field from t0 to t1. When `variational` is set, also transports
// the fundamental matrix (initialized to the identity).
struct FlowResult {
  Eigen::VectorXd state;
  Eigen::MatrixXd fundamental;
};

FlowResult flow(const SystemSpec& spec, const Eigen::VectorXd& x0, double t0, double t1,
                double eps, double tol, bool variational);

VecX<Complex> flow_complex(const SystemSpec& spec, const VecX<Complex>& x0, double t0, double t1,
                           const Complex& eps, double tol);

// States at given sample times (exact landings), optionally with fundamental
// matrices at those times.
void flow_samples(const SystemSpec& spec, const Eigen::VectorXd& x0, double eps, double tol,
                  const std::vector<double>& times, std::vector<Eigen::VectorXd>* states,
                  std::vector<Eigen::MatrixXd>* fundamentals);

// Drift of the conserved quantity along a trajectory: I(x(t)) - I(x(0)).
double conserved_drift(const SystemSpec& spec, const Eigen::VectorXd& x0, double t, double eps,
                       double tol);

// Transverse second-derivative transport: d/dt T = DF T + D2F(Phi ., Phi .),
// realized by integrating state + first variational + directional second
// variational along direction columns. Returns D_u(Dphi) for each direction u
// in `dirs` at time t1.
std::vector<Eigen::MatrixXd> flow_second_variation(const SystemSpec& spec,
                                                   const Eigen::VectorXd& x0, double t0, double t1,
                                                   double eps, double tol,
                                                   const std::vector<Eigen::VectorXd>& dirs);

template <typename T>
void SystemSpec::check_box(const VecX<T>& x) const {
  double re2 = 0.0, im2 = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    if constexpr (ScalarTraits<T>::is_complex) {
      re2 += std::real(x(i)) * std::real(x(i));
      im2 += std::imag(x(i)) * std::imag(x(i));
    } else {
      re2 += x(i) * x(i);
    }
  }
  if (re2 > eval_radius * eval_radius) {
    fail("SystemSpec: state left the evaluation box (|x| = " + format_g17(std::sqrt(re2)) +
         " > " + format_g17(eval_radius) + ")");
  }
  if constexpr (ScalarTraits<T>::is_complex) {
    if (im2 > collar_halfwidth * collar_halfwidth * 1.0000001) {
      fail("SystemSpec: complex state left the analyticity collar (|Im x| = " +
           format_g17(std::sqrt(im2)) + " > " + format_g17(collar_halfwidth) + ")");
    }
  }
}

template <typename U>
std::vector<EpsSeries<U>> SystemSpec::field_series(const std::vector<EpsSeries<U>>& x) const {
  require(static_cast<int>(x.size()) == dim, "field_series: dimension mismatch");
  int ord = x[0].order();
  auto zero = EpsSeries<U>(ord);
  std::vector<EpsSeries<U>> out(dim, zero);
  // Linear part.
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      if (L(i, j) != 0.0) out[i] = out[i] + x[j] * L(i, j);
    }
  }
  if (!N.empty()) {
    auto nv = N.eval_series(x);
    for (int i = 0; i < dim; ++i) out[i] = out[i] + nv[i];
  }
  auto eps = EpsSeries<U>::eps(std::max(1, ord));
  auto ep = eps;
  for (const auto& mat : C) {
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        if (mat(i, j) != 0.0) out[i] = out[i] + ep * x[j] * mat(i, j);
      }
    }
    ep = ep * eps;
  }
  ep = eps;
  for (const auto& g : G) {
    if (!g.empty()) {
      auto gv = g.eval_series(x);
      for (int i = 0; i < dim; ++i) out[i] = out[i] + ep * gv[i];
    }
    ep = ep * eps;
  }
  if (scale.active) {
    require(conserved.has_value(), "field_series: scale without conserved quantity");
    auto e = conserved->eval_series(x)[0];
    auto s = scale.scale_of_e.eval(e);
    for (int i = 0; i < dim; ++i) out[i] = s * out[i];
  }
  return out;
}

}  // namespace ssmx
