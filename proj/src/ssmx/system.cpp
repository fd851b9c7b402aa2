#include "ssmx/system.hpp"

#include <cmath>

namespace ssmx {

void SystemSpec::validate() const {
  require(dim >= 2, "SystemSpec: dimension must be at least 2");
  require(L.rows() == dim && L.cols() == dim, "SystemSpec: L has wrong shape");
  if (!N.empty()) {
    require(N.n_in() == dim && N.n_out() == dim, "SystemSpec: N has wrong shape");
    require(N.max_abs_coef_below_degree(2) == 0.0,
            "SystemSpec: N must vanish to second order at the origin");
    require(N.degree() <= degree_limit, "SystemSpec: N exceeds the degree limit");
  }
  for (const auto& mat : C) {
    require(mat.rows() == dim && mat.cols() == dim, "SystemSpec: damping matrix has wrong shape");
  }
  for (const auto& g : G) {
    if (g.empty()) continue;
    require(g.n_in() == dim && g.n_out() == dim, "SystemSpec: G term has wrong shape");
    require(g.max_abs_coef_below_degree(2) == 0.0,
            "SystemSpec: G terms must vanish to second order at the origin");
    require(g.degree() <= degree_limit, "SystemSpec: G exceeds the degree limit");
  }
  if (conserved.has_value()) {
    require(conserved->n_in() == dim && conserved->n_out() == 1,
            "SystemSpec: conserved quantity must be a scalar function of the state");
  }
  require(eval_radius > 0 && collar_halfwidth > 0, "SystemSpec: invalid box sizes");
}

const PolyMap& SystemSpec::conserved_grad() const {
  require(conserved.has_value(), "SystemSpec: no conserved quantity declared");
  if (!conserved_grad_.has_value()) conserved_grad_ = conserved->gradient();
  return *conserved_grad_;
}

const ChebFit& SystemSpec::scale_deriv() const {
  require(scale.active, "SystemSpec: no renormalization factor attached");
  if (!scale_deriv_.has_value()) scale_deriv_ = scale.scale_of_e.derivative();
  return *scale_deriv_;
}

double SystemSpec::annihilation_defect_value() const {
  require(conserved.has_value(), "SystemSpec: no conserved quantity declared");
  PolyMap f0 = PolyMap::linear(L);
  if (!N.empty()) f0 = f0 + N;
  return annihilation_defect(*conserved, f0);
}

Eigen::MatrixXd SystemSpec::field_djac(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                       double eps) const {
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(dim, dim);
  if (!N.empty()) d2 = N.djac(x, u);
  double ep = eps;
  for (const auto& g : G) {
    if (!g.empty()) d2 += ep * g.djac(x, u);
    ep *= eps;
  }
  if (!scale.active) return d2;

  double e = conserved_value(x);
  double s = scale.scale_of_e.eval(e);
  double sp = scale_deriv().eval(e);
  double spp = scale_deriv().derivative().eval(e);
  Eigen::VectorXd b = base_field(x, eps);
  Eigen::MatrixXd db = base_jacobian(x, eps);
  Eigen::VectorXd gi = conserved_gradient(x);
  Eigen::MatrixXd hi = conserved_grad().jacobian(x);
  double giu = gi.dot(u);

  Eigen::MatrixXd out = s * d2 + (sp * giu) * db;
  out.noalias() += sp * (db * u) * gi.transpose();
  out.noalias() += b * (spp * giu * gi.transpose() + sp * (hi * u).transpose());
  return out;
}

Jet eval_jet(const SystemSpec& spec, const Eigen::VectorXd& x, double eps, int order) {
  require(order >= 0 && order <= 2, "eval_jet: order must be 0, 1, or 2");
  Jet jet;
  jet.base = x;
  jet.order = order;
  jet.value = spec.field(x, eps);
  if (order >= 1) jet.jac = spec.field_jacobian(x, eps);
  if (order >= 2) {
    jet.hess.resize(spec.dim);
    // Assemble per-component Hessians from directional second derivatives
    // along coordinate directions (exact for polynomial fields).
    std::vector<Eigen::MatrixXd> cols(spec.dim);
    for (int j = 0; j < spec.dim; ++j) {
      cols[j] = spec.field_djac(x, Eigen::VectorXd::Unit(spec.dim, j), eps);
    }
    for (int a = 0; a < spec.dim; ++a) {
      Eigen::MatrixXd h(spec.dim, spec.dim);
      for (int j = 0; j < spec.dim; ++j) h.row(j) = cols[j].row(a);
      jet.hess[a] = 0.5 * (h + h.transpose());
    }
  }
  return jet;
}

namespace {

// Stacked right-hand side: state, optional fundamental matrix, optional
// directional second-variation matrices.
struct StackedRhs {
  const SystemSpec& spec;
  double eps;
  int n;
  bool variational;
  const std::vector<Eigen::VectorXd>* dirs = nullptr;

  Eigen::VectorXd operator()(double, const Eigen::VectorXd& y) const {
    int m = dirs ? static_cast<int>(dirs->size()) : 0;
    Eigen::VectorXd dy(y.size());
    Eigen::VectorXd x = y.head(n);
    dy.head(n) = spec.field(x, eps);
    if (!variational) return dy;
    Eigen::MatrixXd jac = spec.field_jacobian(x, eps);
    Eigen::Map<const Eigen::MatrixXd> phi(y.data() + n, n, n);
    Eigen::Map<Eigen::MatrixXd> dphi(dy.data() + n, n, n);
    dphi = jac * phi;
    for (int k = 0; k < m; ++k) {
      Eigen::Map<const Eigen::MatrixXd> w(y.data() + n + (1 + k) * n * n, n, n);
      Eigen::Map<Eigen::MatrixXd> dw(dy.data() + n + (1 + k) * n * n, n, n);
      Eigen::VectorXd pu = phi * (*dirs)[k];
      dw = jac * w + spec.field_djac(x, pu, eps) * phi;
    }
    return dy;
  }
};

Eigen::VectorXd pack_initial(const Eigen::VectorXd& x0, int n, bool variational, int m) {
  if (!variational) return x0;
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(n + (1 + m) * n * n);
  y0.head(n) = x0;
  Eigen::Map<Eigen::MatrixXd>(y0.data() + n, n, n).setIdentity();
  return y0;
}

}  // namespace

FlowResult flow(const SystemSpec& spec, const Eigen::VectorXd& x0, double t0, double t1,
                double eps, double tol, bool variational) {
  int n = spec.dim;
  StackedRhs rhs{spec, eps, n, variational, nullptr};
  IntOpts opts;
  opts.tol = tol;
  Eigen::VectorXd y1 = integrate_to(rhs, t0, t1, pack_initial(x0, n, variational, 0), opts);
  FlowResult out;
  out.state = y1.head(n);
  if (variational) out.fundamental = Eigen::Map<const Eigen::MatrixXd>(y1.data() + n, n, n);
  return out;
}

VecX<Complex> flow_complex(const SystemSpec& spec, const VecX<Complex>& x0, double t0, double t1,
                           const Complex& eps, double tol) {
  auto rhs = [&](double, const VecX<Complex>& x) { return spec.field(x, eps); };
  IntOpts opts;
  opts.tol = tol;
  return integrate_to(rhs, t0, t1, x0, opts);
}

void flow_samples(const SystemSpec& spec, const Eigen::VectorXd& x0, double eps, double tol,
                  const std::vector<double>& times, std::vector<Eigen::VectorXd>* states,
                  std::vector<Eigen::MatrixXd>* fundamentals) {
  int n = spec.dim;
  bool variational = fundamentals != nullptr;
  StackedRhs rhs{spec, eps, n, variational, nullptr};
  IntOpts opts;
  opts.tol = tol;
  auto stacked = integrate_samples(rhs, 0.0, pack_initial(x0, n, variational, 0), times, opts);
  if (states) {
    states->clear();
    for (const auto& y : stacked) states->push_back(y.head(n));
  }
  if (fundamentals) {
    fundamentals->clear();
    for (const auto& y : stacked) {
      fundamentals->push_back(Eigen::Map<const Eigen::MatrixXd>(y.data() + n, n, n));
    }
  }
}

double conserved_drift(const SystemSpec& spec, const Eigen::VectorXd& x0, double t, double eps,
                       double tol) {
  auto rhs = [&](double, const Eigen::VectorXd& x) { return spec.field(x, eps); };
  IntOpts opts;
  opts.tol = tol;
  Eigen::VectorXd xt = integrate_to(rhs, 0.0, t, x0, opts);
  return spec.conserved_value(xt) - spec.conserved_value(x0);
}

std::vector<Eigen::MatrixXd> flow_second_variation(const SystemSpec& spec,
                                                   const Eigen::VectorXd& x0, double t0, double t1,
                                                   double eps, double tol,
                                                   const std::vector<Eigen::VectorXd>& dirs) {
  int n = spec.dim;
  int m = static_cast<int>(dirs.size());
  StackedRhs rhs{spec, eps, n, true, &dirs};
  IntOpts opts;
  opts.tol = tol;
  Eigen::VectorXd y1 = integrate_to(rhs, t0, t1, pack_initial(x0, n, true, m), opts);
  std::vector<Eigen::MatrixXd> out(m);
  for (int k = 0; k < m; ++k) {
    out[k] = Eigen::Map<const Eigen::MatrixXd>(y1.data() + n + (1 + k) * n * n, n, n);
  }
  return out;
}

}  // namespace ssmx
