#include "ssmx/normal_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "ssmx/util.hpp"

namespace ssmx {

namespace {

using ScalarPoly = std::map<MultiIndex, Complex>;
using VecPoly = std::vector<ScalarPoly>;

int total_degree(const MultiIndex& a) {
  int t = 0;
  for (auto v : a) t += v;
  return t;
}

void accumulate(ScalarPoly& p, const MultiIndex& a, const Complex& c) {
  auto it = p.find(a);
  if (it == p.end()) {
    p.emplace(a, c);
  } else {
    it->second += c;
  }
}

ScalarPoly poly_mul(const ScalarPoly& a, const ScalarPoly& b, int trunc) {
  ScalarPoly r;
  for (const auto& [ea, ca] : a) {
    int da = total_degree(ea);
    for (const auto& [eb, cb] : b) {
      if (da + total_degree(eb) > trunc) continue;
      MultiIndex e(ea.size());
      for (size_t j = 0; j < e.size(); ++j) e[j] = static_cast<std::uint8_t>(ea[j] + eb[j]);
      accumulate(r, e, ca * cb);
    }
  }
  return r;
}

void poly_axpy(ScalarPoly& p, const ScalarPoly& q, const Complex& c) {
  for (const auto& [e, v] : q) accumulate(p, e, c * v);
}

ScalarPoly poly_diff(const ScalarPoly& p, int j) {
  ScalarPoly r;
  for (const auto& [e, c] : p) {
    if (e[j] == 0) continue;
    MultiIndex d = e;
    d[j] -= 1;
    accumulate(r, d, c * static_cast<double>(e[j]));
  }
  return r;
}

void poly_prune(ScalarPoly& p, double tol) {
  for (auto it = p.begin(); it != p.end();) {
    it = std::abs(it->second) <= tol ? p.erase(it) : std::next(it);
  }
}

// Substitute sub[j] for variable j, truncating at total degree trunc.
ScalarPoly poly_subst(const ScalarPoly& p, const VecPoly& sub, int nvars, int trunc) {
  std::vector<std::vector<ScalarPoly>> powers(nvars);
  ScalarPoly unit;
  unit.emplace(MultiIndex(nvars, 0), Complex(1.0, 0.0));
  for (int j = 0; j < nvars; ++j) powers[j].push_back(unit);
  ScalarPoly r;
  for (const auto& [e, c] : p) {
    ScalarPoly term = unit;
    for (int j = 0; j < nvars; ++j) {
      while (static_cast<int>(powers[j].size()) <= e[j]) {
        powers[j].push_back(poly_mul(powers[j].back(), sub[j], trunc));
      }
      if (e[j] > 0) term = poly_mul(term, powers[j][e[j]], trunc);
    }
    poly_axpy(r, term, c);
  }
  poly_prune(r, 1e-300);
  return r;
}

VecPoly vec_subst(const VecPoly& rows, const VecPoly& sub, int nvars, int trunc) {
  VecPoly out(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) out[r] = poly_subst(rows[r], sub, nvars, trunc);
  return out;
}

// Solve (I + Dg) X = B for the vector polynomial X, where g has no constant
// or linear part; the Neumann iteration terminates because each pass raises
// the degree of the correction.
VecPoly solve_unit_jacobian(const VecPoly& g, const VecPoly& b, int nvars, int trunc) {
  VecPoly x = b;
  std::vector<std::vector<ScalarPoly>> dg(g.size(), std::vector<ScalarPoly>(nvars));
  for (size_t r = 0; r < g.size(); ++r) {
    for (int j = 0; j < nvars; ++j) dg[r][j] = poly_diff(g[r], j);
  }
  for (int pass = 0; pass < trunc; ++pass) {
    VecPoly nx = b;
    for (size_t r = 0; r < g.size(); ++r) {
      for (int j = 0; j < nvars; ++j) {
        ScalarPoly prod = poly_mul(dg[r][j], x[j], trunc);
        poly_axpy(nx[r], prod, Complex(-1.0, 0.0));
      }
    }
    x = std::move(nx);
  }
  for (auto& row : x) poly_prune(row, 1e-300);
  return x;
}

// Deterministic normalization of a complex eigenvector, matching the
// convention used by the spectral module.
void normalize_vector(Eigen::VectorXcd& v) {
  Complex s = (v.transpose() * v)(0, 0);
  double phase = 0.5 * std::atan2(s.imag(), s.real());
  v *= std::exp(Complex(0.0, -phase));
  s = (v.transpose() * v)(0, 0);
  if (s.real() < 0.0) v *= Complex(0.0, 1.0);
  if (std::abs(v.real().norm()) < 1e-12) v *= std::exp(Complex(0.0, -kPi / 4.0));
  v /= v.real().norm();
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v(i).real()) > 1e-8) {
      if (v(i).real() < 0.0) v = -v;
      break;
    }
  }
}

// Real rows from a w-coordinate vector polynomial: substitute w = S v and
// left-multiply by S^{-1}, then check the imaginary residue.
std::vector<std::map<MultiIndex, double>> to_real_rows(const VecPoly& rows_w, int n, int trunc,
                                                       double tol_imag) {
  VecPoly wsub(n);
  for (int p = 0; p < n / 2; ++p) {
    MultiIndex e0(n, 0), e1(n, 0);
    e0[2 * p] = 1;
    e1[2 * p + 1] = 1;
    wsub[2 * p].emplace(e0, Complex(1.0, 0.0));
    wsub[2 * p].emplace(e1, Complex(0.0, 1.0));
    wsub[2 * p + 1].emplace(e0, Complex(1.0, 0.0));
    wsub[2 * p + 1].emplace(e1, Complex(0.0, -1.0));
  }
  VecPoly in_v = vec_subst(rows_w, wsub, n, trunc);
  std::vector<std::map<MultiIndex, double>> out(n);
  double worst = 0.0;
  for (int p = 0; p < n / 2; ++p) {
    ScalarPoly even, odd;
    for (const auto& [e, c] : in_v[2 * p]) accumulate(even, e, 0.5 * c);
    for (const auto& [e, c] : in_v[2 * p + 1]) accumulate(even, e, 0.5 * c);
    for (const auto& [e, c] : in_v[2 * p]) accumulate(odd, e, Complex(0.0, -0.5) * c);
    for (const auto& [e, c] : in_v[2 * p + 1]) accumulate(odd, e, Complex(0.0, 0.5) * c);
    for (const auto& [e, c] : even) {
      worst = std::max(worst, std::abs(c.imag()));
      if (std::abs(c.real()) > 1e-14) out[2 * p][e] = c.real();
    }
    for (const auto& [e, c] : odd) {
      worst = std::max(worst, std::abs(c.imag()));
      if (std::abs(c.real()) > 1e-14) out[2 * p + 1][e] = c.real();
    }
  }
  require(worst <= tol_imag, "partial_normal_form: conjugation symmetry lost");
  return out;
}

PolyMap rows_to_polymap(const std::vector<std::map<MultiIndex, double>>& rows, int n, int min_deg,
                        int max_deg) {
  PolyMap out(n, n);
  std::map<MultiIndex, Eigen::VectorXd> acc;
  for (int r = 0; r < n; ++r) {
    for (const auto& [e, c] : rows[r]) {
      int deg = total_degree(e);
      if (deg < min_deg || deg > max_deg) continue;
      auto it = acc.find(e);
      if (it == acc.end()) it = acc.emplace(e, Eigen::VectorXd::Zero(n)).first;
      it->second(r) = c;
    }
  }
  for (const auto& [e, v] : acc) out.add_term(e, v);
  return out;
}

}  // namespace

NormalFormResult partial_normal_form(const SystemSpec& spec, int degree_d, double delta) {
  require(!spec.scale.active, "partial_normal_form: expects the unscaled system");
  require(degree_d >= 1, "partial_normal_form: degree must be positive");
  require(delta > 0.0, "partial_normal_form: disk radius must be positive");
  const int n = spec.dim;
  require(n % 2 == 0 && n >= 2, "partial_normal_form: even dimension expected");

  SpectralData sd = decompose(spec);
  NonresOptions nro;
  nro.d = degree_d;
  NonresReport nr = check_nonresonance(spec, sd, "kappa", nro);
  require(nr.pass, "partial_normal_form: nonresonance gap check failed: " + nr.detail);
  const double kappa = nr.margin;
  const double omega0 = sd.omega0;

  // Real eigen-block basis, tangent pair first; every pair obeys the
  // clockwise convention L [a b] = [a b] (mu J).
  Eigen::Matrix2d jrot;
  jrot << 0.0, 1.0, -1.0, 0.0;
  Eigen::MatrixXd basis(n, n);
  basis.col(0) = sd.plane.col(0);
  basis.col(1) = sd.plane.col(1);
  require((spec.L * sd.plane - sd.plane * (omega0 * jrot)).norm() <= 1e-8 * (1.0 + spec.L.norm()),
          "partial_normal_form: tangent plane convention violated");
  std::vector<double> freq = {omega0};
  {
    Eigen::EigenSolver<Eigen::MatrixXd> es(spec.L);
    require(es.info() == Eigen::Success, "partial_normal_form: eigensolve failed");
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) {
      if (es.eigenvalues()(i).imag() > 1e-12 &&
          std::abs(es.eigenvalues()(i).imag() - omega0) > 1e-9 * std::max(1.0, omega0)) {
        idx.push_back(i);
      }
    }
    require(static_cast<int>(idx.size()) == n / 2 - 1,
            "partial_normal_form: complement is not elliptic");
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      return es.eigenvalues()(a).imag() < es.eigenvalues()(b).imag();
    });
    for (size_t p = 0; p < idx.size(); ++p) {
      Eigen::VectorXcd v = es.eigenvectors().col(idx[p]);
      normalize_vector(v);
      basis.col(2 + 2 * p) = v.real();
      basis.col(3 + 2 * p) = v.imag();
      freq.push_back(es.eigenvalues()(idx[p]).imag());
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> blu(basis);
  require(blu.isInvertible(), "partial_normal_form: degenerate eigenbasis");
  Eigen::MatrixXd basis_inv = blu.inverse();

  // Complex eigencoordinates w_{2p} = u_{2p} + i u_{2p+1} (eigenvalue -i mu_p)
  // and the conjugate partner.
  std::vector<Complex> lam(n);
  for (int p = 0; p < n / 2; ++p) {
    lam[2 * p] = Complex(0.0, -freq[p]);
    lam[2 * p + 1] = Complex(0.0, freq[p]);
  }
  const int trunc = degree_d + std::max(2, spec.N.empty() ? 2 : spec.N.degree());

  // Substitution x_old(w) = P S^{-1} w, entering every layer transform.
  VecPoly xsub(n);
  for (int j = 0; j < n; ++j) {
    for (int p = 0; p < n / 2; ++p) {
      MultiIndex e0(n, 0), e1(n, 0);
      e0[2 * p] = 1;
      e1[2 * p + 1] = 1;
      Complex c0 = 0.5 * Complex(basis(j, 2 * p), 0.0) +
                   Complex(0.0, -0.5) * Complex(basis(j, 2 * p + 1), 0.0);
      Complex c1 = 0.5 * Complex(basis(j, 2 * p), 0.0) +
                   Complex(0.0, 0.5) * Complex(basis(j, 2 * p + 1), 0.0);
      if (std::abs(c0) > 0.0) accumulate(xsub[j], e0, c0);
      if (std::abs(c1) > 0.0) accumulate(xsub[j], e1, c1);
    }
  }
  // Left factor S P^{-1} mapping old rows to w rows.
  Eigen::MatrixXcd left(n, n);
  for (int p = 0; p < n / 2; ++p) {
    left.row(2 * p) =
        basis_inv.row(2 * p).cast<Complex>() + Complex(0.0, 1.0) * basis_inv.row(2 * p + 1);
    left.row(2 * p + 1) =
        basis_inv.row(2 * p).cast<Complex>() - Complex(0.0, 1.0) * basis_inv.row(2 * p + 1);
  }
  auto layer_to_w = [&](const Eigen::MatrixXd& cmat, const PolyMap& gmap) {
    VecPoly rows_old(n);
    if (cmat.size() > 0) {
      for (int r = 0; r < n; ++r) {
        for (int j = 0; j < n; ++j) {
          if (cmat(r, j) == 0.0) continue;
          MultiIndex e(n, 0);
          e[j] = 1;
          accumulate(rows_old[r], e, Complex(cmat(r, j), 0.0));
        }
      }
    }
    if (!gmap.empty()) {
      for (const auto& [e, coef] : gmap.terms()) {
        for (int r = 0; r < n; ++r) {
          if (coef(r) != 0.0) accumulate(rows_old[r], e, Complex(coef(r), 0.0));
        }
      }
    }
    VecPoly in_w = vec_subst(rows_old, xsub, n, trunc);
    VecPoly out(n);
    for (int r = 0; r < n; ++r) {
      for (int j = 0; j < n; ++j) {
        if (std::abs(left(r, j)) > 0.0) poly_axpy(out[r], in_w[j], left(r, j));
      }
      poly_prune(out[r], 1e-300);
    }
    return out;
  };

  // Conservative layer in w coordinates, linear part removed.
  VecPoly wfield = layer_to_w(spec.L, spec.N);
  for (int r = 0; r < n; ++r) {
    MultiIndex e(n, 0);
    e[r] = 1;
    accumulate(wfield[r], e, -lam[r]);
    poly_prune(wfield[r], 1e-12);
  }

  // Degree-by-degree homological solves in the diagonal coordinates.
  double min_div = std::numeric_limits<double>::infinity();
  VecPoly identity_sub(n);
  for (int j = 0; j < n; ++j) {
    MultiIndex e(n, 0);
    e[j] = 1;
    identity_sub[j].emplace(e, Complex(1.0, 0.0));
  }
  VecPoly forward_w = identity_sub;
  VecPoly current = wfield;
  for (int m = 2; m <= degree_d; ++m) {
    VecPoly h(n);
    bool any = false;
    for (int r = 0; r < n; ++r) {
      for (const auto& [e, c] : current[r]) {
        if (total_degree(e) != m || std::abs(c) <= 1e-13) continue;
        int q = 0;
        for (int j = 2; j < n; ++j) q += e[j];
        if (q >= 2) continue;
        Complex div = -lam[r];
        for (int j = 0; j < n; ++j) div += static_cast<double>(e[j]) * lam[j];
        double ad = std::abs(div);
        if (ad <= 1e-9 * std::max(1.0, omega0)) {
          require(q == 1 || r < 2,
                  "partial_normal_form: resonant tangent forcing in a transverse component");
          continue;  // structural resonance, part of the normal structure
        }
        require(ad >= 0.5 * kappa, "partial_normal_form: small divisor below kappa/2");
        min_div = std::min(min_div, ad);
        accumulate(h[r], e, c / div);
        any = true;
      }
    }
    if (!any) continue;
    // u = v + h(v): new field solves (I + Dh) W_new = (Lam + W)(v + h(v)).
    VecPoly sub(n);
    for (int j = 0; j < n; ++j) {
      sub[j] = identity_sub[j];
      for (const auto& [e, c] : h[j]) accumulate(sub[j], e, c);
    }
    VecPoly rhs = vec_subst(current, sub, n, trunc);
    for (int r = 0; r < n; ++r) {
      poly_axpy(rhs[r], h[r], lam[r]);  // Lam (v + h) minus Lam v
      for (int j = 0; j < n; ++j) {
        // minus Dh Lam v, the angular transport of the correction
        ScalarPoly dj = poly_diff(h[r], j);
        for (const auto& [e, c] : dj) {
          MultiIndex e2 = e;
          e2[j] += 1;
          accumulate(rhs[r], e2, -lam[j] * c);
        }
      }
    }
    current = solve_unit_jacobian(h, rhs, n, trunc);
    for (auto& row : current) poly_prune(row, 1e-13);
    forward_w = vec_subst(forward_w, sub, n, trunc);
  }

  // Single-shot transform of every layer through the composed map.
  VecPoly gpart(n);
  for (int j = 0; j < n; ++j) {
    gpart[j] = forward_w[j];
    MultiIndex e(n, 0);
    e[j] = 1;
    accumulate(gpart[j], e, Complex(-1.0, 0.0));
    poly_prune(gpart[j], 1e-300);
  }
  auto push_layer = [&](const Eigen::MatrixXd& cmat, const PolyMap& gmap) {
    VecPoly in_w = layer_to_w(cmat, gmap);
    VecPoly composed = vec_subst(in_w, forward_w, n, trunc);
    VecPoly out = solve_unit_jacobian(gpart, composed, n, trunc);
    for (auto& row : out) poly_prune(row, 1e-13);
    return out;
  };

  NormalFormResult res;
  res.record.basis = basis;
  res.record.basis_inv = basis_inv;
  res.record.kappa = kappa;
  res.record.min_divisor = std::isfinite(min_div) ? min_div : 0.0;

  SystemSpec& out = res.spec;
  out = spec;
  out.name = spec.name + "_normal";
  out.L = Eigen::MatrixXd::Zero(n, n);
  for (int p = 0; p < n / 2; ++p) out.L.block(2 * p, 2 * p, 2, 2) = freq[p] * jrot;

  {
    VecPoly full = push_layer(spec.L, spec.N);
    auto rows = to_real_rows(full, n, trunc, 1e-9);
    // Verify the linear part reproduces the block frequencies, then drop it.
    for (int r = 0; r < n; ++r) {
      for (int j = 0; j < n; ++j) {
        MultiIndex e(n, 0);
        e[j] = 1;
        auto it = rows[r].find(e);
        double got = it == rows[r].end() ? 0.0 : it->second;
        require(std::abs(got - out.L(r, j)) <= 1e-8 * std::max(1.0, omega0),
                "partial_normal_form: linear part drifted");
      }
    }
    out.N = rows_to_polymap(rows, n, 2, trunc);
  }

  const size_t nlay = std::max(spec.C.size(), spec.G.size());
  out.C.assign(nlay, Eigen::MatrixXd::Zero(n, n));
  out.G.assign(nlay, PolyMap(n, n));
  for (size_t m = 0; m < nlay; ++m) {
    Eigen::MatrixXd cmat =
        m < spec.C.size() ? spec.C[m] : Eigen::MatrixXd::Zero(n, n).eval();
    PolyMap gmap = m < spec.G.size() ? spec.G[m] : PolyMap(n, n);
    VecPoly layer = push_layer(cmat, gmap);
    auto rows = to_real_rows(layer, n, trunc, 1e-9);
    Eigen::MatrixXd clin = Eigen::MatrixXd::Zero(n, n);
    for (int r = 0; r < n; ++r) {
      for (int j = 0; j < n; ++j) {
        MultiIndex e(n, 0);
        e[j] = 1;
        auto it = rows[r].find(e);
        if (it != rows[r].end()) clin(r, j) = it->second;
      }
    }
    out.C[m] = clin;
    out.G[m] = rows_to_polymap(rows, n, 2, trunc);
  }

  // Scalar invariants ride along by plain composition with the full map.
  auto push_scalar = [&](const PolyMap& f) {
    VecPoly row(1);
    for (const auto& [e, coef] : f.terms()) {
      if (coef(0) != 0.0) accumulate(row[0], e, Complex(coef(0), 0.0));
    }
    int strunc = trunc + f.degree();
    VecPoly in_w = vec_subst(row, xsub, n, strunc);
    VecPoly composed = vec_subst(in_w, forward_w, n, strunc);
    // Back to real variables.
    VecPoly wsub(n);
    for (int p = 0; p < n / 2; ++p) {
      MultiIndex e0(n, 0), e1(n, 0);
      e0[2 * p] = 1;
      e1[2 * p + 1] = 1;
      wsub[2 * p].emplace(e0, Complex(1.0, 0.0));
      wsub[2 * p].emplace(e1, Complex(0.0, 1.0));
      wsub[2 * p + 1].emplace(e0, Complex(1.0, 0.0));
      wsub[2 * p + 1].emplace(e1, Complex(0.0, -1.0));
    }
    VecPoly in_v = vec_subst(composed, wsub, n, strunc);
    PolyMap pm(n, 1);
    for (const auto& [e, c] : in_v[0]) {
      require(std::abs(c.imag()) <= 1e-9, "partial_normal_form: scalar transport lost reality");
      if (std::abs(c.real()) > 1e-14) {
        Eigen::VectorXd v(1);
        v(0) = c.real();
        pm.add_term(e, v);
      }
    }
    return pm;
  };
  if (spec.conserved.has_value()) out.conserved = push_scalar(*spec.conserved);
  out.hamiltonian = spec.hamiltonian;

  // Real form of the near-identity map and its invertibility on the disk.
  {
    auto rows = to_real_rows(forward_w, n, trunc, 1e-9);
    res.record.forward = rows_to_polymap(rows, n, 1, trunc);
  }
  double det_min = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(20240817u);
  auto unit = [&]() {
    Eigen::VectorXd v(n);
    for (int j = 0; j < n; ++j) {
      double a = static_cast<double>(rng() >> 11) * 0x1p-53;
      double b = static_cast<double>(rng() >> 11) * 0x1p-53;
      v(j) = std::sqrt(-2.0 * std::log(a + 1e-300)) * std::cos(2.0 * kPi * b);
    }
    v.normalize();
    return v;
  };
  for (double frac : {0.5, 0.8, 1.0}) {
    for (int k = 0; k < 32; ++k) {
      Eigen::VectorXd v = frac * delta * unit();
      Eigen::MatrixXd jac = res.record.forward.jacobian(v);
      det_min = std::min(det_min, std::abs(jac.determinant()));
    }
  }
  res.record.det_bound = det_min;
  require(det_min >= 0.5, "partial_normal_form: transform loses invertibility on the disk");
  return res;
}

}  // namespace ssmx
