#include "ssmx/grid.hpp"

#include <algorithm>
#include <cmath>

namespace ssmx {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// i^p as a complex unit.
Complex ipow(int p) {
  switch (((p % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace

void fft_radix2(std::vector<Complex>& a, bool inverse) {
  const int n = static_cast<int>(a.size());
  require(is_pow2(n), "fft_radix2: length must be a power of two");
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * kPi / len;
    const Complex wl(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      Complex w(1.0, 0.0);
      for (int j = 0; j < len / 2; ++j) {
        Complex u = a[i + j];
        Complex v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    for (auto& v : a) v /= static_cast<double>(n);
  }
}

DiskGrid::DiskGrid(double delta_, int nrad_, int nmodes_, int nsamples_)
    : delta(delta_), nrad(nrad_), nmodes(nmodes_), nsamples(nsamples_) {
  require(delta > 0.0, "DiskGrid: delta must be positive");
  require(nrad >= 8, "DiskGrid: need at least 8 radial nodes");
  require(is_pow2(nmodes) && nmodes >= 16, "DiskGrid: nmodes must be a power of two >= 16");
  require(is_pow2(nsamples) && nsamples >= 2 * nmodes,
          "DiskGrid: nsamples must be a power of two >= 2 nmodes");
  const double rmax = 1.05 * delta;
  smax = rmax * rmax;
  s = cheb_gauss_nodes(nrad, 0.0, smax);
  rho.resize(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) rho[j] = std::sqrt(s[j]);
  bary = BaryInterp(s);
}

std::vector<Complex> radial_taylor(const DiskGrid& grid, const std::vector<Complex>& vals,
                                   int qmax) {
  const int J = grid.nrad;
  require(static_cast<int>(vals.size()) == J, "radial_taylor: profile length mismatch");
  require(qmax >= 0 && qmax < J - 1, "radial_taylor: order out of range");

  // Chebyshev coefficients on [0, smax] by Gauss-node orthogonality.
  std::vector<Complex> a(J, Complex(0.0, 0.0));
  std::vector<double> u(J);
  for (int j = 0; j < J; ++j) u[j] = 2.0 * grid.s[j] / grid.smax - 1.0;
  for (int j = 0; j < J; ++j) {
    double t0 = 1.0, t1 = u[j];
    a[0] += vals[j];
    if (J > 1) a[1] += vals[j] * t1;
    for (int m = 2; m < J; ++m) {
      const double t = 2.0 * u[j] * t1 - t0;
      a[m] += vals[j] * t;
      t0 = t1;
      t1 = t;
    }
  }
  a[0] /= static_cast<double>(J);
  for (int m = 1; m < J; ++m) a[m] *= 2.0 / J;

  double amax = 0.0;
  for (const auto& c : a) amax = std::max(amax, std::abs(c));
  std::vector<Complex> tay(qmax + 1, Complex(0.0, 0.0));
  if (amax == 0.0) return tay;
  // Coefficients at the noise floor carry no information but are amplified by
  // T_m^(q)(1) ~ m^(2q), so the series is chopped at the first run of two
  // sub-floor coefficients past qmax.
  const double floor_cut = 1e-14 * amax;

  // sigma = s / smax, T_m(2 sigma - 1); coefficient of sigma^q is
  // T_m^{(q)}(-1) 2^q / q! with T_m^{(q)}(-1) = (-1)^{m+q} prod_{j<q} (m^2-j^2)/(2j+1).
  int below = 0;
  for (int m = 0; m < J; ++m) {
    if (m > qmax && std::abs(a[m]) < floor_cut) {
      if (++below >= 2) break;
      continue;
    }
    below = 0;
    double deriv = 1.0;  // running product for T_m^{(q)}(1)
    double fact = 1.0;
    double pow2 = 1.0;
    for (int q = 0; q <= qmax; ++q) {
      if (q > 0) {
        deriv *= static_cast<double>(m * m - (q - 1) * (q - 1)) / (2.0 * (q - 1) + 1.0);
        fact *= q;
        pow2 *= 2.0;
      }
      if (q > m && deriv == 0.0) break;
      const double sign = ((m + q) % 2 == 0) ? 1.0 : -1.0;
      tay[q] += a[m] * (sign * deriv * pow2 / fact);
    }
  }
  double sp = 1.0;
  for (int q = 1; q <= qmax; ++q) {
    sp *= grid.smax;
    tay[q] /= sp;
  }
  return tay;
}

GridFunction::GridFunction(DiskGridPtr grid, int ncomp) : grid_(std::move(grid)), ncomp_(ncomp) {
  require(ncomp_ > 0, "GridFunction: need at least one component");
  modes_.assign(ncomp_, Eigen::MatrixXcd::Zero(grid_->nrad, grid_->nmodes));
}

int GridFunction::mode_number(int idx) const {
  return idx <= grid_->nmodes / 2 ? idx : idx - grid_->nmodes;
}

GridFunction GridFunction::from_flow_samples(DiskGridPtr grid,
                                             const std::vector<Eigen::MatrixXd>& samples,
                                             double theta0) {
  require(!samples.empty(), "from_flow_samples: no components");
  GridFunction f(grid, static_cast<int>(samples.size()));
  const int J = grid->nrad, M = grid->nsamples, kmax = grid->kmax();
  std::vector<Complex> row(M);
  for (int c = 0; c < f.ncomp_; ++c) {
    require(samples[c].rows() == J && samples[c].cols() == M,
            "from_flow_samples: sample matrix has wrong shape");
    for (int j = 0; j < J; ++j) {
      for (int i = 0; i < M; ++i) row[i] = Complex(samples[c](j, i), 0.0);
      fft_radix2(row, false);
      for (int k = -kmax; k <= kmax; ++k) {
        const Complex phase(std::cos(-k * theta0), std::sin(-k * theta0));
        const Complex fk = phase * row[((M - k) % M + M) % M] / static_cast<double>(M);
        f.modes_[c](j, k >= 0 ? k : grid->nmodes + k) = fk;
      }
    }
  }
  f.symmetrize();
  return f;
}

GridFunction GridFunction::from_point_values(
    DiskGridPtr grid, const std::function<Eigen::VectorXd(double, double)>& fn, int ncomp) {
  const int J = grid->nrad, M = grid->nsamples;
  std::vector<Eigen::MatrixXcd> vals(ncomp, Eigen::MatrixXcd::Zero(J, M));
  for (int j = 0; j < J; ++j) {
    for (int i = 0; i < M; ++i) {
      const double th = 2.0 * kPi * i / M;
      const Eigen::VectorXd v = fn(grid->rho[j] * std::cos(th), grid->rho[j] * std::sin(th));
      require(v.size() == ncomp, "from_point_values: component count mismatch");
      for (int c = 0; c < ncomp; ++c) vals[c](j, i) = v(c);
    }
  }
  GridFunction f = from_value_matrices(grid, vals);
  f.symmetrize();
  return f;
}

GridFunction GridFunction::from_value_matrices(DiskGridPtr grid,
                                               const std::vector<Eigen::MatrixXcd>& vals) {
  require(!vals.empty(), "from_value_matrices: no components");
  GridFunction f(grid, static_cast<int>(vals.size()));
  const int J = grid->nrad, M = grid->nsamples, kmax = grid->kmax();
  std::vector<Complex> row(M);
  for (int c = 0; c < f.ncomp_; ++c) {
    require(vals[c].rows() == J && vals[c].cols() == M,
            "from_value_matrices: value matrix has wrong shape");
    for (int j = 0; j < J; ++j) {
      for (int i = 0; i < M; ++i) row[i] = vals[c](j, i);
      fft_radix2(row, false);
      for (int k = -kmax; k <= kmax; ++k)
        f.modes_[c](j, k >= 0 ? k : grid->nmodes + k) = row[(k % M + M) % M] / static_cast<double>(M);
    }
  }
  return f;
}

void GridFunction::symmetrize() {
  const int half = grid_->nmodes / 2;
  for (int c = 0; c < ncomp_; ++c) {
    auto& m = modes_[c];
    m.col(0) = m.col(0).real().cast<Complex>();
    m.col(half).setZero();
    for (int k = 1; k < half; ++k) {
      const int neg = grid_->nmodes - k;
      const Eigen::VectorXcd avg = 0.5 * (m.col(k) + m.col(neg).conjugate());
      m.col(k) = avg;
      m.col(neg) = avg.conjugate();
    }
  }
}

Eigen::MatrixXcd GridFunction::values(int c) const {
  const int J = grid_->nrad, M = grid_->nsamples, kmax = grid_->kmax();
  Eigen::MatrixXcd out(J, M);
  std::vector<Complex> row(M);
  for (int j = 0; j < J; ++j) {
    std::fill(row.begin(), row.end(), Complex(0.0, 0.0));
    for (int k = -kmax; k <= kmax; ++k)
      row[(k % M + M) % M] =
          modes_[c](j, k >= 0 ? k : grid_->nmodes + k) * static_cast<double>(M);
    fft_radix2(row, true);
    for (int i = 0; i < M; ++i) out(j, i) = row[i];
  }
  return out;
}

GridFunction GridFunction::dtheta() const {
  GridFunction out(grid_, ncomp_);
  for (int c = 0; c < ncomp_; ++c) {
    for (int idx = 0; idx < grid_->nmodes; ++idx) {
      const Complex ik(0.0, static_cast<double>(mode_number(idx)));
      out.modes_[c].col(idx) = ik * modes_[c].col(idx);
    }
  }
  return out;
}

std::vector<Complex> GridFunction::reduced_profile(int c, int k) const {
  const int J = grid_->nrad;
  const int idx = k >= 0 ? k : grid_->nmodes + k;
  std::vector<Complex> g(J);
  const bool odd = (std::abs(k) % 2) == 1;
  for (int j = 0; j < J; ++j) {
    g[j] = modes_[c](j, idx);
    if (odd) g[j] /= grid_->rho[j];
  }
  return g;
}

std::pair<GridFunction, GridFunction> GridFunction::gradient() const {
  GridFunction d1(grid_, ncomp_), d2(grid_, ncomp_);
  const int J = grid_->nrad, kmax = grid_->kmax();
  const Eigen::MatrixXd& D = grid_->bary.diff_matrix();
  const Complex half(0.5, 0.0);
  const Complex halfi(0.0, -0.5);  // 1/(2i)
  std::vector<Complex> g(J), gp(J), fp(J), A(J), B(J);
  for (int c = 0; c < ncomp_; ++c) {
    for (int k = -kmax; k <= kmax; ++k) {
      const int idx = k >= 0 ? k : grid_->nmodes + k;
      if (modes_[c].col(idx).isZero(0.0)) continue;
      g = reduced_profile(c, k);
      for (int i = 0; i < J; ++i) {
        Complex acc(0.0, 0.0);
        for (int j = 0; j < J; ++j) acc += D(i, j) * g[j];
        gp[i] = acc;
      }
      const bool odd = (std::abs(k) % 2) == 1;
      for (int j = 0; j < J; ++j) {
        const double sj = grid_->s[j], rj = grid_->rho[j];
        // f_k' with f_k = rho^p g(s): p=1 gives g + 2 s g'; p=0 gives 2 rho g'.
        fp[j] = odd ? (g[j] + 2.0 * sj * gp[j]) : (2.0 * rj * gp[j]);
        const Complex q = odd ? g[j] : (g[j] / rj);  // f_k / rho
        A[j] = fp[j] - static_cast<double>(k) * q;
        B[j] = fp[j] + static_cast<double>(k) * q;
      }
      if (k + 1 <= kmax) {
        const int t = (k + 1) >= 0 ? (k + 1) : grid_->nmodes + (k + 1);
        for (int j = 0; j < J; ++j) {
          d1.modes_[c](j, t) += half * A[j];
          d2.modes_[c](j, t) += halfi * A[j];
        }
      }
      if (k - 1 >= -kmax) {
        const int t = (k - 1) >= 0 ? (k - 1) : grid_->nmodes + (k - 1);
        for (int j = 0; j < J; ++j) {
          d1.modes_[c](j, t) += half * B[j];
          d2.modes_[c](j, t) -= halfi * B[j];
        }
      }
    }
  }
  d1.symmetrize();
  d2.symmetrize();
  return {std::move(d1), std::move(d2)};
}

Eigen::VectorXd GridFunction::eval(double x1, double x2) const {
  const double s = x1 * x1 + x2 * x2;
  require(s <= grid_->smax * (1.0 + 1e-12), "GridFunction::eval: point outside the chart radius");
  const double th = std::atan2(x2, x1);
  const int kmax = grid_->kmax();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ncomp_);
  const double rho = std::sqrt(s);
  for (int c = 0; c < ncomp_; ++c) {
    const std::vector<Complex> g0 = reduced_profile(c, 0);
    out(c) = grid_->bary.eval(g0, Complex(s, 0.0)).real();
    for (int k = 1; k <= kmax; ++k) {
      const int idx = k;
      if (modes_[c].col(idx).isZero(0.0)) continue;
      const std::vector<Complex> g = reduced_profile(c, k);
      Complex val = grid_->bary.eval(g, Complex(s, 0.0));
      if (k % 2 == 1) val *= rho;
      const Complex ph(std::cos(k * th), std::sin(k * th));
      out(c) += 2.0 * (val * ph).real();
    }
  }
  return out;
}

Eigen::VectorXcd GridFunction::eval(const Eigen::Vector2cd& z) const {
  const Complex s = z(0) * z(0) + z(1) * z(1);
  require(s.real() > 0.0, "GridFunction::eval: polar continuation needs Re(z1^2+z2^2) > 0");
  require(std::abs(s) <= grid_->smax * (1.0 + 1e-12),
          "GridFunction::eval: point outside the chart radius");
  const Complex rho = std::sqrt(s);
  const Complex u = (z(0) + Complex(0.0, 1.0) * z(1)) / rho;    // e^{i theta}
  const Complex uc = (z(0) - Complex(0.0, 1.0) * z(1)) / rho;   // e^{-i theta}
  const int kmax = grid_->kmax();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(ncomp_);
  for (int c = 0; c < ncomp_; ++c) {
    Complex up(1.0, 0.0), un(1.0, 0.0);
    for (int k = 0; k <= kmax; ++k) {
      if (k > 0) {
        up *= u;
        un *= uc;
      }
      const bool odd = (k % 2) == 1;
      const int ip = k, in = grid_->nmodes - k;
      if (!modes_[c].col(ip).isZero(0.0)) {
        Complex val = grid_->bary.eval(reduced_profile(c, k), s);
        if (odd) val *= rho;
        out(c) += val * up;
      }
      if (k > 0 && !modes_[c].col(in).isZero(0.0)) {
        Complex val = grid_->bary.eval(reduced_profile(c, -k), s);
        if (odd) val *= rho;
        out(c) += val * un;
      }
    }
  }
  return out;
}

PolyMap GridFunction::taylor(int order) const {
  require(order >= 0, "GridFunction::taylor: order must be nonnegative");
  PolyMap out(2, ncomp_);
  const int kmax = grid_->kmax();
  for (int c = 0; c < ncomp_; ++c) {
    for (int k = 0; k <= std::min(kmax, order); ++k) {
      const int p = k % 2;
      const int qmax = (order - p) / 2;
      if (qmax < 0) continue;
      const std::vector<Complex> tay = radial_taylor(*grid_, reduced_profile(c, k), qmax);
      for (int q = 0; q <= qmax; ++q) {
        const int j = p + 2 * q;  // power of rho
        if (j < k || j > order) continue;
        const Complex ckj = tay[q];
        // rho^j e^{ik theta} = w^a v^b, w = x1 + i x2, v = x1 - i x2.
        const int a = (j + k) / 2, b = (j - k) / 2;
        for (int r = 0; r <= a; ++r) {
          for (int t = 0; t <= b; ++t) {
            const Complex coef =
                ckj * binom(a, r) * binom(b, t) * ipow(a - r) * ipow(-(b - t));
            const double real = (k > 0 ? 2.0 : 1.0) * coef.real();
            if (real == 0.0) continue;
            Eigen::VectorXd cv = Eigen::VectorXd::Zero(ncomp_);
            cv(c) = real;
            out.add_term(std::vector<int>{r + t, (a - r) + (b - t)}, cv);
          }
        }
      }
    }
  }
  out.prune();
  return out;
}

double GridFunction::remove_below_order(int d) {
  if (d <= 0) return 0.0;
  const int J = grid_->nrad, M = grid_->nsamples;
  const int klim = std::min(grid_->kmax(), d - 1);
  double removed = 0.0;
  std::vector<Complex> sub(J);
  for (int c = 0; c < ncomp_; ++c) {
    Eigen::MatrixXcd low = Eigen::MatrixXcd::Zero(J, M);
    bool any = false;
    // Each angular mode k carries radial powers rho^(p + 2q) with p the parity
    // of k; degrees below d are subtracted directly in mode space so complex
    // valued functions are handled alongside real ones.
    for (int k = -klim; k <= klim; ++k) {
      const int p = std::abs(k) % 2;
      const int qmax = (d - 1 - p) / 2;
      if (qmax < 0) continue;
      const std::vector<Complex> tay = radial_taylor(*grid_, reduced_profile(c, k), qmax);
      std::fill(sub.begin(), sub.end(), Complex(0.0, 0.0));
      bool anyk = false;
      for (int q = 0; q <= qmax; ++q) {
        const int j = p + 2 * q;
        if (j < std::abs(k) || j >= d) continue;
        if (tay[q] == Complex(0.0, 0.0)) continue;
        anyk = true;
        for (int jr = 0; jr < J; ++jr)
          sub[jr] += tay[q] * std::pow(grid_->rho[jr], p) * std::pow(grid_->s[jr], q);
      }
      if (!anyk) continue;
      any = true;
      const int idx = k >= 0 ? k : grid_->nmodes + k;
      for (int jr = 0; jr < J; ++jr) {
        modes_[c](jr, idx) -= sub[jr];
        for (int i = 0; i < M; ++i) {
          const double th = 2.0 * kPi * i / M;
          low(jr, i) += sub[jr] * Complex(std::cos(k * th), std::sin(k * th));
        }
      }
    }
    if (any) removed = std::max(removed, low.cwiseAbs().maxCoeff());
  }
  return removed;
}

void GridFunction::check_compatible(const GridFunction& o) const {
  require(grid_ == o.grid_ && ncomp_ == o.ncomp_, "GridFunction: incompatible operands");
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  check_compatible(o);
  for (int c = 0; c < ncomp_; ++c) modes_[c] += o.modes_[c];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  check_compatible(o);
  for (int c = 0; c < ncomp_; ++c) modes_[c] -= o.modes_[c];
  return *this;
}

GridFunction& GridFunction::operator*=(double a) {
  for (int c = 0; c < ncomp_; ++c) modes_[c] *= a;
  return *this;
}

GridFunction GridFunction::operator+(const GridFunction& o) const {
  GridFunction r = *this;
  r += o;
  return r;
}

GridFunction GridFunction::operator-(const GridFunction& o) const {
  GridFunction r = *this;
  r -= o;
  return r;
}

GridFunction GridFunction::scaled(double a) const {
  GridFunction r = *this;
  r *= a;
  return r;
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (int c = 0; c < ncomp_; ++c) {
    const Eigen::MatrixXcd v = values(c);
    m = std::max(m, v.cwiseAbs().maxCoeff());
  }
  return m;
}

double GridFunction::weighted_sup(int d) const {
  double m = 0.0;
  for (int c = 0; c < ncomp_; ++c) {
    const Eigen::MatrixXcd v = values(c);
    for (int j = 0; j < grid_->nrad; ++j) {
      const double w = std::pow(grid_->rho[j], -d);
      m = std::max(m, v.row(j).cwiseAbs().maxCoeff() * w);
    }
  }
  return m;
}

}  // namespace ssmx
