#include "ssmx/expansion.hpp"

#include <cmath>

#include "ssmx/eps_series.hpp"
#include "ssmx/util.hpp"

namespace ssmx {

namespace {

template <typename T>
Eigen::Matrix<T, 2, 1> correction_at(const ReducedCorrection& rc, const Eigen::Matrix<T, 2, 1>& z) {
  T s = z(0) * z(0) + z(1) * z(1);
  T a = rc.alpha_of_s.eval(s);
  T b = rc.beta_of_s.eval(s);
  return Eigen::Matrix<T, 2, 1>(a * z(0) + b * z(1), a * z(1) - b * z(0));
}

ReducedCorrection zero_correction(const DiskGrid& grid) {
  ReducedCorrection rc;
  rc.alpha.assign(grid.rho.size(), 0.0);
  rc.beta.assign(grid.rho.size(), 0.0);
  rc.alpha_of_s = ChebFit(0.0, grid.smax, {0.0});
  rc.beta_of_s = ChebFit(0.0, grid.smax, {0.0});
  return rc;
}

}  // namespace

Eigen::VectorXd Expansion::embed(const Eigen::Vector2d& x, double eps, int N) const {
  require(0 <= N && N <= order, "Expansion::embed: order out of range");
  Eigen::VectorXd y = K[N].eval(x(0), x(1));
  for (int n = N - 1; n >= 0; --n) y = K[n].eval(x(0), x(1)) + eps * y;
  return y;
}

Eigen::VectorXcd Expansion::embed(const Eigen::Vector2cd& z, Complex eps, int N) const {
  require(0 <= N && N <= order, "Expansion::embed: order out of range");
  Eigen::VectorXcd y = K[N].eval(z);
  for (int n = N - 1; n >= 0; --n) y = K[n].eval(z) + eps * y;
  return y;
}

Eigen::Vector2d Expansion::reduced(const Eigen::Vector2d& x, double eps, int N) const {
  require(0 <= N && N <= order, "Expansion::reduced: order out of range");
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  for (int n = N; n >= 1; --n) v = correction_at<double>(R[n], x) + eps * v;
  return chart->omega0 * Eigen::Vector2d(x(1), -x(0)) + eps * v;
}

Eigen::Vector2cd Expansion::reduced(const Eigen::Vector2cd& z, Complex eps, int N) const {
  require(0 <= N && N <= order, "Expansion::reduced: order out of range");
  Eigen::Vector2cd v = Eigen::Vector2cd::Zero();
  for (int n = N; n >= 1; --n) v = correction_at<Complex>(R[n], z) + eps * v;
  return chart->omega0 * Eigen::Vector2cd(z(1), -z(0)) + eps * v;
}

Eigen::VectorXcd Expansion::transport(const Eigen::Vector2cd& z, Complex eps, int N) const {
  require(0 <= N && N <= order, "Expansion::transport: order out of range");
  Eigen::VectorXcd gx = Kx[N].eval(z);
  Eigen::VectorXcd gy = Ky[N].eval(z);
  for (int n = N - 1; n >= 0; --n) {
    gx = Kx[n].eval(z) + eps * gx;
    gy = Ky[n].eval(z) + eps * gy;
  }
  Eigen::Vector2cd r = reduced(z, eps, N);
  return gx * r(0) + gy * r(1);
}

GridFunction order_forcing(const ConservativeChart& ch, const std::vector<GridFunction>& K,
                           const std::vector<ReducedCorrection>& R, int n) {
  require(n >= 1, "order_forcing: order must be positive");
  require(static_cast<int>(K.size()) >= n, "order_forcing: missing lower-order embeddings");
  require(static_cast<int>(R.size()) >= n, "order_forcing: missing lower-order corrections");
  const DiskGrid& grid = *ch.grid;
  const int nc = ch.dim;
  const int nrad = grid.nrad;
  const int ns = grid.nsamples;

  std::vector<std::vector<Eigen::MatrixXd>> kv(n);
  for (int m = 0; m < n; ++m) {
    kv[m].reserve(nc);
    for (int c = 0; c < nc; ++c) kv[m].push_back(K[m].values(c).real());
  }
  std::vector<std::vector<Eigen::MatrixXd>> gxv(n), gyv(n);
  for (int j = 1; j < n; ++j) {
    auto g = K[j].gradient();
    for (int c = 0; c < nc; ++c) {
      gxv[j].push_back(g.first.values(c).real());
      gyv[j].push_back(g.second.values(c).real());
    }
  }

  std::vector<Eigen::MatrixXcd> out(nc, Eigen::MatrixXcd::Zero(nrad, ns));
  std::vector<EpsSeries<double>> y(nc, EpsSeries<double>(n));
  for (int j = 0; j < nrad; ++j) {
    for (int i = 0; i < ns; ++i) {
      for (int c = 0; c < nc; ++c) {
        for (int m = 0; m <= n; ++m) y[c][m] = m < n ? kv[m][c](j, i) : 0.0;
      }
      auto f = ch.rspec.field_series(y);
      double theta = 2.0 * kPi * i / ns;
      double x1 = grid.rho[j] * std::cos(theta);
      double x2 = grid.rho[j] * std::sin(theta);
      for (int c = 0; c < nc; ++c) {
        double v = f[c][n];
        for (int m = 1; m < n; ++m) {
          Eigen::Vector2d w = R[n - m].eval(x1, x2);
          v -= gxv[m][c](j, i) * w(0) + gyv[m][c](j, i) * w(1);
        }
        out[c](j, i) = v;
      }
    }
  }
  GridFunction eta = GridFunction::from_value_matrices(ch.grid, out);
  eta.symmetrize();
  return eta;
}

Expansion expand(const ConservativeChart& ch, int order, SolveRoute route, double bvp_tol) {
  require(order >= 0, "expand: order must be nonnegative");
  Expansion ex;
  ex.chart = &ch;
  ex.order = order;
  ex.K.push_back(ch.K0);
  ex.Kx.push_back(ch.T1);
  ex.Ky.push_back(ch.T2);
  ex.R.push_back(zero_correction(*ch.grid));
  for (int n = 1; n <= order; ++n) {
    GridFunction eta = order_forcing(ch, ex.K, ex.R, n);
    CohomologySolution sol = route == SolveRoute::fourier ? solve_cohomology_fourier(ch, eta)
                                                          : solve_cohomology_bvp(ch, eta, bvp_tol);
    ex.K.push_back(sol.kn);
    ex.R.push_back(sol.rn);
    ex.defects.push_back(sol.defect);
    auto g = sol.kn.gradient();
    ex.Kx.push_back(g.first);
    ex.Ky.push_back(g.second);
  }
  return ex;
}

double weighted_residual(const Expansion& ex, Complex eps, int N, int d) {
  require(ex.chart != nullptr, "weighted_residual: empty expansion");
  require(0 <= N && N <= ex.order, "weighted_residual: order out of range");
  const ConservativeChart& ch = *ex.chart;
  const DiskGrid& grid = *ch.grid;
  const int nc = ch.dim;
  const int nrad = grid.nrad;
  const int ns = grid.nsamples;
  const double tau = 0.05 * grid.delta;
  const double rho_min = 0.25 * grid.delta;

  std::vector<std::vector<Eigen::MatrixXd>> kv(N + 1), gxv(N + 1), gyv(N + 1);
  for (int m = 0; m <= N; ++m) {
    for (int c = 0; c < nc; ++c) {
      kv[m].push_back(ex.K[m].values(c).real());
      gxv[m].push_back(ex.Kx[m].values(c).real());
      gyv[m].push_back(ex.Ky[m].values(c).real());
    }
  }

  double sup = 0.0;
  Eigen::VectorXcd y(nc), gx(nc), gy(nc);
  for (int j = 0; j < nrad; ++j) {
    double rho = grid.rho[j];
    double w = std::pow(rho, -static_cast<double>(d));
    for (int i = 0; i < ns; ++i) {
      for (int c = 0; c < nc; ++c) {
        Complex a = kv[N][c](j, i), b = gxv[N][c](j, i), g2 = gyv[N][c](j, i);
        for (int m = N - 1; m >= 0; --m) {
          a = kv[m][c](j, i) + eps * a;
          b = gxv[m][c](j, i) + eps * b;
          g2 = gyv[m][c](j, i) + eps * g2;
        }
        y(c) = a;
        gx(c) = b;
        gy(c) = g2;
      }
      double theta = 2.0 * kPi * i / ns;
      Eigen::Vector2cd z(rho * std::cos(theta), rho * std::sin(theta));
      Eigen::Vector2cd r = ex.reduced(z, eps, N);
      Eigen::VectorXcd f = ch.rspec.field(y, eps);
      sup = std::max(sup, w * (f - gx * r(0) - gy * r(1)).norm());
    }
  }

  const Complex ii(0.0, 1.0);
  for (int shell = 1; shell <= 3; ++shell) {
    double eta = tau * shell / 3.0;
    for (int j = 0; j < nrad; ++j) {
      double rho = grid.rho[j];
      if (rho < rho_min) continue;
      double w = std::pow(std::sqrt(rho * rho + eta * eta), -static_cast<double>(d));
      for (int i = 0; i < ns; i += 8) {
        double theta = 2.0 * kPi * i / ns;
        Eigen::Vector2d e(std::cos(theta), std::sin(theta));
        for (int dir = 0; dir < 2; ++dir) {
          Eigen::Vector2d u = dir == 0 ? e : Eigen::Vector2d(e(1), -e(0));
          Eigen::Vector2cd z = (rho * e).cast<Complex>() + ii * eta * u.cast<Complex>();
          Eigen::VectorXcd yz = ex.embed(z, eps, N);
          Eigen::VectorXcd f = ch.rspec.field(yz, eps);
          sup = std::max(sup, w * (f - ex.transport(z, eps, N)).norm());
        }
      }
    }
  }
  return sup;
}

}  // namespace ssmx
