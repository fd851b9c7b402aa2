#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "ssmx/util.hpp"

namespace ssmx {

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

struct IntOpts {
  double tol = 1e-10;     // absolute and relative local error target per step
  double h0 = 0.0;        // initial step guess, 0 = automatic
  long max_steps = 4000000;
};

namespace detail {

// Dormand-Prince 5(4) coefficients.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kE[7] = {35.0 / 384 - 5179.0 / 57600, 0.0,
                          500.0 / 1113 - 7571.0 / 16695, 125.0 / 192 - 393.0 / 640,
                          -2187.0 / 6784 + 92097.0 / 339200, 11.0 / 84 - 187.0 / 2100,
                          -1.0 / 40};

template <typename Scalar>
double error_norm(const VecX<Scalar>& err, const VecX<Scalar>& y0, const VecX<Scalar>& y1,
                  double tol) {
  double acc = 0.0;
  for (int i = 0; i < err.size(); ++i) {
    double sc = tol + tol * std::max(ScalarTraits<Scalar>::abs(y0(i)),
                                     ScalarTraits<Scalar>::abs(y1(i)));
    double e = ScalarTraits<Scalar>::abs(err(i)) / sc;
    acc += e * e;
  }
  return std::sqrt(acc / std::max<int>(1, static_cast<int>(err.size())));
}

}  // namespace detail

// One accepted step's endpoints; f values allow dense Hermite interpolation.
template <typename Scalar>
struct StepRecord {
  double ta, tb;
  VecX<Scalar> ya, yb, fa, fb;

  VecX<Scalar> interp(double t) const {
    double h = tb - ta;
    double th = (t - ta) / h;
    double a = 1.0 + th * th * (2.0 * th - 3.0);
    double b = th * (1.0 + th * (th - 2.0)) * h;
    double c = th * th * (3.0 - 2.0 * th);
    double d = th * th * (th - 1.0) * h;
    return a * ya + b * fa + c * yb + d * fb;
  }
};

// Adaptive Dormand-Prince 5(4) driver. `cb` sees each accepted step and may
// return false to stop early. Integrates forward or backward in time.
template <typename Scalar, typename Rhs, typename StepCb>
void integrate_steps(const Rhs& rhs, double t0, double t1, const VecX<Scalar>& y0,
                     const IntOpts& opts, StepCb&& cb) {
  if (t0 == t1) return;
  const double dir = (t1 > t0) ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  double t = t0;
  VecX<Scalar> y = y0;
  VecX<Scalar> f = rhs(t, y);
  double h = opts.h0 > 0.0 ? opts.h0 : std::min(span, 1e-2 * span + 1e-6);
  double err_prev = 1.0;
  std::vector<VecX<Scalar>> k(7);
  long steps = 0;

  while (dir * (t1 - t) > 0.0) {
    require(++steps <= opts.max_steps, "integrate: step limit exceeded");
    double remaining = std::abs(t1 - t);
    if (h > remaining) h = remaining;
    require(h > 1e-15 * std::max(1.0, std::abs(t)), "integrate: step size underflow");
    double hs = dir * h;

    k[0] = f;
    VecX<Scalar> ytmp;
    for (int s = 1; s < 7; ++s) {
      ytmp = y;
      for (int j = 0; j < s; ++j) {
        if (detail::kA[s][j] != 0.0) ytmp += (hs * detail::kA[s][j]) * k[j];
      }
      k[s] = rhs(t + detail::kC[s] * hs, ytmp);
    }
    // 5th-order solution is stage 7's state (FSAL form).
    VecX<Scalar> y1 = ytmp;
    VecX<Scalar> err = VecX<Scalar>::Zero(y.size());
    for (int s = 0; s < 7; ++s) {
      if (detail::kE[s] != 0.0) err += (hs * detail::kE[s]) * k[s];
    }
    double en = detail::error_norm<Scalar>(err, y, y1, opts.tol);
    if (en <= 1.0) {
      StepRecord<Scalar> rec{t, t + hs, y, y1, f, k[6]};
      t += hs;
      y = y1;
      f = k[6];
      double grow = 0.9 * std::pow(std::max(en, 1e-10), -0.7 / 5.0) *
                    std::pow(std::max(err_prev, 1e-10), 0.4 / 5.0);
      h *= std::min(5.0, std::max(0.2, grow));
      err_prev = std::max(en, 1e-10);
      if (!cb(rec)) return;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(en, -1.0 / 5.0));
    }
  }
}

// Integrate to t1 and return the final state.
template <typename Scalar, typename Rhs>
VecX<Scalar> integrate_to(const Rhs& rhs, double t0, double t1, const VecX<Scalar>& y0,
                          const IntOpts& opts = {}) {
  VecX<Scalar> out = y0;
  integrate_steps<Scalar>(rhs, t0, t1, y0, opts, [&](const StepRecord<Scalar>& r) {
    out = r.yb;
    return true;
  });
  return out;
}

// Integrate and collect states at the given monotone sample times, landing on
// each exactly (no dense-output interpolation error enters stored samples).
template <typename Scalar, typename Rhs>
std::vector<VecX<Scalar>> integrate_samples(const Rhs& rhs, double t0, const VecX<Scalar>& y0,
                                            const std::vector<double>& times,
                                            const IntOpts& opts = {}) {
  std::vector<VecX<Scalar>> out;
  out.reserve(times.size());
  VecX<Scalar> y = y0;
  double t = t0;
  for (double ts : times) {
    if (ts != t) {
      y = integrate_to<Scalar>(rhs, t, ts, y, opts);
      t = ts;
    }
    out.push_back(y);
  }
  return out;
}

}  // namespace ssmx
