#include "ssmx/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ssmx/util.hpp"

namespace ssmx {

namespace {

// Section point selected by chart coordinates (0, rho): the dual functionals
// of the plane return exactly (0, rho) there for every complement offset w.
Eigen::VectorXd slice_point(const SpectralData& sd, double rho, const Eigen::VectorXd& w) {
  return sd.plane.col(1) * rho + sd.basis2 * w;
}

// Same deterministic normalization used for the linear eigenplane: rotate the
// phase so v^T v is real and nonnegative (Re v and Im v become orthogonal),
// scale so |Re v| = 1, fix the sign by the first significant entry.
Eigen::VectorXcd normalize_pair_vector(Eigen::VectorXcd v) {
  Complex vtv = (v.transpose() * v)(0);
  double phase = 0.5 * std::atan2(vtv.imag(), vtv.real());
  v *= std::exp(Complex(0.0, -phase));
  vtv = (v.transpose() * v)(0);
  if (vtv.real() < 0) v *= Complex(0.0, 1.0);
  if (v.real().norm() < 1e-12) v *= std::exp(Complex(0.0, -kPi / 4));
  v /= v.real().norm();
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v.real()(i)) > 1e-8) {
      if (v.real()(i) < 0) v = -v;
      break;
    }
  }
  return v;
}

}  // namespace

Orbit continue_orbit(const SystemSpec& spec, const SpectralData& sd, double rho,
                     const Eigen::VectorXd& w_guess, double T_guess, const ShootOpts& opts) {
  const int n = spec.dim;
  const int nw = n - 2;
  require(rho > 0.0, "continue_orbit: radius must be positive");
  require(T_guess > 0.0, "continue_orbit: period guess must be positive");
  require(w_guess.size() == nw, "continue_orbit: complement guess has wrong size");

  Eigen::VectorXd w = w_guess;
  double T = T_guess;
  for (int it = 0; it <= opts.max_iter; ++it) {
    Eigen::VectorXd x = slice_point(sd, rho, w);
    FlowResult fr = flow(spec, x, 0.0, T, 0.0, opts.int_tol, true);
    Eigen::VectorXd r = fr.state - x;
    double rn = r.norm();
    if (rn < opts.tol) {
      Orbit orb;
      orb.rho = rho;
      orb.period = T;
      orb.omega = 2.0 * kPi / T;
      orb.level = spec.conserved_value(x);
      orb.x0 = x;
      orb.return_residual = rn;
      return orb;
    }
    require(it < opts.max_iter,
            "continue_orbit: shooting stalled at rho = " + format_g17(rho) +
                " with residual " + format_g17(rn));
    // Overdetermined Gauss-Newton step: n return conditions, n - 1 unknowns
    // (the radius is pinned, the section kills the phase). The system is
    // consistent because the closed orbit exists on the fixed level set.
    Eigen::MatrixXd J(n, nw + 1);
    J.leftCols(nw) = (fr.fundamental - Eigen::MatrixXd::Identity(n, n)) * sd.basis2;
    J.col(nw) = spec.field(fr.state, 0.0);
    Eigen::VectorXd step = J.colPivHouseholderQr().solve(-r);
    w += step.head(nw);
    T += step(nw);
    require(T > 0.0, "continue_orbit: period turned nonpositive during the iteration");
  }
  fail("continue_orbit: unreachable");
}

OrbitFamily build_family(const SystemSpec& spec, const SpectralData& sd, double delta, int nradii,
                         const ShootOpts& opts) {
  require(delta > 0.0, "build_family: delta must be positive");
  require(nradii >= 4, "build_family: need at least four radii for stable fits");
  require(spec.conserved.has_value(), "build_family: the model declares no first integral");
  require(!spec.scale.active, "build_family: expects the unrenormalized system");

  OrbitFamily fam;
  fam.delta = delta;
  fam.smax = (1.05 * delta) * (1.05 * delta);
  fam.omega0 = sd.omega0;

  // Continue outward over the same radial nodes the disk grid uses, seeding
  // each orbit from the previous one. The complement offset scales like s.
  std::vector<double> snodes = cheb_gauss_nodes(nradii, 0.0, fam.smax);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(spec.dim - 2);
  double T = 2.0 * kPi / sd.omega0;
  double sprev = 0.0;
  for (double s : snodes) {
    if (sprev > 0.0) w *= s / sprev;
    Orbit orb = continue_orbit(spec, sd, std::sqrt(s), w, T, opts);
    w = sd.basis2.transpose() * (orb.x0 - sd.plane.col(1) * orb.rho);
    T = orb.period;
    sprev = s;
    fam.orbits.push_back(std::move(orb));
  }

  std::vector<double> ss, oms, lvls;
  for (const Orbit& orb : fam.orbits) {
    ss.push_back(orb.rho * orb.rho);
    oms.push_back(orb.omega);
    lvls.push_back(orb.level);
  }
  for (size_t i = 1; i < lvls.size(); ++i) {
    require(lvls[i] > lvls[i - 1],
            "build_family: conserved level is not strictly increasing in the radius, "
            "the level cannot parameterize the family");
  }
  const int deg = nradii - 1;
  fam.omega_of_s = ChebFit::fit(ss, oms, deg, 0.0, fam.smax);
  fam.level_of_s = ChebFit::fit(ss, lvls, deg, 0.0, fam.smax);

  // Reparameterize by the conserved level: invert the monotone level fit by
  // bisection and resample both the scale factor and the backbone frequency
  // at Chebyshev nodes in the level.
  const double imax = fam.level_of_s.eval(fam.smax);
  require(imax > 0.0, "build_family: conserved level range is empty");
  auto s_of_level = [&](double lvl) {
    double lo = 0.0, hi = fam.smax;
    for (int it = 0; it < 100; ++it) {
      double mid = 0.5 * (lo + hi);
      if (fam.level_of_s.eval(mid) < lvl) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  std::vector<double> inodes = cheb_gauss_nodes(nradii, 0.0, imax);
  std::vector<double> scales, omi;
  for (double lvl : inodes) {
    double om = fam.omega_of_s.eval(s_of_level(lvl));
    scales.push_back(fam.omega0 / om);
    omi.push_back(om);
  }
  fam.scale_of_level = ChebFit::fit(inodes, scales, deg, 0.0, imax);
  fam.omega_of_level = ChebFit::fit(inodes, omi, deg, 0.0, imax);
  return fam;
}

SystemSpec rescale_time(const SystemSpec& spec, const OrbitFamily& fam) {
  require(!spec.scale.active, "rescale_time: the system is already renormalized");
  SystemSpec out = spec;
  out.scale.active = true;
  out.scale.omega0 = fam.omega0;
  out.scale.scale_of_e = fam.scale_of_level;
  out.scale.omega_of_e = fam.omega_of_level;
  return out;
}

std::vector<FloquetData> floquet_family(const SystemSpec& rspec, const OrbitFamily& fam,
                                        const SpectralData& sd, double int_tol) {
  require(rspec.scale.active, "floquet_family: expects the renormalized system");
  const int n = rspec.dim;
  const int npairs = (n - 2) / 2;
  require(n - 2 == 2 * npairs, "floquet_family: complement dimension must be even");
  const double T0 = 2.0 * kPi / fam.omega0;

  // Branch seeds at rho -> 0: the complement eigenvalues of the linearization
  // give the transverse exponents of the vanishing orbit.
  std::vector<double> mu_prev, rate_prev;
  for (const Complex& m : sd.mu) {
    if (m.imag() > 1e-12) {
      mu_prev.push_back(m.imag());
      rate_prev.push_back(m.real());
    }
  }
  require(static_cast<int>(mu_prev.size()) == npairs,
          "floquet_family: complement spectrum does not split into elliptic pairs");

  std::vector<FloquetData> out;
  for (const Orbit& orb : fam.orbits) {
    FlowResult fr = flow(rspec, orb.x0, 0.0, T0, 0.0, int_tol, true);
    FloquetData fd;
    fd.rho = orb.rho;
    fd.monodromy = fr.fundamental;

    Eigen::EigenSolver<Eigen::MatrixXd> es(fr.fundamental);
    require(es.info() == Eigen::Success, "floquet_family: monodromy eigensolve failed");
    Eigen::VectorXcd vals = es.eigenvalues();

    // The tangent pair of a constant-period family returns exactly: two unit
    // eigenvalues with the orbit direction and the radial generator as a
    // semisimple eigenplane. Their distance from one measures the defect.
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(vals(a) - 1.0) < std::abs(vals(b) - 1.0);
    });
    fd.unit_defect = std::max(std::abs(vals(order[0]) - 1.0), std::abs(vals(order[1]) - 1.0));

    std::vector<int> cand;
    for (size_t i = 2; i < order.size(); ++i) {
      if (vals(order[i]).imag() > 1e-12) cand.push_back(order[i]);
    }
    require(static_cast<int>(cand.size()) == npairs,
            "floquet_family: transverse multipliers do not form strictly complex pairs at rho = " +
                format_g17(orb.rho));

    // Assign each upper-half multiplier to a tracked exponent. The winding
    // branch is recovered by continuity: mu T0 matches +arg or -arg of the
    // multiplier modulo full turns, whichever lands nearest the previous mu.
    std::vector<bool> used(cand.size(), false);
    fd.pairs.resize(npairs);
    for (int k = 0; k < npairs; ++k) {
      int best_c = -1, best_sign = 1, best_j = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (size_t c = 0; c < cand.size(); ++c) {
        if (used[c]) continue;
        double phi = std::arg(vals(cand[c]));
        for (int sign : {+1, -1}) {
          int jmax = static_cast<int>(mu_prev[k] * T0 / (2.0 * kPi)) + 3;
          for (int j = 0; j <= jmax; ++j) {
            double mu = (sign * phi + 2.0 * kPi * j) / T0;
            if (mu <= 0.0) continue;
            double dist = std::abs(mu - mu_prev[k]);
            if (dist < best_dist) {
              best_dist = dist;
              best_c = static_cast<int>(c);
              best_sign = sign;
              best_j = j;
            }
          }
        }
      }
      require(best_c >= 0, "floquet_family: failed to track a transverse exponent branch");
      used[best_c] = true;

      Complex lam = vals(cand[best_c]);
      Eigen::VectorXcd v = es.eigenvectors().col(cand[best_c]);
      // The exponent with positive frequency belongs to the eigenvalue whose
      // argument is +mu T0 modulo full turns; that is the conjugate vector
      // when the matched sign is negative.
      if (best_sign < 0) {
        lam = std::conj(lam);
        v = v.conjugate();
      }
      TransversePair tp;
      tp.multiplier = lam;
      tp.mu = (best_sign * std::arg(vals(cand[best_c])) + 2.0 * kPi * best_j) / T0;
      tp.rate = std::log(std::abs(lam)) / T0;
      v = normalize_pair_vector(v);
      tp.frame.resize(n, 2);
      tp.frame.col(0) = v.real();
      tp.frame.col(1) = v.imag();
      fd.pairs[k] = std::move(tp);
    }
    for (int k = 0; k < npairs; ++k) {
      mu_prev[k] = fd.pairs[k].mu;
      rate_prev[k] = fd.pairs[k].rate;
    }
    out.push_back(std::move(fd));
  }
  return out;
}

}  // namespace ssmx
