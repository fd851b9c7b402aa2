#pragma once

#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ssmx {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Scalar traits so numerics templates accept double and complex states alike.
template <typename T>
struct ScalarTraits {
  static double abs(const T& v) { return std::abs(v); }
  static constexpr bool is_complex = false;
};
template <>
struct ScalarTraits<Complex> {
  static double abs(const Complex& v) { return std::abs(v); }
  static constexpr bool is_complex = true;
};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline void require(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

// Thread count for parallel sweeps; SSMX_THREADS overrides hardware default.
inline unsigned thread_count() {
  if (const char* env = std::getenv("SSMX_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1u : (hc > 16 ? 16u : hc);
}

// Deterministic parallel loop: disjoint index ranges, no shared mutable state.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  unsigned nt = thread_count();
  if (nt <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  if (nt > n) nt = static_cast<unsigned>(n);
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mu;
  for (unsigned t = 0; t < nt; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (std::size_t i = t; i < n; i += nt) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

using Rng = std::mt19937_64;

inline Rng seeded_rng(std::uint64_t seed) { return Rng(seed); }

// FNV-1a, used to stamp archives with the gate report they were built under.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Shortest decimal that round-trips a double exactly (17 significant digits).
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace ssmx
