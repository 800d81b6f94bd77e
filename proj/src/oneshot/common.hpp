#pragma once

#include <cstdint>
#include <cstdlib>
#include <cmath>
#include <stdexcept>
#include <string>

namespace oneshot {

// Error taxonomy. The CLI maps these onto its exit codes: bad input or an
// exceeded cap is a usage problem (2), solver breakdown is numerical (3).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cell cap for materialized tables (product distributions, type-class lists).
// ONESHOT_MAX_CELLS overrides the default.
inline std::uint64_t max_cells() {
  static const std::uint64_t v = [] {
    if (const char* s = std::getenv("ONESHOT_MAX_CELLS")) {
      char* end = nullptr;
      unsigned long long parsed = std::strtoull(s, &end, 10);
      if (end && *end == '\0' && parsed > 0) return (std::uint64_t)parsed;
    }
    return (std::uint64_t)5000000;
  }();
  return v;
}

// Counter-based generator: every draw is a pure function of (seed, counter),
// so a stream can be replayed or split without shared state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed ^ (0x9e3779b97f4a7c15ull * (stream + 1))), ctr_(0) {}

  std::uint64_t next_u64() { return mix(seed_, ctr_++); }

  // uniform in [0,1)
  double uniform() {
    return (double)(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform_pos() {
    double u;
    do { u = uniform(); } while (u <= 0.0);
    return u;
  }

  // standard normal, explicit Box-Muller so output is platform-stable
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform_pos();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw UsageError("Rng::below: empty range");
    std::uint64_t mask = ~0ull;
    std::uint64_t lim = mask - mask % n;
    std::uint64_t x;
    do { x = next_u64(); } while (x >= lim);
    return x % n;
  }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t ctr) {
    // splitmix64 on seed+ctr
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (ctr + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t ctr_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline double log2_clamped(double x) {
  // tables feeding this are clamped so logs never produce -inf
  return std::log2(x < 1e-300 ? 1e-300 : x);
}

}  // namespace oneshot
