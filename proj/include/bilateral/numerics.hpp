#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace bilateral {

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 4096;
  // Unbounded supports are cut at this quantile; the residual tail mass is
  // treated as sitting at the cut point.
  double tail_quantile = 1.0 - 1e-12;

  // Throws std::invalid_argument when an invariant does not hold.
  void check() const;
};

struct Seed {
  std::uint64_t value = 0;
  friend bool operator==(Seed, Seed) = default;
};

// SplitMix64 finaliser; used to derive independent child seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Child seed number `stream` of `parent`. Distinct streams give
// statistically independent generators.
Seed split(Seed parent, std::uint64_t stream) noexcept;

// Seedable 64-bit generator. Draws are bit-reproducible across platforms
// because the double conversion is done here rather than by <random>.
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(splitmix64(seed.value)) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

// Adaptive Gauss-Kronrod integral of f over [a, b]. The interval is first cut
// at every breakpoint (jump discontinuities of a CDF must be listed here);
// subintervals are then refined globally, largest error first, until
// |error| <= max(abs_tol, rel_tol * |I|).
// Throws InvalidInterval if a > b and NonConvergence if the tolerance is not
// met within cfg.max_subdivisions subintervals.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureConfig& cfg = {},
                 std::span<const double> breakpoints = {});

// inf{x in [lo, hi] : F(x) >= q} for nondecreasing F, by bisection to
// 2^-50 (hi - lo). Returns lo when q <= F(lo). If one of `jumps` lies inside
// the final bracket and satisfies F(jump) >= q, it is returned exactly.
// Throws NotBracketed if q > F(hi).
double invert_monotone(const std::function<double(double)>& F, double q,
                       double lo, double hi,
                       std::span<const double> jumps = {});

}  // namespace bilateral
