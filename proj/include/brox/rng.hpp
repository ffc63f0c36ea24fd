#pragma once

// Counter-based random streams.
//
// Every stream is a SplitMix64 sequence whose starting state is a hash of
// (seed, domain, index). Draws do not depend on how many other streams exist,
// so the k-th noise coefficient and the i-th Monte Carlo path are identical no
// matter which K_max, path count, or thread schedule produced them.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <utility>

namespace brox::rng {

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream domains keep noise coefficients, paths and bootstrap draws disjoint.
enum class Domain : std::uint64_t {
  noise = 0x6e6f697365ULL,
  path = 0x70617468ULL,
  probe = 0x70726f6265ULL,
  bootstrap = 0x626f6f74ULL,
};

inline constexpr std::uint64_t stream_key(std::uint64_t seed, Domain domain,
                                          std::uint64_t index) noexcept {
  return mix64(mix64(seed ^ static_cast<std::uint64_t>(domain)) + mix64(index + 0x9e3779b97f4a7c15ULL));
}

/// SplitMix64 engine; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}
  SplitMix64(std::uint64_t seed, Domain domain, std::uint64_t index) noexcept
      : state_(stream_key(seed, domain, index)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Two independent standard normals (Box–Muller, cosine branch first).
  std::pair<double, double> normal_pair() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(th), r * std::sin(th)};
  }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    auto [a, b] = normal_pair();
    spare_ = b;
    has_spare_ = true;
    return a;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace brox::rng
