#pragma once

#include <cmath>
#include <cstdint>

namespace clusterlab {

/// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of stream `index` under `master`: mix64(master ^ mix64(index + golden)).
/// Streams for distinct indices are statistically independent.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

/// Counter-based generator: the n-th output is mix64(seed + n * golden).
/// Any stream can be split off with derive_seed without shared state.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Rng(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Number of trials up to and including the first failure when each trial
  /// continues with probability `stay`: P(K > j) = stay^j, K >= 1.
  std::uint64_t run_length(double stay) noexcept {
    if (stay <= 0.0) return 1;
    const double k = std::floor(std::log(uniform()) / std::log(stay));
    constexpr double cap = 4.0e18;
    return 1 + static_cast<std::uint64_t>(k < cap ? k : cap);
  }

  /// Same as run_length, with log(stay) supplied (useful when stay ~ 1).
  std::uint64_t run_length_log(double log_stay) noexcept {
    if (log_stay == -INFINITY) return 1;
    const double k = std::floor(std::log(uniform()) / log_stay);
    constexpr double cap = 4.0e18;
    return 1 + static_cast<std::uint64_t>(k < cap ? k : cap);
  }

 private:
  std::uint64_t state_;
};

}  // namespace clusterlab
