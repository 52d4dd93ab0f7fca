#pragma once

// Test-only reference computations. Nothing here calls into the code paths
// it is used to check.

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "clusterlab/core_types.hpp"

namespace oracle {

using Mat2 = std::array<std::array<double, 2>, 2>;

inline Mat2 mul(const Mat2& a, const Mat2& b) {
  Mat2 c{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Mat2 power(Mat2 m, long long n) {
  Mat2 r{{{1.0, 0.0}, {0.0, 1.0}}};
  while (n > 0) {
    if (n & 1) r = mul(r, m);
    m = mul(m, m);
    n >>= 1;
  }
  return r;
}

/// P(I_t = 1 for all t in times | I_0 = 1) for a stationary two-state chain,
/// by products of n-step transition probabilities across the gaps.
inline double markov_all_ones(double p01, double p11, std::vector<long long> times) {
  std::sort(times.begin(), times.end());
  const Mat2 P{{{1.0 - p01, p01}, {1.0 - p11, p11}}};
  const double pi1 = p01 / (p01 + 1.0 - p11);
  double prob = pi1;
  for (std::size_t i = 1; i < times.size(); ++i) {
    prob *= power(P, times[i] - times[i - 1])[1][1];
  }
  return prob / pi1;
}

/// P(exact pattern `bits` on consecutive times t1..t2 | I_0 = 1), 0 in [t1, t2].
inline double markov_pattern(double p01, double p11, const std::vector<int>& bits) {
  const double pi1 = p01 / (p01 + 1.0 - p11);
  const double P[2][2] = {{1.0 - p01, p01}, {1.0 - p11, p11}};
  double prob = bits[0] ? pi1 : 1.0 - pi1;
  for (std::size_t i = 1; i < bits.size(); ++i) prob *= P[bits[i - 1]][bits[i]];
  return prob / pi1;
}

/// Random nonincreasing pmf on {0, ..., n-1} with P(0) > 0, built from sorted
/// uniforms and normalised.
inline clusterlab::ExtendedPmf random_monotone_side(std::mt19937_64& gen, std::size_t max_len,
                                                    double infinity_mass = 0.0) {
  std::uniform_int_distribution<std::size_t> len_dist(1, max_len);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = len_dist(gen);
  std::vector<double> w(n);
  for (auto& x : w) x = u(gen) + 1e-3;
  std::sort(w.begin(), w.end(), std::greater<>());
  double s = 0.0;
  for (double x : w) s += x;
  clusterlab::ExtendedPmf p;
  p.offset = 0;
  for (double x : w) p.probs.push_back(x / s * (1.0 - infinity_mass));
  p.infinity_mass = infinity_mass;
  return p;
}

/// Binomial standard error sqrt(p (1 - p) / m).
inline double binomial_se(double p, double m) { return std::sqrt(p * (1.0 - p) / m); }

}  // namespace oracle
