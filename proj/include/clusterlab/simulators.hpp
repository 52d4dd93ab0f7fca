#pragma once

// Stationary binary processes: exceedances of a Frechet moving-maxima
// process, the at-risk indicator of the red/yellow/green urn, and a
// two-state Markov control model.
//
// Two generators exist per model. The dense ones emit every bit and follow
// the model definition step by step. The sparse ones return only the times
// of ones and jump over zero runs with geometric gaps; they have the same
// law and are what the estimators use in rare-event regimes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "clusterlab/core_types.hpp"
#include "clusterlab/rng.hpp"

namespace clusterlab {

struct BinaryPath {
  std::vector<std::uint8_t> bits;
  ProcessSpec model;

  [[nodiscard]] std::size_t length() const { return bits.size(); }

  [[nodiscard]] std::uint64_t ones() const {
    std::uint64_t c = 0;
    for (auto b : bits) c += b;
    return c;
  }

  [[nodiscard]] std::string to_text() const {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i]) s[i] = '1';
    }
    return s;
  }
};

/// The urn's at-risk process is itself a two-state chain: from "safe" a red
/// draw starts a risk episode, from "at risk" only a green draw ends it.
inline MarkovParams induced_chain(const UrnParams& urn) {
  const double n = static_cast<double>(urn.green + urn.yellow + urn.red);
  return {static_cast<double>(urn.red) / n, static_cast<double>(urn.yellow + urn.red) / n};
}

/// Stationary P(state = 1) = p01 / (p01 + 1 - p11).
inline double stationary_one(const MarkovParams& mk) {
  return mk.p01 / (mk.p01 + 1.0 - mk.p11);
}

/// Marginal threshold u with P(X_t <= u) = q, using P(X_t <= x) = exp(-r/x).
inline double moving_maxima_threshold(const MovingMaximaParams& mm) {
  return -static_cast<double>(mm.r) / std::log(mm.q);
}

/// P(Z_t > u) for a single innovation: 1 - q^(1/r).
inline double innovation_exceedance_prob(const MovingMaximaParams& mm) {
  return -std::expm1(std::log(mm.q) / static_cast<double>(mm.r));
}

/// Stationary P(I_t = 1).
inline double marginal_exceedance_rate(const ProcessSpec& spec) {
  if (const auto* mm = std::get_if<MovingMaximaParams>(&spec.params)) return 1.0 - mm->q;
  if (const auto* urn = std::get_if<UrnParams>(&spec.params)) return stationary_one(induced_chain(*urn));
  return stationary_one(std::get<MarkovParams>(spec.params));
}

/// Chain parameters for the models that are Markov in the indicator.
inline MarkovParams chain_of(const ProcessSpec& spec) {
  if (const auto* urn = std::get_if<UrnParams>(&spec.params)) return induced_chain(*urn);
  if (const auto* mk = std::get_if<MarkovParams>(&spec.params)) return *mk;
  throw Error(ErrorCode::UnsupportedModel, spec.model_name() + " is not a Markov indicator model");
}

// ---------------------------------------------------------------------------
// Dense generators
// ---------------------------------------------------------------------------

inline BinaryPath moving_maxima_indicators(const ProcessSpec& spec, std::size_t n, std::uint64_t seed) {
  validate_spec(spec);
  const auto* mm = std::get_if<MovingMaximaParams>(&spec.params);
  if (mm == nullptr) throw Error(ErrorCode::BadArgument, "spec is not moving_maxima");
  const auto r = static_cast<std::size_t>(mm->r);
  if (n < r) throw Error(ErrorCode::BadArgument, "path length must be >= r");

  const double u = moving_maxima_threshold(*mm);
  Rng rng(seed);
  auto frechet = [&rng] { return -1.0 / std::log(rng.uniform()); };

  // Sliding-window maximum over the last r innovations (indices decreasing in value).
  std::deque<std::pair<std::size_t, double>> window;
  auto push = [&](std::size_t idx, double z) {
    while (!window.empty() && window.back().second <= z) window.pop_back();
    window.emplace_back(idx, z);
    while (window.front().first + r <= idx) window.pop_front();
  };
  for (std::size_t i = 0; i + 1 < r; ++i) push(i, frechet());

  BinaryPath path;
  path.model = spec;
  path.bits.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    push(t + r - 1, frechet());
    path.bits[t] = window.front().second > u ? 1 : 0;
  }
  return path;
}

inline BinaryPath urn_indicators(const ProcessSpec& spec, std::size_t n, std::uint64_t seed) {
  validate_spec(spec);
  const auto* urn = std::get_if<UrnParams>(&spec.params);
  if (urn == nullptr) throw Error(ErrorCode::BadArgument, "spec is not urn");
  const std::uint64_t total = urn->green + urn->yellow + urn->red;
  Rng rng(seed);
  auto draw = [&] {
    auto idx = static_cast<std::uint64_t>(rng.uniform() * static_cast<double>(total));
    return std::min(idx, total - 1);
  };

  // State before time 0 from the stationary law of the induced chain.
  bool at_risk = rng.uniform() < stationary_one(induced_chain(*urn));
  BinaryPath path;
  path.model = spec;
  path.bits.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    const std::uint64_t ball = draw();
    if (ball < urn->green) {
      at_risk = false;
    } else if (ball >= urn->green + urn->yellow) {
      at_risk = true;
    }  // yellow keeps the current state
    path.bits[t] = at_risk ? 1 : 0;
  }
  return path;
}

inline BinaryPath markov_indicators(const ProcessSpec& spec, std::size_t n, std::uint64_t seed) {
  validate_spec(spec);
  const auto* mk = std::get_if<MarkovParams>(&spec.params);
  if (mk == nullptr) throw Error(ErrorCode::BadArgument, "spec is not markov_binary");
  Rng rng(seed);
  BinaryPath path;
  path.model = spec;
  path.bits.resize(n);
  bool state = rng.uniform() < stationary_one(*mk);
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) state = rng.uniform() < (state ? mk->p11 : mk->p01);
    path.bits[t] = state ? 1 : 0;
  }
  return path;
}

inline BinaryPath simulate_path(const ProcessSpec& spec, std::size_t n, std::uint64_t seed) {
  switch (spec.params.index()) {
    case 0: return moving_maxima_indicators(spec, n, seed);
    case 1: return urn_indicators(spec, n, seed);
    default: return markov_indicators(spec, n, seed);
  }
}

// ---------------------------------------------------------------------------
// Sparse generator
// ---------------------------------------------------------------------------

/// Times of ones on [begin, end), sorted.
struct SparsePath {
  long long begin = 0;
  long long end = 0;
  std::vector<long long> ones;

  [[nodiscard]] bool at(long long t) const { return std::binary_search(ones.begin(), ones.end(), t); }
};

namespace detail {

/// Times in [0, limit) at which a chain started in state s0 at time 0 is 1.
template <class Emit>
void chain_ones(const MarkovParams& mk, bool s0, long long limit, Rng& rng, Emit&& emit) {
  const double log_stay1 = std::log(mk.p11);
  const double log_stay0 = std::log1p(-mk.p01);
  long long t = 0;
  bool s = s0;
  while (t < limit) {
    const auto len = static_cast<long long>(
        std::min<std::uint64_t>(rng.run_length_log(s ? log_stay1 : log_stay0),
                                static_cast<std::uint64_t>(limit - t)));
    if (s) {
      for (long long k = t; k < t + len; ++k) emit(k);
    }
    t += len;
    s = !s;
  }
}

}  // namespace detail

/// A stationary realisation observed on [-margin, core_length + margin).
/// Time 0 is generated first; the forward and backward halves use separate
/// streams, so the core [0, core_length) does not depend on the margin.
inline SparsePath sparse_path(const ProcessSpec& spec, long long core_length, long long margin,
                              std::uint64_t seed) {
  validate_spec(spec);
  if (core_length < 1 || margin < 0) throw Error(ErrorCode::BadArgument, "bad sparse path extent");
  SparsePath out;
  out.begin = -margin;
  out.end = core_length + margin;
  Rng fwd(derive_seed(seed, 0));
  Rng bwd(derive_seed(seed, 1));

  if (const auto* mm = std::get_if<MovingMaximaParams>(&spec.params)) {
    // Ones are the union of [s, s + r - 1] over innovations Z_s > u.
    const long long r = mm->r;
    const double log_stay = std::log1p(-innovation_exceedance_prob(*mm));
    std::vector<long long> events;
    for (long long s = -static_cast<long long>(bwd.run_length_log(log_stay)); s > out.begin - r;
         s -= static_cast<long long>(bwd.run_length_log(log_stay))) {
      events.push_back(s);
    }
    std::reverse(events.begin(), events.end());
    for (long long s = static_cast<long long>(fwd.run_length_log(log_stay)) - 1; s < out.end;
         s += static_cast<long long>(fwd.run_length_log(log_stay))) {
      events.push_back(s);
    }
    long long covered = out.begin;  // first time not yet emitted
    for (long long s : events) {
      const long long lo = std::max({s, covered, out.begin});
      const long long hi = std::min(s + r, out.end);
      for (long long t = lo; t < hi; ++t) out.ones.push_back(t);
      covered = std::max(covered, hi);
    }
    return out;
  }

  const MarkovParams mk = chain_of(spec);
  const bool s0 = fwd.uniform() < stationary_one(mk);
  std::vector<long long> back;
  detail::chain_ones(mk, s0, margin + 1, bwd, [&](long long k) {
    if (k > 0) back.push_back(-k);
  });
  out.ones.assign(back.rbegin(), back.rend());
  detail::chain_ones(mk, s0, out.end, fwd, [&](long long k) { out.ones.push_back(k); });
  return out;
}

// ---------------------------------------------------------------------------
// Exact window law
// ---------------------------------------------------------------------------

inline constexpr int kMaxExactWindow = 24;

/// Conditional law of the indicators on [-u, v] given I_0 = 1, by
/// enumeration of the stationary chain's finite-dimensional law.
inline WindowLaw exact_window_law(const ProcessSpec& spec, int u, int v) {
  validate_spec(spec);
  if (u < 0 || v < 0) throw Error(ErrorCode::BadArgument, "window extents must be >= 0");
  if (u + v + 1 > kMaxExactWindow) {
    throw Error(ErrorCode::WindowTooLarge, "exact window law limited to " +
                                               std::to_string(kMaxExactWindow) + " positions");
  }
  const MarkovParams mk = chain_of(spec);
  const double pi1 = stationary_one(mk);
  const double trans[2][2] = {{1.0 - mk.p01, mk.p01}, {1.0 - mk.p11, mk.p11}};

  WindowLaw law;
  law.u = u;
  law.v = v;
  law.source = LawSource::exact();
  const int width = u + v + 1;
  const Pattern anchor = Pattern{1} << u;
  const Pattern count = Pattern{1} << width;
  for (Pattern p = 0; p < count; ++p) {
    if ((p & anchor) == 0) continue;
    unsigned prev = p & 1U;
    double prob = prev ? pi1 : 1.0 - pi1;
    for (int i = 1; i < width && prob > 0.0; ++i) {
      const unsigned cur = (p >> i) & 1U;
      prob *= trans[prev][cur];
      prev = cur;
    }
    if (prob > 0.0) law.entries.emplace(p, prob / pi1);
  }
  return law;
}

}  // namespace clusterlab
