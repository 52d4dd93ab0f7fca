#pragma once

// Domain types shared by the calculus, verification, simulation and
// estimation layers: extended pmfs with an atom at infinity, conditional
// window laws, process specifications, check results and cluster reports.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace clusterlab {

inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class ErrorCode {
  NegativeMass,
  NotNormalized,
  BadOffset,
  NotMonotone,
  BadArgument,
  ThetaZero,
  BadTheta,
  MassOverflow,
  OutOfWindow,
  ShiftNotInSet,
  WindowTooLarge,
  Degenerate,
  UnsupportedModel,
  NoExceedances,
  NoAnchors,
  ConfigError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeMass: return "NegativeMass";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::BadOffset: return "BadOffset";
    case ErrorCode::NotMonotone: return "NotMonotone";
    case ErrorCode::BadArgument: return "BadArgument";
    case ErrorCode::ThetaZero: return "ThetaZero";
    case ErrorCode::BadTheta: return "BadTheta";
    case ErrorCode::MassOverflow: return "MassOverflow";
    case ErrorCode::OutOfWindow: return "OutOfWindow";
    case ErrorCode::ShiftNotInSet: return "ShiftNotInSet";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::UnsupportedModel: return "UnsupportedModel";
    case ErrorCode::NoExceedances: return "NoExceedances";
    case ErrorCode::NoAnchors: return "NoAnchors";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// ---------------------------------------------------------------------------
// ExtendedPmf
// ---------------------------------------------------------------------------

/// Probability mass function on {offset, offset+1, ...} with an explicit
/// atom at infinity. probs[k] is P(value == offset + k).
struct ExtendedPmf {
  int offset = 0;
  std::vector<double> probs;
  double infinity_mass = 0.0;

  /// P(value == k) for a finite k; zero outside the stored support.
  [[nodiscard]] double at(long long k) const {
    const long long idx = k - offset;
    if (idx < 0 || idx >= static_cast<long long>(probs.size())) return 0.0;
    return probs[static_cast<std::size_t>(idx)];
  }

  [[nodiscard]] double finite_mass() const {
    double s = 0.0;
    for (double p : probs) s += p;
    return s;
  }

  [[nodiscard]] double total_mass() const { return finite_mass() + infinity_mass; }

  /// One past the largest stored support point.
  [[nodiscard]] long long support_end() const {
    return offset + static_cast<long long>(probs.size());
  }

  friend bool operator==(const ExtendedPmf&, const ExtendedPmf&) = default;
};

/// Returns a trimmed, validated copy of p.
inline ExtendedPmf validate_pmf(ExtendedPmf p) {
  if (p.offset != 0 && p.offset != 1) {
    throw Error(ErrorCode::BadOffset, "offset must be 0 or 1, got " + std::to_string(p.offset));
  }
  for (std::size_t k = 0; k < p.probs.size(); ++k) {
    if (!(p.probs[k] >= 0.0) || !std::isfinite(p.probs[k])) {
      throw Error(ErrorCode::NegativeMass,
                  "probs[" + std::to_string(k) + "] = " + std::to_string(p.probs[k]));
    }
  }
  if (!(p.infinity_mass >= 0.0) || !std::isfinite(p.infinity_mass)) {
    throw Error(ErrorCode::NegativeMass, "infinity_mass = " + std::to_string(p.infinity_mass));
  }
  const double total = p.total_mass();
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw Error(ErrorCode::NotNormalized, "total mass " + std::to_string(total));
  }
  while (!p.probs.empty() && p.probs.back() == 0.0) p.probs.pop_back();
  return p;
}

/// P(value >= k). Equals 1 for k <= offset.
inline double pmf_tail(const ExtendedPmf& p, long long k) {
  if (k <= p.offset) return 1.0;
  double s = p.infinity_mass;
  // Summed from the far end so long geometric tails accumulate small terms first.
  for (long long j = p.support_end() - 1; j >= k; --j) s += p.at(j);
  return s;
}

inline ExtendedPmf point_mass(int offset, long long value) {
  ExtendedPmf p;
  p.offset = offset;
  p.probs.assign(static_cast<std::size_t>(value - offset + 1), 0.0);
  p.probs.back() = 1.0;
  return p;
}

inline ExtendedPmf point_mass_at_infinity(int offset) {
  ExtendedPmf p;
  p.offset = offset;
  p.infinity_mass = 1.0;
  return p;
}

/// Uniform law on {offset, ..., offset + count - 1}.
inline ExtendedPmf uniform_pmf(int offset, std::size_t count) {
  ExtendedPmf p;
  p.offset = offset;
  p.probs.assign(count, 1.0 / static_cast<double>(count));
  return p;
}

/// Geometric law rho (1 - rho)^(k - offset), truncated after `last` with no
/// renormalisation; the dropped tail is (1 - rho)^(last - offset + 1).
inline ExtendedPmf geometric_pmf(int offset, double rho, long long last) {
  ExtendedPmf p;
  p.offset = offset;
  double w = rho;
  for (long long k = offset; k <= last; ++k) {
    p.probs.push_back(w);
    w *= (1.0 - rho);
  }
  return p;
}

// ---------------------------------------------------------------------------
// WindowLaw
// ---------------------------------------------------------------------------

enum class LawKind { exact, empirical };

struct LawSource {
  LawKind kind = LawKind::exact;
  std::uint64_t samples = 0;
  /// Sample count after the dependence deflation; used for standard errors.
  double effective_samples = 0.0;

  static LawSource exact() { return {}; }
  static LawSource empirical(std::uint64_t m, double m_eff) {
    return {LawKind::empirical, m, m_eff};
  }

  friend bool operator==(const LawSource&, const LawSource&) = default;
};

/// A window pattern packs bit i <-> time t = i - u, so bit u is time 0.
using Pattern = std::uint64_t;

inline constexpr int kMaxWindowWidth = 63;

/// Conditional law of (I_t), t in [-u, v], given I_0 = 1.
struct WindowLaw {
  int u = 0;
  int v = 0;
  std::map<Pattern, double> entries;
  LawSource source;

  [[nodiscard]] int width() const { return u + v + 1; }
  [[nodiscard]] bool in_window(long long t) const { return t >= -u && t <= v; }
  [[nodiscard]] int bit_index(long long t) const { return static_cast<int>(t + u); }
  [[nodiscard]] Pattern bit(long long t) const { return Pattern{1} << bit_index(t); }
  [[nodiscard]] bool is_exact() const { return source.kind == LawKind::exact; }

  friend bool operator==(const WindowLaw&, const WindowLaw&) = default;
};

/// Bit string of length `width`, character i is bit i (time i - u).
inline std::string pattern_to_bits(Pattern pattern, int width) {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int i = 0; i < width; ++i) {
    if ((pattern >> i) & 1U) s[static_cast<std::size_t>(i)] = '1';
  }
  return s;
}

inline Pattern bits_to_pattern(std::string_view bits) {
  if (bits.size() > static_cast<std::size_t>(kMaxWindowWidth)) {
    throw Error(ErrorCode::WindowTooLarge, "pattern longer than " + std::to_string(kMaxWindowWidth));
  }
  Pattern p = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      p |= Pattern{1} << i;
    } else if (bits[i] != '0') {
      throw Error(ErrorCode::BadArgument, "pattern '" + std::string(bits) + "' is not a bit string");
    }
  }
  return p;
}

/// Checks the window-law invariants: anchor bit set on every charged
/// pattern, non-negative probabilities summing to one. Zero entries are
/// dropped from the returned copy.
inline WindowLaw validate_window_law(WindowLaw law) {
  if (law.u < 0 || law.v < 0) throw Error(ErrorCode::BadArgument, "window extents must be >= 0");
  if (law.width() > kMaxWindowWidth) {
    throw Error(ErrorCode::WindowTooLarge, "window width " + std::to_string(law.width()));
  }
  const Pattern anchor = law.bit(0);
  const Pattern limit = law.width() == 64 ? ~Pattern{0} : (Pattern{1} << law.width()) - 1;
  double total = 0.0;
  for (auto it = law.entries.begin(); it != law.entries.end();) {
    const auto [pattern, prob] = *it;
    if (!(prob >= 0.0)) {
      throw Error(ErrorCode::NegativeMass, "pattern " + pattern_to_bits(pattern, law.width()));
    }
    if ((pattern & ~limit) != 0) {
      throw Error(ErrorCode::OutOfWindow, "pattern has bits outside the window");
    }
    if (prob == 0.0) {
      it = law.entries.erase(it);
      continue;
    }
    if ((pattern & anchor) == 0) {
      throw Error(ErrorCode::BadArgument,
                  "pattern " + pattern_to_bits(pattern, law.width()) + " has I_0 = 0");
    }
    total += prob;
    ++it;
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw Error(ErrorCode::NotNormalized, "window law total mass " + std::to_string(total));
  }
  return law;
}

// ---------------------------------------------------------------------------
// ProcessSpec
// ---------------------------------------------------------------------------

/// X_t = max(Z_t, ..., Z_{t-r+1}) with unit-Frechet Z, thresholded at its
/// marginal q-quantile.
struct MovingMaximaParams {
  int r = 1;
  double q = 0.99;
  friend bool operator==(const MovingMaximaParams&, const MovingMaximaParams&) = default;
};

/// Draws with replacement from green / yellow / red balls.
struct UrnParams {
  std::uint64_t green = 1;
  std::uint64_t yellow = 0;
  std::uint64_t red = 1;
  friend bool operator==(const UrnParams&, const UrnParams&) = default;
};

/// Stationary two-state chain. p01 = P(1 | 0), p11 = P(1 | 1).
struct MarkovParams {
  double p01 = 0.5;
  double p11 = 0.5;
  friend bool operator==(const MarkovParams&, const MarkovParams&) = default;
};

struct ProcessSpec {
  std::variant<MovingMaximaParams, UrnParams, MarkovParams> params;
  std::uint64_t seed = 0;

  [[nodiscard]] std::string model_name() const {
    switch (params.index()) {
      case 0: return "moving_maxima";
      case 1: return "urn";
      default: return "markov_binary";
    }
  }

  friend bool operator==(const ProcessSpec&, const ProcessSpec&) = default;
};

inline ProcessSpec moving_maxima_spec(int r, double q, std::uint64_t seed = 0) {
  return {MovingMaximaParams{r, q}, seed};
}
inline ProcessSpec urn_spec(std::uint64_t g, std::uint64_t y, std::uint64_t red, std::uint64_t seed = 0) {
  return {UrnParams{g, y, red}, seed};
}
inline ProcessSpec markov_spec(double p01, double p11, std::uint64_t seed = 0) {
  return {MarkovParams{p01, p11}, seed};
}

inline void validate_spec(const ProcessSpec& spec) {
  if (const auto* mm = std::get_if<MovingMaximaParams>(&spec.params)) {
    if (mm->r < 1) throw Error(ErrorCode::BadArgument, "moving_maxima.r must be >= 1");
    if (!(mm->q > 0.0 && mm->q < 1.0)) throw Error(ErrorCode::BadArgument, "moving_maxima.q must lie in (0,1)");
  } else if (const auto* urn = std::get_if<UrnParams>(&spec.params)) {
    if (urn->green < 1) throw Error(ErrorCode::BadArgument, "urn.g must be >= 1");
    if (urn->red < 1) throw Error(ErrorCode::BadArgument, "urn.r_balls must be >= 1");
  } else {
    const auto& mk = std::get<MarkovParams>(spec.params);
    if (!(mk.p01 >= 0.0 && mk.p01 <= 1.0) || !(mk.p11 >= 0.0 && mk.p11 <= 1.0)) {
      throw Error(ErrorCode::BadArgument, "markov_binary transition probabilities must lie in [0,1]");
    }
    if (mk.p01 == 0.0 || mk.p11 == 1.0) {
      throw Error(ErrorCode::Degenerate, "markov_binary chain has an absorbing state");
    }
  }
}

// ---------------------------------------------------------------------------
// Checks and reports
// ---------------------------------------------------------------------------

struct CheckResult {
  std::string identity_name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string context;
};

/// passed <=> |residual| <= tolerance. NaN residuals fail.
inline CheckResult make_check(std::string name, double residual, double tolerance,
                              std::string context = {}) {
  const bool ok = std::abs(residual) <= tolerance;
  return {std::move(name), residual, tolerance, ok, std::move(context)};
}

struct ClusterReport {
  std::optional<double> theta;
  std::optional<double> e_typical;  // undefined when theta == 0
  double e_inspected = 0.0;         // may be +inf
  double e_side = 0.0;              // may be +inf
  std::optional<double> e_typical_second;
  ExtendedPmf pmf_side;
  ExtendedPmf pmf_inspected;
  std::optional<ExtendedPmf> pmf_typical;
  double censored_fraction = 0.0;
  std::map<std::string, double> residuals;
  std::vector<CheckResult> checks;

  // Empirical reports only.
  std::vector<double> side_stderr;
  std::vector<double> inspected_stderr;
  std::vector<double> typical_stderr;
  std::uint64_t samples = 0;
  double effective_samples = 0.0;
  std::vector<std::string> notes;

  [[nodiscard]] bool all_passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
};

}  // namespace clusterlab
