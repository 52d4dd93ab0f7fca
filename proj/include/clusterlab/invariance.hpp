#pragma once

// Shift invariance checks on conditional window laws: the time change
// formula P(I_t = 1, t in A) = P(I_{t-a} = 1, t in A) for 0, a in A, and
// its exact-pattern form on finite intervals [t1, t2].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "clusterlab/core_types.hpp"

namespace clusterlab {

/// Sorted finite set of times that always contains 0.
class IndexSet {
 public:
  IndexSet() : elements_{0} {}

  explicit IndexSet(std::vector<long long> elements) : elements_(std::move(elements)) {
    std::sort(elements_.begin(), elements_.end());
    elements_.erase(std::unique(elements_.begin(), elements_.end()), elements_.end());
    if (!contains(0)) throw Error(ErrorCode::BadArgument, "index set must contain 0");
  }

  IndexSet(std::initializer_list<long long> elements)
      : IndexSet(std::vector<long long>(elements)) {}

  [[nodiscard]] const std::vector<long long>& elements() const { return elements_; }
  [[nodiscard]] std::size_t size() const { return elements_.size(); }

  [[nodiscard]] bool contains(long long t) const {
    return std::binary_search(elements_.begin(), elements_.end(), t);
  }

  /// A - a = {t - a : t in A}; contains 0 whenever a is in A.
  [[nodiscard]] IndexSet shifted(long long a) const {
    if (!contains(a)) {
      throw Error(ErrorCode::ShiftNotInSet, "shift " + std::to_string(a) + " is not in " + to_string());
    }
    std::vector<long long> out;
    out.reserve(elements_.size());
    for (long long t : elements_) out.push_back(t - a);
    return IndexSet(std::move(out));
  }

  [[nodiscard]] std::string to_string() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < elements_.size(); ++i) os << (i ? "," : "") << elements_[i];
    os << '}';
    return os.str();
  }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<long long> elements_;
};

/// Tolerances for residual checks. Exact laws use `exact`; empirical laws use
/// `sigma` standard errors of the residual, computed from the law itself.
struct ToleranceRule {
  double exact = 1e-12;
  double sigma = 4.0;
};

namespace detail {

inline void require_in_window(const WindowLaw& law, long long t) {
  if (!law.in_window(t)) {
    throw Error(ErrorCode::OutOfWindow, "time " + std::to_string(t) + " outside window [" +
                                            std::to_string(-law.u) + "," + std::to_string(law.v) + "]");
  }
}

inline Pattern mask_of(const WindowLaw& law, const std::vector<long long>& times) {
  Pattern m = 0;
  for (long long t : times) {
    require_in_window(law, t);
    m |= law.bit(t);
  }
  return m;
}

inline Pattern interval_mask(const WindowLaw& law, long long t1, long long t2) {
  require_in_window(law, t1);
  require_in_window(law, t2);
  Pattern m = 0;
  for (long long t = t1; t <= t2; ++t) m |= law.bit(t);
  return m;
}

/// An event {pattern & care == want}.
struct PatternEvent {
  Pattern care = 0;
  Pattern want = 0;
  [[nodiscard]] bool holds(Pattern p) const { return (p & care) == want; }
};

inline double prob_of(const WindowLaw& law, const PatternEvent& e) {
  double s = 0.0;
  for (const auto& [pattern, prob] : law.entries) {
    if (e.holds(pattern)) s += prob;
  }
  return s;
}

/// Residual p(e1) - p(e2) together with its standard error under
/// multinomial sampling: Var(1_e1 - 1_e2) = P(e1 xor e2) - (p1 - p2)^2.
struct PairEstimate {
  double p1 = 0.0;
  double p2 = 0.0;
  double stderr_diff = 0.0;
};

inline PairEstimate compare_events(const WindowLaw& law, const PatternEvent& e1, const PatternEvent& e2) {
  PairEstimate out;
  double sym = 0.0;
  for (const auto& [pattern, prob] : law.entries) {
    const bool a = e1.holds(pattern);
    const bool b = e2.holds(pattern);
    if (a) out.p1 += prob;
    if (b) out.p2 += prob;
    if (a != b) sym += prob;
  }
  if (!law.is_exact() && law.source.effective_samples > 0.0) {
    const double d = out.p1 - out.p2;
    const double var = std::max(0.0, sym - d * d);
    out.stderr_diff = std::sqrt(var / law.source.effective_samples);
  }
  return out;
}

inline double tolerance_for(const WindowLaw& law, const PairEstimate& est, const ToleranceRule& rule) {
  if (law.is_exact()) return rule.exact;
  return std::max(rule.sigma * est.stderr_diff, rule.exact);
}

/// Exact pattern event: ones on `ones` and zeros elsewhere in [t1, t2].
inline PatternEvent exact_interval_event(const WindowLaw& law, const std::vector<long long>& ones,
                                         long long t1, long long t2) {
  PatternEvent e;
  e.care = interval_mask(law, t1, t2);
  for (long long t : ones) {
    if (t >= t1 && t <= t2) e.want |= law.bit(t);
  }
  return e;
}

}  // namespace detail

/// P(I_t = 1 for all t in A).
inline double prob_all_ones(const WindowLaw& law, const IndexSet& A) {
  const Pattern m = detail::mask_of(law, A.elements());
  return detail::prob_of(law, {m, m});
}

/// P(C intersect [t1,t2] = A intersect [t1,t2]) by direct pattern matching.
inline double prob_support_pattern(const WindowLaw& law, const IndexSet& A, long long t1, long long t2) {
  for (long long t : A.elements()) detail::require_in_window(law, t);
  return detail::prob_of(law, detail::exact_interval_event(law, A.elements(), t1, t2));
}

/// The same probability via the signed sum over K subset of [t1,t2] \ A of
/// (-1)^|K| P(I_t = 1 on (A intersect [t1,t2]) union K).
inline double prob_support_pattern_inclusion_exclusion(const WindowLaw& law, const IndexSet& A,
                                                       long long t1, long long t2) {
  std::vector<long long> base;
  std::vector<long long> free;
  for (long long t = t1; t <= t2; ++t) (A.contains(t) ? base : free).push_back(t);
  if (free.size() > 30) throw Error(ErrorCode::WindowTooLarge, "too many free positions");
  const Pattern base_mask = detail::mask_of(law, base);
  double total = 0.0;
  const std::uint64_t subsets = std::uint64_t{1} << free.size();
  for (std::uint64_t s = 0; s < subsets; ++s) {
    Pattern m = base_mask;
    int sign = 1;
    for (std::size_t i = 0; i < free.size(); ++i) {
      if ((s >> i) & 1U) {
        m |= law.bit(free[i]);
        sign = -sign;
      }
    }
    total += sign * detail::prob_of(law, {m, m});
  }
  return total;
}

inline CheckResult check_time_change(const WindowLaw& law, const IndexSet& A, long long a,
                                     const ToleranceRule& rule = {}) {
  const IndexSet shifted = A.shifted(a);
  const Pattern m1 = detail::mask_of(law, A.elements());
  const Pattern m2 = detail::mask_of(law, shifted.elements());
  const auto est = detail::compare_events(law, {m1, m1}, {m2, m2});
  return make_check("time_change", est.p1 - est.p2, detail::tolerance_for(law, est, rule),
                    "A=" + A.to_string() + " a=" + std::to_string(a));
}

inline CheckResult check_support_shift(const WindowLaw& law, const IndexSet& A, long long t1, long long t2,
                                       long long a, const ToleranceRule& rule = {}) {
  if (t1 > 0 || t2 < 0) throw Error(ErrorCode::BadArgument, "need t1 <= 0 <= t2");
  if (a < t1 || a > t2 || !A.contains(a)) {
    throw Error(ErrorCode::ShiftNotInSet,
                "shift " + std::to_string(a) + " not in A intersect [t1,t2]");
  }
  for (long long t : A.elements()) detail::require_in_window(law, t);
  const IndexSet shifted = A.shifted(a);
  const auto e1 = detail::exact_interval_event(law, A.elements(), t1, t2);
  const auto e2 = detail::exact_interval_event(law, shifted.elements(), t1 - a, t2 - a);
  const auto est = detail::compare_events(law, e1, e2);
  return make_check("support_shift", est.p1 - est.p2, detail::tolerance_for(law, est, rule),
                    "A=" + A.to_string() + " a=" + std::to_string(a) + " [t1,t2]=[" +
                        std::to_string(t1) + "," + std::to_string(t2) + "]");
}

/// All subsets of [-u, v] containing 0 with at most max_size elements, in
/// lexicographic order of their sorted element tuples.
inline std::vector<IndexSet> enumerate_index_sets(const WindowLaw& law, std::size_t max_size) {
  std::vector<long long> others;
  for (long long t = -law.u; t <= law.v; ++t) {
    if (t != 0) others.push_back(t);
  }
  std::vector<std::vector<long long>> tuples;
  std::vector<long long> current;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    std::vector<long long> with_zero = current;
    with_zero.push_back(0);
    std::sort(with_zero.begin(), with_zero.end());
    tuples.push_back(std::move(with_zero));
    if (current.size() + 1 >= max_size) return;
    for (std::size_t i = start; i < others.size(); ++i) {
      current.push_back(others[i]);
      self(self, i + 1);
      current.pop_back();
    }
  };
  if (max_size >= 1) rec(rec, 0);
  std::sort(tuples.begin(), tuples.end());
  std::vector<IndexSet> out;
  out.reserve(tuples.size());
  for (auto& t : tuples) out.emplace_back(std::move(t));
  return out;
}

/// Every admissible time-change and support-shift check for sets of size at
/// most max_set_size. Order: sets lexicographically, then shifts ascending,
/// then the time-change check followed by support-shift checks over
/// (t1, t2) in lexicographic order.
inline std::vector<CheckResult> sweep_invariance(const WindowLaw& law, std::size_t max_set_size,
                                                 const ToleranceRule& rule = {}) {
  if (max_set_size < 1) throw Error(ErrorCode::BadArgument, "max_set_size must be >= 1");
  std::vector<CheckResult> out;
  for (const IndexSet& A : enumerate_index_sets(law, max_set_size)) {
    for (long long a : A.elements()) {
      bool shift_fits = true;
      for (long long t : A.elements()) shift_fits = shift_fits && law.in_window(t - a);
      if (shift_fits) out.push_back(check_time_change(law, A, a, rule));
      for (long long t1 = -law.u; t1 <= 0; ++t1) {
        for (long long t2 = 0; t2 <= law.v; ++t2) {
          if (a < t1 || a > t2) continue;
          if (!law.in_window(t1 - a) || !law.in_window(t2 - a)) continue;
          out.push_back(check_support_shift(law, A, t1, t2, a, rule));
        }
      }
    }
  }
  return out;
}

}  // namespace clusterlab
