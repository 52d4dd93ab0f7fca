#pragma once

// Exact calculus on cluster-size laws. Everything is driven by the common
// law of the side counts S- / S+ (offset 0): the joint law of (S-, S+), the
// inspected size S^i = S- + 1 + S+, the typical size S^t and the extremal
// index theta = P(S+- = 0) all follow from it in closed form.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "clusterlab/core_types.hpp"

namespace clusterlab {

/// Relative tolerance for identity residuals in the exact calculus.
inline constexpr double kIdentityTolerance = 1e-10;

namespace detail {

inline void require_side_law(const ExtendedPmf& side, const char* op) {
  if (side.offset != 0) {
    throw Error(ErrorCode::BadOffset,
                std::string(op) + " expects a side-count law with offset 0, got offset " +
                    std::to_string(side.offset));
  }
}

/// k * (p[k-1] - p[k]) for k = 1 .. support_end, without sign checks.
inline std::vector<double> inspected_terms(const ExtendedPmf& side) {
  const auto n = side.probs.size();
  std::vector<double> out(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const double next = k < n ? side.probs[k] : 0.0;
    out[k - 1] = static_cast<double>(k) * (side.probs[k - 1] - next);
  }
  return out;
}

/// p[k-1] - p[k] for k = 1 .. support_end, without sign checks.
inline std::vector<double> side_differences(const ExtendedPmf& side) {
  const auto n = side.probs.size();
  std::vector<double> out(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const double next = k < n ? side.probs[k] : 0.0;
    out[k - 1] = side.probs[k - 1] - next;
  }
  return out;
}

inline double clamp_small_negative(double x, const char* what, std::size_t k) {
  if (x < -kNormTolerance) {
    throw Error(ErrorCode::NotMonotone, std::string(what) + " would be negative at k=" +
                                            std::to_string(k) + " (" + std::to_string(x) + ")");
  }
  return std::max(x, 0.0);
}

inline double relative_tolerance(double reference) {
  return reference == 0.0 ? kIdentityTolerance : kIdentityTolerance * std::abs(reference);
}

}  // namespace detail

/// P(S+ >= k, S- >= l) = P(S+- >= k + l).
inline double joint_tail(const ExtendedPmf& side, long long k, long long l) {
  detail::require_side_law(side, "joint_tail");
  if (k < 0 || l < 0) throw Error(ErrorCode::BadArgument, "joint_tail needs k, l >= 0");
  return pmf_tail(side, k + l);
}

/// P(S+ = k, S- = l) = P(S+- = k + l) - P(S+- = k + l + 1).
inline double joint_pmf(const ExtendedPmf& side, long long k, long long l) {
  detail::require_side_law(side, "joint_pmf");
  if (k < 0 || l < 0) throw Error(ErrorCode::BadArgument, "joint_pmf needs k, l >= 0");
  return side.at(k + l) - side.at(k + l + 1);
}

/// The side-count pmf must be nonincreasing on N0.
inline CheckResult check_monotone(const ExtendedPmf& side) {
  detail::require_side_law(side, "check_monotone");
  double worst = 0.0;
  std::size_t where = 0;
  for (std::size_t k = 0; k + 1 < side.probs.size(); ++k) {
    const double rise = side.probs[k + 1] - side.probs[k];
    if (rise > worst) {
      worst = rise;
      where = k;
    }
  }
  std::string ctx = worst > 0.0 ? "largest rise at k=" + std::to_string(where) : "nonincreasing";
  return make_check("side_pmf_nonincreasing", worst, kNormTolerance, std::move(ctx));
}

/// Law of S^i: P(S^i = k) = k [P(S+- = k-1) - P(S+- = k)]; the atom at
/// infinity carries the side law's infinite mass.
inline ExtendedPmf inspected_from_side(const ExtendedPmf& side) {
  detail::require_side_law(side, "inspected_from_side");
  ExtendedPmf out;
  out.offset = 1;
  out.probs = detail::inspected_terms(side);
  for (std::size_t i = 0; i < out.probs.size(); ++i) {
    out.probs[i] = detail::clamp_small_negative(out.probs[i], "P(S^i = k)", i + 1);
  }
  // Finite S^i mass telescopes to the finite side mass, so whatever is left
  // belongs to S^i = infinity.
  out.infinity_mass = side.infinity_mass;
  return validate_pmf(std::move(out));
}

/// Conditional law of S+- given S^i = k: uniform on {0, ..., k-1}.
inline ExtendedPmf split_conditional(long long k) {
  if (k < 1) throw Error(ErrorCode::BadArgument, "split_conditional needs k >= 1");
  return uniform_pmf(0, static_cast<std::size_t>(k));
}

/// P(S+- = 0).
inline double extremal_index(const ExtendedPmf& side) {
  detail::require_side_law(side, "extremal_index");
  return side.at(0);
}

struct TypicalLaw {
  double theta = 0.0;
  ExtendedPmf typical;
};

/// theta = P(S+- = 0) and pi_k = theta^-1 [P(S+- = k-1) - P(S+- = k)].
inline TypicalLaw typical_from_side(const ExtendedPmf& side) {
  detail::require_side_law(side, "typical_from_side");
  const double theta = extremal_index(side);
  if (!(theta > 0.0)) {
    throw Error(ErrorCode::ThetaZero, "P(S+- = 0) = 0, the typical cluster size is not defined");
  }
  ExtendedPmf typical;
  typical.offset = 1;
  typical.probs = detail::side_differences(side);
  for (std::size_t i = 0; i < typical.probs.size(); ++i) {
    typical.probs[i] = detail::clamp_small_negative(typical.probs[i], "pi_k", i + 1) / theta;
  }
  return {theta, validate_pmf(std::move(typical))};
}

inline double mean_of(const ExtendedPmf& p) {
  if (p.infinity_mass > 0.0) return kInfinity;
  double s = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    s += static_cast<double>(p.offset + static_cast<long long>(i)) * p.probs[i];
  }
  return s;
}

inline double second_moment_of(const ExtendedPmf& p) {
  if (p.infinity_mass > 0.0) return kInfinity;
  double s = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    const double k = static_cast<double>(p.offset + static_cast<long long>(i));
    s += k * k * p.probs[i];
  }
  return s;
}

/// P(S+- = l) = theta * P(S^t >= l + 1). P(S+- = infinity) is whatever
/// mass theta * E(S^t) leaves over.
inline ExtendedPmf side_from_typical(double theta, const ExtendedPmf& typical) {
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw Error(ErrorCode::BadTheta, "theta must lie in (0,1], got " + std::to_string(theta));
  }
  if (typical.offset != 1) {
    throw Error(ErrorCode::BadOffset, "typical law must have offset 1");
  }
  if (typical.infinity_mass != 0.0) {
    throw Error(ErrorCode::BadArgument, "typical cluster size must be finite almost surely");
  }
  const auto n = typical.probs.size();
  ExtendedPmf side;
  side.offset = 0;
  side.probs.assign(n, 0.0);
  double tail = 0.0;
  for (std::size_t l = n; l-- > 0;) {
    tail += typical.probs[l];  // P(S^t >= l + 1)
    side.probs[l] = theta * tail;
  }
  const double used = theta * mean_of(typical);
  if (used > 1.0 + kNormTolerance) {
    throw Error(ErrorCode::MassOverflow,
                "theta * E(S^t) = " + std::to_string(used) + " exceeds 1");
  }
  // Below the normalisation tolerance the leftover is rounding, not mass.
  const double leftover = 1.0 - used;
  side.infinity_mass = leftover > kNormTolerance ? leftover : 0.0;
  return validate_pmf(std::move(side));
}

/// Exact moment identities for a side law.
inline ClusterReport moments_report(const ExtendedPmf& side_in) {
  const ExtendedPmf side = validate_pmf(side_in);
  detail::require_side_law(side, "moments_report");

  ClusterReport rep;
  rep.pmf_side = side;
  rep.censored_fraction = 0.0;

  const CheckResult monotone = check_monotone(side);
  if (!monotone.passed) {
    throw Error(ErrorCode::NotMonotone, "side law is not nonincreasing (" + monotone.context + ")");
  }
  rep.checks.push_back(monotone);

  const double theta = extremal_index(side);
  rep.theta = theta;
  rep.pmf_inspected = inspected_from_side(side);
  rep.e_side = mean_of(side);
  rep.e_inspected = mean_of(rep.pmf_inspected);

  if (theta == 0.0) {
    // theta = 0 <=> P(S+- = inf) = 1 <=> P(S^i = inf) = 1.
    const double r = std::abs(side.infinity_mass - 1.0) + std::abs(rep.pmf_inspected.infinity_mass - 1.0);
    rep.residuals["theta_zero_equivalence"] = r;
    rep.checks.push_back(make_check("theta_zero_equivalence", r, kNormTolerance,
                                    "theta=0 with S+- and S^i infinite"));
    rep.notes.emplace_back("theta = 0: typical cluster size undefined");
    return rep;
  }

  const TypicalLaw tl = typical_from_side(side);
  rep.pmf_typical = tl.typical;
  const double et = mean_of(tl.typical);
  const double et2 = second_moment_of(tl.typical);
  rep.e_typical = et;
  rep.e_typical_second = et2;

  const double finite_side = 1.0 - side.infinity_mass;
  const double r_gen = theta * et - finite_side;
  rep.residuals["theta_generalized"] = r_gen;
  rep.checks.push_back(make_check("theta_generalized", r_gen, detail::relative_tolerance(finite_side),
                                  "theta*E(S^t) - P(S+-<inf)"));

  if (std::isfinite(rep.e_inspected) && std::isfinite(rep.e_side)) {
    const double ref = 1.0 + 2.0 * rep.e_side;
    const double r_mean = rep.e_inspected - ref;
    rep.residuals["inspected_mean"] = r_mean;
    rep.checks.push_back(make_check("inspected_mean", r_mean, detail::relative_tolerance(ref),
                                    "E(S^i) - 1 - 2E(S+-)"));

    const double r_second = rep.e_inspected * et - et2;
    rep.residuals["second_moment"] = r_second;
    rep.checks.push_back(make_check("second_moment", r_second, detail::relative_tolerance(et2),
                                    "E(S^i)E(S^t) - E((S^t)^2)"));

    const double r_theta_mean = 1.0 / theta - et;
    rep.residuals["theta_reciprocal_mean"] = r_theta_mean;
    rep.checks.push_back(make_check("theta_reciprocal_mean", r_theta_mean,
                                    detail::relative_tolerance(et), "1/theta - E(S^t)"));
  } else {
    rep.notes.emplace_back("E(S^i) infinite: mean and second-moment identities skipped");
  }

  const double excess = std::isfinite(rep.e_inspected) ? std::max(0.0, et - rep.e_inspected) : 0.0;
  rep.residuals["mean_inequality"] = excess;
  rep.residuals["inspection_gap"] = rep.e_inspected - et;
  rep.checks.push_back(make_check("mean_inequality", excess,
                                  detail::relative_tolerance(std::isfinite(rep.e_inspected) ? rep.e_inspected : 0.0),
                                  "max(0, E(S^t) - E(S^i))"));
  return rep;
}

}  // namespace clusterlab
