#pragma once

// End-to-end run of both worked examples: moving maxima with r in {1, 2, 3}
// and the red/yellow/green urn with rho in {0.5, 0.9}. Each example runs the
// exact calculus, the simulators and the Monte Carlo estimators, and every
// result is compared with its closed form.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "clusterlab/calculus.hpp"
#include "clusterlab/core_types.hpp"
#include "clusterlab/estimation.hpp"
#include "clusterlab/invariance.hpp"
#include "clusterlab/json_io.hpp"
#include "clusterlab/simulators.hpp"

namespace clusterlab {

/// Public operations the demo is required to reach.
inline constexpr std::array<std::string_view, 24> kPublicOperations = {
    "validate_pmf",          "pmf_tail",           "joint_tail",
    "joint_pmf",             "check_monotone",     "inspected_from_side",
    "split_conditional",     "typical_from_side",  "side_from_typical",
    "extremal_index",        "moments_report",     "prob_all_ones",
    "check_time_change",     "check_support_shift", "sweep_invariance",
    "moving_maxima_indicators", "urn_indicators",  "markov_indicators",
    "exact_window_law",      "estimate_window_law", "estimate_cluster_sizes",
    "estimate_typical",      "cross_check",        "run"};

struct DemoRow {
  std::string example;
  CheckResult check;
};

struct DemoOptions {
  std::uint64_t seed = 42;
  unsigned threads = 0;
  std::uint64_t samples = 1'000'000;
};

struct DemoResult {
  std::vector<DemoRow> rows;
  std::set<std::string> operations;

  [[nodiscard]] bool all_passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const DemoRow& r) { return r.check.passed; });
  }
};

namespace detail {

class DemoRecorder {
 public:
  explicit DemoRecorder(DemoResult& out) : out_(out) {}

  void section(std::string name) { section_ = std::move(name); }
  void use(std::string op) { out_.operations.insert(std::move(op)); }

  void add(CheckResult c) { out_.rows.push_back({section_, std::move(c)}); }
  void add(const std::string& name, double residual, double tol, std::string context = {}) {
    add(make_check(name, residual, tol, std::move(context)));
  }
  /// Passes iff value >= bound.
  void at_least(const std::string& name, double value, double bound) {
    add(name, std::max(0.0, bound - value), 0.0, "value " + format_double(value) + " >= " + format_double(bound));
  }
  void all(const std::string& name, const std::vector<CheckResult>& checks) {
    std::size_t failed = 0;
    std::string first;
    for (const auto& c : checks) {
      if (!c.passed) {
        if (failed++ == 0) first = c.identity_name + " " + c.context;
      }
    }
    add(name, static_cast<double>(failed), 0.0,
        std::to_string(checks.size()) + " checks" + (failed ? ", first failure " + first : ""));
  }

 private:
  DemoResult& out_;
  std::string section_;
};

/// 4 standard errors for the mean of n steps of a stationary two-state
/// chain: Var = pi (1 - pi) (1 + lambda) / (1 - lambda) / n, lambda = p11 - p01.
inline double chain_rate_tolerance(const MarkovParams& mk, std::size_t n) {
  const double pi = stationary_one(mk);
  const double lambda = mk.p11 - mk.p01;
  return 4.0 * std::sqrt(pi * (1.0 - pi) * (1.0 + lambda) / (1.0 - lambda) / static_cast<double>(n));
}

inline double rate_of(const BinaryPath& p) {
  return static_cast<double>(p.ones()) / static_cast<double>(p.length());
}

/// Exact calculus rows shared by both examples.
inline void exact_side_rows(DemoRecorder& rec, const ExtendedPmf& raw_side, double theta, double e_typical,
                            double e_inspected) {
  const ExtendedPmf side = validate_pmf(raw_side);
  rec.use("validate_pmf");
  rec.add("pmf_tail_origin", pmf_tail(side, 0) - 1.0, 1e-12);
  rec.use("pmf_tail");
  rec.add(check_monotone(side));
  rec.use("check_monotone");

  const ClusterReport rep = moments_report(side);
  rec.use("moments_report");
  rec.add("theta", *rep.theta - theta, 1e-12);
  rec.add("e_typical", *rep.e_typical - e_typical, 1e-10);
  rec.add("e_inspected", rep.e_inspected - e_inspected, 1e-10);
  rec.all("moment_identities", rep.checks);

  rec.add("extremal_index", extremal_index(side) - theta, 1e-12);
  rec.use("extremal_index");

  double asym = 0.0;
  double diag = 0.0;
  const ExtendedPmf insp = inspected_from_side(side);
  rec.use("inspected_from_side");
  for (long long m = 1; m <= side.support_end(); ++m) {
    double s = 0.0;
    for (long long k = 0; k < m; ++k) {
      const double a = joint_pmf(side, k, m - 1 - k);
      asym = std::max(asym, std::abs(a - joint_pmf(side, m - 1 - k, k)));
      s += a;
    }
    diag = std::max(diag, std::abs(s - insp.at(m)));
  }
  rec.use("joint_pmf");
  rec.add("joint_symmetry_exact", asym, 1e-15);
  rec.add("joint_diagonal_is_inspected", diag, 1e-12);
  rec.add("joint_tail_one_one", joint_tail(side, 1, 1) - pmf_tail(side, 2), 1e-15);
  rec.use("joint_tail");

  double mix = 0.0;
  for (long long l = 0; l < side.support_end(); ++l) {
    double s = 0.0;
    for (long long k = l + 1; k < insp.support_end(); ++k) s += insp.at(k) * split_conditional(k).at(l);
    mix = std::max(mix, std::abs(s - side.at(l)));
  }
  rec.use("split_conditional");
  rec.add("uniform_split_mixture", mix, 1e-12);

  const TypicalLaw tl = typical_from_side(side);
  rec.use("typical_from_side");
  const ExtendedPmf back = side_from_typical(tl.theta, tl.typical);
  rec.use("side_from_typical");
  double rt = 0.0;
  for (long long k = 0; k < std::max(back.support_end(), side.support_end()); ++k) {
    rt = std::max(rt, std::abs(back.at(k) - side.at(k)));
  }
  rec.add("round_trip", rt, 1e-12);

  const ExtendedPmf parsed = pmf_from_json(json::parse(to_json(side).dump()));
  rec.add("json_round_trip", parsed == side ? 0.0 : 1.0, 0.0);
}

}  // namespace detail

inline DemoResult run_demo(const DemoOptions& opt = {}) {
  DemoResult out;
  detail::DemoRecorder rec(out);

  EstimationConfig cfg;
  cfg.master_seed = opt.seed;
  cfg.threads = opt.threads;
  cfg.n_conditional_samples = opt.samples;
  cfg.run_gap = 1;

  // Moving maxima of unit Frechet innovations: S+- uniform on {0, ..., r-1}.
  for (int r = 1; r <= 3; ++r) {
    rec.section("moving_maxima r=" + std::to_string(r));
    detail::exact_side_rows(rec, uniform_pmf(0, static_cast<std::size_t>(r)), 1.0 / r, r, r);

    const ProcessSpec dense_spec = moving_maxima_spec(r, 0.99, opt.seed);
    const std::size_t n = 1'000'000;
    const BinaryPath path = moving_maxima_indicators(dense_spec, n, opt.seed);
    rec.use("moving_maxima_indicators");
    rec.add("dense_marginal_rate", detail::rate_of(path) - 0.01, 4.0 * std::sqrt(r * 0.01 * 0.99 / n));

    const ProcessSpec spec = moving_maxima_spec(r, 0.9999, opt.seed);
    const ClusterSizeEstimate cs = estimate_cluster_sizes(spec, cfg);
    rec.use("estimate_cluster_sizes");
    rec.at_least("inspected_is_r", cs.inspected.at(r), 0.95);
    rec.add("censored_fraction", cs.censored_fraction, 0.01);

    const TypicalEstimate te = estimate_typical(spec, cfg);
    rec.use("estimate_typical");
    rec.add("theta_hat", te.theta_hat - 1.0 / r, 0.01);

    const ClusterReport rep = cross_check(spec, cfg);
    rec.use("cross_check");
    for (const auto& c : rep.checks) rec.add(c);

    EstimationConfig wcfg = cfg;
    wcfg.window_u = 2;
    wcfg.window_v = 2;
    const WindowLaw law = estimate_window_law(spec, wcfg);
    rec.use("estimate_window_law");
    rec.all("empirical_invariance_sweep", sweep_invariance(law, 2, {1e-12, cfg.tolerance_sigma}));
    rec.use("sweep_invariance");
  }

  // Urn: S+- ~ Geo0(rho) with rho = g / (g + y); red fraction 1e-3.
  for (double rho : {0.5, 0.9}) {
    rec.section("urn rho=" + format_double(rho));
    const double mean_t = 1.0 / rho;
    const double mean_i = 1.0 + 2.0 * (1.0 - rho) / rho;
    detail::exact_side_rows(rec, geometric_pmf(0, rho, 200), rho, mean_t, mean_i);

    const std::uint64_t red = 10;
    const auto green = static_cast<std::uint64_t>(std::llround(rho * 9990.0));
    const ProcessSpec spec = urn_spec(green, 9990 - green, red, opt.seed);
    const MarkovParams chain = induced_chain(std::get<UrnParams>(spec.params));

    // Exact oracle for the urn's conditional law.
    const WindowLaw exact = exact_window_law(spec, 3, 3);
    rec.use("exact_window_law");
    rec.all("exact_invariance_sweep", sweep_invariance(exact, 3));
    rec.add("prob_all_ones_next", prob_all_ones(exact, {0, 1}) - chain.p11, 1e-12);
    rec.use("prob_all_ones");
    rec.add(check_time_change(exact, {-1, 0, 2}, 2));
    rec.use("check_time_change");
    rec.add(check_support_shift(exact, {-1, 0, 2}, -2, 2, -1));
    rec.use("check_support_shift");
    rec.add("support_pattern_two_routes",
            prob_support_pattern(exact, {0, 1}, -2, 3) - prob_support_pattern_inclusion_exclusion(exact, {0, 1}, -2, 3),
            1e-12);
    rec.add("zero_shift_exact", check_time_change(exact, {0, 2}, 0).residual, 0.0);

    const std::size_t n = 2'000'000;
    const BinaryPath urn_path = urn_indicators(spec, n, opt.seed);
    rec.use("urn_indicators");
    rec.add("dense_marginal_rate", detail::rate_of(urn_path) - stationary_one(chain),
            detail::chain_rate_tolerance(chain, n));
    const BinaryPath chain_path = markov_indicators(markov_spec(chain.p01, chain.p11), n, opt.seed + 1);
    rec.use("markov_indicators");
    rec.add("induced_chain_rate", detail::rate_of(chain_path) - stationary_one(chain),
            detail::chain_rate_tolerance(chain, n));

    const ClusterSizeEstimate cs = estimate_cluster_sizes(spec, cfg);
    rec.use("estimate_cluster_sizes");
    double worst = 0.0;
    for (long long k = 0; k <= 10; ++k) {
      const double want = rho * std::pow(1.0 - rho, static_cast<double>(k));
      const double se = std::sqrt(want * (1.0 - want) / cs.effective_samples);
      worst = std::max(worst, std::abs(cs.side.at(k) - want) / se);
    }
    rec.add("side_pmf_geometric_sigma", worst, cfg.tolerance_sigma, "k <= 10");
    rec.add("e_inspected_hat", cs.mean_inspected - mean_i, 0.1);

    const TypicalEstimate te = estimate_typical(spec, cfg);
    rec.use("estimate_typical");
    rec.add("e_typical_hat", te.mean - mean_t, 0.05);
    rec.add("theta_hat", te.theta_hat - rho, 4.0 * te.theta_stderr + std::abs(rho - (1.0 - chain.p11)));
    rec.at_least("inspection_gap_positive", cs.mean_inspected - te.mean, 1e-12);

    const ClusterReport rep = cross_check(spec, cfg);
    rec.use("cross_check");
    for (const auto& c : rep.checks) rec.add(c);

    EstimationConfig wcfg = cfg;
    wcfg.window_u = 3;
    wcfg.window_v = 3;
    const WindowLaw law = estimate_window_law(spec, wcfg);
    rec.use("estimate_window_law");
    double zmax = 0.0;
    for (const auto& [p, prob] : exact.entries) {
      const auto it = law.entries.find(p);
      const double got = it == law.entries.end() ? 0.0 : it->second;
      const double se = std::sqrt(prob * (1.0 - prob) / law.source.effective_samples);
      zmax = std::max(zmax, se > 0.0 ? std::abs(got - prob) / se : 0.0);
    }
    rec.add("window_law_vs_exact_sigma", zmax, cfg.tolerance_sigma);
    rec.all("empirical_invariance_sweep", sweep_invariance(law, 2, {1e-12, cfg.tolerance_sigma}));
    rec.use("sweep_invariance");
  }
  return out;
}

}  // namespace clusterlab
