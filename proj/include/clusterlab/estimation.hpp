#pragma once

// Monte Carlo estimation of the conditional law given I_0 = 1.
//
// Simulation runs in independent chunks. Chunk i is a stationary sparse path
// with seed derive_seed(master_seed, i); every one inside its core
// [0, core_length) is a conditioning instant. Chunks are evaluated in
// parallel batches and merged in index order until n_conditional_samples
// instants are collected, so results do not depend on the thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "clusterlab/calculus.hpp"
#include "clusterlab/core_types.hpp"
#include "clusterlab/rng.hpp"
#include "clusterlab/simulators.hpp"

namespace clusterlab {

struct EstimationConfig {
  int window_u = 2;
  int window_v = 2;
  /// Maximal scan distance W for the side counts.
  int cluster_window = 64;
  /// 0: count every one within distance W; the sample is censored when the
  /// bit at distance W is a one. g >= 1: a run of g zeros ends the cluster;
  /// the sample is censored when no such run occurs within W.
  int run_gap = 0;
  std::uint64_t n_conditional_samples = 1'000'000;
  std::uint64_t master_seed = 0;
  double tolerance_sigma = 4.0;
  /// 0 means std::thread::hardware_concurrency().
  unsigned threads = 0;
};

inline void validate_config(const EstimationConfig& cfg) {
  if (cfg.window_u < 0 || cfg.window_v < 0) throw Error(ErrorCode::BadArgument, "window extents must be >= 0");
  if (cfg.window_u + cfg.window_v + 1 > kMaxWindowWidth) throw Error(ErrorCode::WindowTooLarge, "window too wide");
  if (cfg.cluster_window < 1) throw Error(ErrorCode::BadArgument, "cluster_window must be >= 1");
  if (cfg.run_gap < 0) throw Error(ErrorCode::BadArgument, "run_gap must be >= 0");
  if (cfg.n_conditional_samples < 1) throw Error(ErrorCode::BadArgument, "n_conditional_samples must be >= 1");
  if (!(cfg.tolerance_sigma > 0.0)) throw Error(ErrorCode::BadArgument, "tolerance_sigma must be > 0");
}

/// Side count value used for a censored scan.
inline constexpr int kCensored = -1;

/// Raw counts gathered at conditioning instants.
struct ConditionalSample {
  int u = 0;
  int v = 0;
  int cluster_window = 0;
  int run_gap = 0;
  std::uint64_t instants = 0;
  std::uint64_t chunks = 0;
  std::map<Pattern, std::uint64_t> pattern_counts;
  /// Number of instants with a one at window position i (time i - u).
  std::vector<std::uint64_t> bit_ones;
  /// Counts of (S-, S+); kCensored marks a censored side.
  std::map<std::pair<int, int>, std::uint64_t> joint;

  void merge(const ConditionalSample& other) {
    instants += other.instants;
    chunks += other.chunks;
    for (const auto& [p, c] : other.pattern_counts) pattern_counts[p] += c;
    if (bit_ones.size() < other.bit_ones.size()) bit_ones.resize(other.bit_ones.size(), 0);
    for (std::size_t i = 0; i < other.bit_ones.size(); ++i) bit_ones[i] += other.bit_ones[i];
    for (const auto& [k, c] : other.joint) joint[k] += c;
  }
};

namespace detail {

inline constexpr double kInstantsPerChunk = 65536.0;
inline constexpr std::uint64_t kMaxChunks = 1U << 16;

inline long long chunk_core_length(const ProcessSpec& spec) {
  const double rate = marginal_exceedance_rate(spec);
  const double len = std::ceil(kInstantsPerChunk / std::max(rate, 1e-15));
  return static_cast<long long>(std::clamp(len, 4096.0, 1.0e12));
}

inline long long chunk_margin(const EstimationConfig& cfg) {
  return std::max({cfg.window_u, cfg.window_v, cfg.cluster_window});
}

struct SideScan {
  int count = 0;
  bool censored = false;
};

/// Scans ones[i + step], ones[i + 2 step], ... away from t = ones[i].
inline SideScan scan_side(const std::vector<long long>& ones, std::size_t i, int step, int W, int gap) {
  const long long t = ones[i];
  SideScan out;
  long long last = t;  // most recent one seen
  long long j = static_cast<long long>(i) + step;
  const auto n = static_cast<long long>(ones.size());
  while (j >= 0 && j < n) {
    const long long dist = (ones[static_cast<std::size_t>(j)] - t) * step;
    if (dist > W) break;
    const long long zeros = (ones[static_cast<std::size_t>(j)] - last) * step - 1;
    if (gap > 0 && zeros >= gap) return out;
    ++out.count;
    last = ones[static_cast<std::size_t>(j)];
    j += step;
  }
  const long long reach = (last - t) * step;
  if (gap == 0) {
    out.censored = reach == W;
  } else {
    out.censored = (W - reach) < gap;
  }
  return out;
}

inline ConditionalSample process_chunk(const ProcessSpec& spec, const EstimationConfig& cfg, std::uint64_t index) {
  const long long core = chunk_core_length(spec);
  const long long margin = chunk_margin(cfg);
  const SparsePath path = sparse_path(spec, core, margin, derive_seed(cfg.master_seed, index));
  const auto& ones = path.ones;

  ConditionalSample s;
  s.u = cfg.window_u;
  s.v = cfg.window_v;
  s.cluster_window = cfg.cluster_window;
  s.run_gap = cfg.run_gap;
  s.chunks = 1;
  s.bit_ones.assign(static_cast<std::size_t>(cfg.window_u + cfg.window_v + 1), 0);

  const auto first = std::lower_bound(ones.begin(), ones.end(), 0LL) - ones.begin();
  const auto last = std::lower_bound(ones.begin(), ones.end(), core) - ones.begin();
  for (auto i = first; i < last; ++i) {
    const long long t = ones[static_cast<std::size_t>(i)];
    ++s.instants;

    Pattern p = 0;
    for (auto j = i; j >= 0 && ones[static_cast<std::size_t>(j)] >= t - cfg.window_u; --j) {
      p |= Pattern{1} << (ones[static_cast<std::size_t>(j)] - t + cfg.window_u);
    }
    for (auto j = i + 1; j < static_cast<long long>(ones.size()) && ones[static_cast<std::size_t>(j)] <= t + cfg.window_v; ++j) {
      p |= Pattern{1} << (ones[static_cast<std::size_t>(j)] - t + cfg.window_u);
    }
    ++s.pattern_counts[p];
    for (std::size_t b = 0; b < s.bit_ones.size(); ++b) s.bit_ones[b] += (p >> b) & 1U;

    const auto idx = static_cast<std::size_t>(i);
    const SideScan left = scan_side(ones, idx, -1, cfg.cluster_window, cfg.run_gap);
    const SideScan right = scan_side(ones, idx, +1, cfg.cluster_window, cfg.run_gap);
    ++s.joint[{left.censored ? kCensored : left.count, right.censored ? kCensored : right.count}];
  }
  return s;
}

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

inline double safe_div(double a, double b) { return b > 0.0 ? a / b : 0.0; }

inline double cell_stderr(double p, double m_eff) {
  return m_eff > 0.0 ? std::sqrt(std::max(0.0, p * (1.0 - p)) / m_eff) : 0.0;
}

/// Running count / sum / sum of squares.
struct Moments {
  double n = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  void add(double x, double w) {
    n += w;
    s1 += w * x;
    s2 += w * x * x;
  }
  [[nodiscard]] double mean() const { return safe_div(s1, n); }
  [[nodiscard]] double variance() const { return std::max(0.0, safe_div(s2, n) - mean() * mean()); }
};

inline ExtendedPmf pmf_from_counts(int offset, const std::vector<double>& counts, double censored, double total) {
  ExtendedPmf p;
  p.offset = offset;
  p.probs.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) p.probs[k] = counts[k] / total;
  p.infinity_mass = censored / total;
  while (!p.probs.empty() && p.probs.back() == 0.0) p.probs.pop_back();
  return p;
}

inline void bump(std::vector<double>& v, std::size_t k, double w) {
  if (v.size() <= k) v.resize(k + 1, 0.0);
  v[k] += w;
}

}  // namespace detail

/// Gathers conditioning instants until at least cfg.n_conditional_samples
/// are available.
inline ConditionalSample collect_conditional_samples(const ProcessSpec& spec, const EstimationConfig& cfg) {
  validate_spec(spec);
  validate_config(cfg);
  const unsigned workers = detail::resolve_threads(cfg.threads);

  ConditionalSample total;
  total.u = cfg.window_u;
  total.v = cfg.window_v;
  total.cluster_window = cfg.cluster_window;
  total.run_gap = cfg.run_gap;
  total.bit_ones.assign(static_cast<std::size_t>(cfg.window_u + cfg.window_v + 1), 0);

  std::uint64_t next = 0;
  while (total.instants < cfg.n_conditional_samples && next < detail::kMaxChunks) {
    std::vector<ConditionalSample> batch(workers);
    if (workers == 1) {
      batch[0] = detail::process_chunk(spec, cfg, next);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] { batch[w] = detail::process_chunk(spec, cfg, next + w); });
      }
      for (auto& th : pool) th.join();
    }
    for (unsigned w = 0; w < workers && total.instants < cfg.n_conditional_samples; ++w) {
      total.merge(batch[w]);
    }
    next += workers;
  }
  if (total.instants == 0) {
    throw Error(ErrorCode::NoExceedances, "no conditioning instants observed for " + spec.model_name());
  }
  return total;
}

// ---------------------------------------------------------------------------
// Window law
// ---------------------------------------------------------------------------

struct ClusterSizeEstimate {
  ExtendedPmf side;       // pooled S- and S+
  ExtendedPmf inspected;  // S^i = S- + 1 + S+, infinite when either side is censored
  double censored_fraction = 0.0;
  std::uint64_t samples = 0;
  /// m / (1 + 2 E(S+-)), the dependence-deflated sample size.
  double effective_samples = 0.0;
  std::vector<double> side_stderr;
  std::vector<double> inspected_stderr;
  /// Moments over uncensored observations.
  double mean_side = 0.0;
  double mean_inspected = 0.0;
  double var_inspected = 0.0;
};

inline ClusterSizeEstimate cluster_sizes_from(const ConditionalSample& s) {
  if (s.instants == 0) throw Error(ErrorCode::NoExceedances, "empty sample");
  std::vector<double> side_counts;
  std::vector<double> insp_counts;
  double side_censored = 0.0;
  double insp_censored = 0.0;
  detail::Moments side_m;
  detail::Moments insp_m;
  for (const auto& [key, c] : s.joint) {
    const double w = static_cast<double>(c);
    for (int side : {key.first, key.second}) {
      if (side == kCensored) {
        side_censored += w;
      } else {
        detail::bump(side_counts, static_cast<std::size_t>(side), w);
        side_m.add(side, w);
      }
    }
    if (key.first == kCensored || key.second == kCensored) {
      insp_censored += w;
    } else {
      const int k = key.first + 1 + key.second;
      detail::bump(insp_counts, static_cast<std::size_t>(k - 1), w);
      insp_m.add(k, w);
    }
  }
  const double m = static_cast<double>(s.instants);
  ClusterSizeEstimate out;
  out.samples = s.instants;
  out.side = detail::pmf_from_counts(0, side_counts, side_censored, 2.0 * m);
  out.inspected = detail::pmf_from_counts(1, insp_counts, insp_censored, m);
  out.censored_fraction = out.side.infinity_mass;
  out.mean_side = side_m.mean();
  out.mean_inspected = insp_m.mean();
  out.var_inspected = insp_m.variance();
  out.effective_samples = m / (1.0 + 2.0 * out.mean_side);
  for (double p : out.side.probs) out.side_stderr.push_back(detail::cell_stderr(p, out.effective_samples));
  for (double p : out.inspected.probs) out.inspected_stderr.push_back(detail::cell_stderr(p, out.effective_samples));
  return out;
}

inline WindowLaw window_law_from(const ConditionalSample& s) {
  if (s.instants == 0) throw Error(ErrorCode::NoExceedances, "empty sample");
  const ClusterSizeEstimate cs = cluster_sizes_from(s);
  WindowLaw law;
  law.u = s.u;
  law.v = s.v;
  law.source = LawSource::empirical(s.instants, cs.effective_samples);
  const double m = static_cast<double>(s.instants);
  for (const auto& [p, c] : s.pattern_counts) law.entries.emplace(p, static_cast<double>(c) / m);
  return law;
}

inline WindowLaw estimate_window_law(const ProcessSpec& spec, const EstimationConfig& cfg) {
  return window_law_from(collect_conditional_samples(spec, cfg));
}

inline ClusterSizeEstimate estimate_cluster_sizes(const ProcessSpec& spec, const EstimationConfig& cfg) {
  return cluster_sizes_from(collect_conditional_samples(spec, cfg));
}

// ---------------------------------------------------------------------------
// Typical cluster size
// ---------------------------------------------------------------------------

struct TypicalEstimate {
  /// Fraction of instants with S- = 0.
  double theta_hat = 0.0;
  /// Fraction of instants with S+ = 0.
  double theta_hat_plus = 0.0;
  double theta_stderr = 0.0;
  ExtendedPmf typical;       // law of S^i given S- = 0
  ExtendedPmf typical_plus;  // law of S^i given S+ = 0
  std::vector<double> typical_stderr;
  std::uint64_t anchors = 0;
  std::uint64_t anchors_plus = 0;
  /// max_k |P(S^t = k) - P(S^t+ = k)|.
  double anchor_discrepancy = 0.0;
  double mean = 0.0;
  double second_moment = 0.0;
  double mean_stderr = 0.0;
  double second_moment_stderr = 0.0;
};

inline TypicalEstimate typical_from(const ConditionalSample& s) {
  std::vector<double> minus_counts;
  std::vector<double> plus_counts;
  double minus_inf = 0.0;
  double plus_inf = 0.0;
  double anchors = 0.0;
  double anchors_plus = 0.0;
  detail::Moments mom;
  detail::Moments mom_sq;
  for (const auto& [key, c] : s.joint) {
    const double w = static_cast<double>(c);
    if (key.first == 0) {
      anchors += w;
      if (key.second == kCensored) {
        minus_inf += w;
      } else {
        const int k = 1 + key.second;
        detail::bump(minus_counts, static_cast<std::size_t>(k - 1), w);
        mom.add(k, w);
        mom_sq.add(static_cast<double>(k) * k, w);
      }
    }
    if (key.second == 0) {
      anchors_plus += w;
      if (key.first == kCensored) {
        plus_inf += w;
      } else {
        detail::bump(plus_counts, static_cast<std::size_t>(key.first), w);
      }
    }
  }
  if (anchors == 0.0) throw Error(ErrorCode::NoAnchors, "no instant with S- = 0");

  const double m = static_cast<double>(s.instants);
  const ClusterSizeEstimate cs = cluster_sizes_from(s);
  TypicalEstimate out;
  out.anchors = static_cast<std::uint64_t>(anchors);
  out.anchors_plus = static_cast<std::uint64_t>(anchors_plus);
  out.theta_hat = anchors / m;
  out.theta_hat_plus = anchors_plus / m;
  out.theta_stderr = detail::cell_stderr(out.theta_hat, cs.effective_samples);
  out.typical = detail::pmf_from_counts(1, minus_counts, minus_inf, anchors);
  if (anchors_plus > 0.0) out.typical_plus = detail::pmf_from_counts(1, plus_counts, plus_inf, anchors_plus);
  out.typical_plus.offset = 1;
  const long long end = std::max(out.typical.support_end(), out.typical_plus.support_end());
  for (long long k = 1; k < end; ++k) {
    out.anchor_discrepancy = std::max(out.anchor_discrepancy, std::abs(out.typical.at(k) - out.typical_plus.at(k)));
  }
  for (double p : out.typical.probs) out.typical_stderr.push_back(detail::cell_stderr(p, anchors));
  out.mean = mom.mean();
  out.second_moment = mom_sq.mean();
  out.mean_stderr = std::sqrt(mom.variance() / std::max(mom.n, 1.0));
  out.second_moment_stderr = std::sqrt(mom_sq.variance() / std::max(mom_sq.n, 1.0));
  return out;
}

inline TypicalEstimate estimate_typical(const ProcessSpec& spec, const EstimationConfig& cfg) {
  return typical_from(collect_conditional_samples(spec, cfg));
}

// ---------------------------------------------------------------------------
// Distributional statistics on the joint counts
// ---------------------------------------------------------------------------

struct Deviation {
  /// Largest deviation in standard-error units.
  double max_sigma = 0.0;
  std::string where;
  std::uint64_t cells = 0;
};

/// Among instants with S^i = k, S- should be uniform on {0, ..., k-1}.
/// Standard errors use the k-fold deflation m_eff = n_k / k.
inline Deviation uniform_split_deviation(const ConditionalSample& s, int k) {
  std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
  double n_k = 0.0;
  for (const auto& [key, c] : s.joint) {
    if (key.first == kCensored || key.second == kCensored) continue;
    if (key.first + 1 + key.second != k) continue;
    counts[static_cast<std::size_t>(key.first)] += static_cast<double>(c);
    n_k += static_cast<double>(c);
  }
  Deviation d;
  if (n_k == 0.0) return d;
  const double p = 1.0 / k;
  const double se = detail::cell_stderr(p, n_k / k);
  for (int j = 0; j < k; ++j) {
    const double dev = std::abs(counts[static_cast<std::size_t>(j)] / n_k - p);
    const double z = se > 0.0 ? dev / se : (dev > 0.0 ? kInfinity : 0.0);
    ++d.cells;
    if (z >= d.max_sigma) {
      d.max_sigma = z;
      d.where = "k=" + std::to_string(k) + " S-=" + std::to_string(j);
    }
  }
  return d;
}

/// max |N(k,l) - N(l,k)| / sqrt(N(k,l) + N(l,k)) over cells with
/// N(k,l) + N(l,k) >= min_total.
inline Deviation joint_symmetry_deviation(const ConditionalSample& s, double min_total = 25.0) {
  Deviation d;
  for (const auto& [key, c] : s.joint) {
    const auto [k, l] = key;
    if (k == kCensored || l == kCensored || k >= l) continue;
    const auto it = s.joint.find({l, k});
    const double a = static_cast<double>(c);
    const double b = it == s.joint.end() ? 0.0 : static_cast<double>(it->second);
    if (a + b < min_total) continue;
    const double z = std::abs(a - b) / std::sqrt(a + b);
    ++d.cells;
    if (z >= d.max_sigma) {
      d.max_sigma = z;
      d.where = "(" + std::to_string(k) + "," + std::to_string(l) + ")";
    }
  }
  // Transposes that never occurred still count when the observed side is large.
  for (const auto& [key, c] : s.joint) {
    const auto [k, l] = key;
    if (k == kCensored || l == kCensored || k <= l) continue;
    if (s.joint.count({l, k}) != 0) continue;
    const double a = static_cast<double>(c);
    if (a < min_total) continue;
    const double z = std::sqrt(a);
    ++d.cells;
    if (z >= d.max_sigma) {
      d.max_sigma = z;
      d.where = "(" + std::to_string(k) + "," + std::to_string(l) + ")";
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Cross check
// ---------------------------------------------------------------------------

/// Pipes the estimated side law through the exact calculus and compares the
/// results against the directly estimated inspected and typical laws.
inline ClusterReport cross_check_from(const ConditionalSample& s, double sigma) {
  const ClusterSizeEstimate cs = cluster_sizes_from(s);
  const TypicalEstimate te = typical_from(s);
  const double m_eff = cs.effective_samples;

  ClusterReport rep;
  rep.theta = te.theta_hat;
  rep.e_side = cs.mean_side;
  rep.e_inspected = cs.mean_inspected;
  rep.e_typical = te.mean;
  rep.e_typical_second = te.second_moment;
  rep.pmf_side = cs.side;
  rep.pmf_inspected = cs.inspected;
  rep.pmf_typical = te.typical;
  rep.censored_fraction = cs.censored_fraction;
  rep.side_stderr = cs.side_stderr;
  rep.inspected_stderr = cs.inspected_stderr;
  rep.typical_stderr = te.typical_stderr;
  rep.samples = cs.samples;
  rep.effective_samples = m_eff;

  auto add = [&rep](CheckResult c) {
    rep.residuals[c.identity_name] = c.residual;
    rep.checks.push_back(std::move(c));
  };
  auto var = [m_eff](double p) { return m_eff > 0.0 ? std::max(0.0, p * (1.0 - p)) / m_eff : 0.0; };

  const double theta_side = cs.side.at(0);
  const double se_theta = te.theta_stderr;
  add(make_check("extremal_index_consistency", te.theta_hat - theta_side, sigma * se_theta,
                 "P(S- = 0) vs pooled P(S+- = 0)"));
  add(make_check("anchor_symmetry", te.theta_hat - te.theta_hat_plus, sigma * std::sqrt(2.0) * se_theta,
                 "P(S- = 0) vs P(S+ = 0)"));

  // Calculus route vs direct route for S^i and S^t, in standard-error units.
  {
    const auto terms = detail::inspected_terms(cs.side);
    const auto diffs = detail::side_differences(cs.side);
    Deviation dev_i;
    Deviation dev_t;
    const long long end = std::max<long long>(static_cast<long long>(terms.size()) + 1, cs.inspected.support_end());
    for (long long k = 1; k < end; ++k) {
      const double pk1 = cs.side.at(k - 1);
      const double pk = cs.side.at(k);
      const double calc_i = k <= static_cast<long long>(terms.size()) ? terms[static_cast<std::size_t>(k - 1)] : 0.0;
      const double direct_i = cs.inspected.at(k);
      const double se_i = std::sqrt(static_cast<double>(k * k) * (var(pk1) + var(pk)) + var(direct_i));
      const double zi = se_i > 0.0 ? std::abs(calc_i - direct_i) / se_i : (calc_i != direct_i ? kInfinity : 0.0);
      if (zi >= dev_i.max_sigma) {
        dev_i.max_sigma = zi;
        dev_i.where = "k=" + std::to_string(k);
      }
      if (theta_side > 0.0) {
        const double calc_t = k <= static_cast<long long>(diffs.size()) ? diffs[static_cast<std::size_t>(k - 1)] / theta_side : 0.0;
        const double direct_t = te.typical.at(k);
        const double se_pi = detail::cell_stderr(direct_t, static_cast<double>(te.anchors));
        const double se_t = std::sqrt(var(pk1) + var(pk)) / theta_side + se_pi;
        const double zt = se_t > 0.0 ? std::abs(calc_t - direct_t) / se_t : (calc_t != direct_t ? kInfinity : 0.0);
        if (zt >= dev_t.max_sigma) {
          dev_t.max_sigma = zt;
          dev_t.where = "k=" + std::to_string(k);
        }
      }
    }
    add(make_check("inspected_calculus", dev_i.max_sigma, sigma, "max sigma, worst at " + dev_i.where));
    add(make_check("typical_calculus", dev_t.max_sigma, sigma, "max sigma, worst at " + dev_t.where));
  }

  const double se_mean_i = std::sqrt(cs.var_inspected / std::max(m_eff, 1.0));
  {
    const double finite = 1.0 - cs.side.infinity_mass;
    const double r = theta_side * te.mean - finite;
    const double tol = sigma * (se_theta * te.mean + theta_side * te.mean_stderr) + sigma * std::sqrt(var(finite));
    add(make_check("theta_generalized", r, tol, "theta*E(S^t) - P(S+-<inf)"));
  }
  add(make_check("inspected_mean", cs.mean_inspected - 1.0 - 2.0 * cs.mean_side, sigma * se_mean_i,
                 "E(S^i) - 1 - 2E(S+-), uncensored"));
  {
    const double r = cs.mean_inspected * te.mean - te.second_moment;
    const double tol = sigma * (se_mean_i * te.mean + cs.mean_inspected * te.mean_stderr + te.second_moment_stderr);
    add(make_check("second_moment", r, tol, "E(S^i)E(S^t) - E((S^t)^2)"));
  }
  {
    const double excess = std::max(0.0, te.mean - cs.mean_inspected);
    add(make_check("mean_inequality", excess, sigma * (te.mean_stderr + se_mean_i), "max(0, E(S^t) - E(S^i))"));
    rep.residuals["inspection_gap"] = cs.mean_inspected - te.mean;
    rep.residuals["inspection_gap_stderr"] = te.mean_stderr + se_mean_i;
  }
  {
    // Empirical monotonicity of the side pmf.
    double worst = 0.0;
    std::string where = "nonincreasing";
    for (std::size_t k = 0; k + 1 < cs.side.probs.size(); ++k) {
      const double rise = cs.side.probs[k + 1] - cs.side.probs[k];
      const double se = std::sqrt(var(cs.side.probs[k]) + var(cs.side.probs[k + 1]));
      const double z = rise <= 0.0 ? 0.0 : (se > 0.0 ? rise / se : kInfinity);
      if (z > worst) {
        worst = z;
        where = "k=" + std::to_string(k);
      }
    }
    add(make_check("side_monotone", worst, sigma, "max sigma of increases, " + where));
  }
  {
    Deviation worst;
    for (int k = 2; k <= 64; ++k) {
      const Deviation d = uniform_split_deviation(s, k);
      if (d.cells == 0) continue;
      rep.residuals["uniform_split_k" + std::to_string(k)] = d.max_sigma;
      if (d.max_sigma >= worst.max_sigma) worst = d;
    }
    add(make_check("uniform_split", worst.max_sigma, sigma, "max sigma, worst at " + worst.where));
  }
  {
    const Deviation d = joint_symmetry_deviation(s);
    add(make_check("joint_symmetry", d.max_sigma, sigma,
                   "max |N(k,l)-N(l,k)|/sqrt(N(k,l)+N(l,k)), worst at " + d.where));
  }
  rep.residuals["theta_anchor_discrepancy"] = te.theta_hat - te.theta_hat_plus;
  rep.residuals["typical_anchor_max_diff"] = te.anchor_discrepancy;

  rep.notes.emplace_back("standard errors use m_eff = m / (1 + 2 E(S+-)), a heuristic correction for overlapping clusters");
  rep.notes.emplace_back("estimates are taken at a fixed model, not in the rare-event limit; pre-limit bias is not extrapolated");
  rep.notes.emplace_back("moments are computed over uncensored samples; censored mass is reported as censored_fraction");
  return rep;
}

inline ClusterReport cross_check(const ProcessSpec& spec, const EstimationConfig& cfg) {
  return cross_check_from(collect_conditional_samples(spec, cfg), cfg.tolerance_sigma);
}

}  // namespace clusterlab
