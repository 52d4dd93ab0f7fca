#include <gtest/gtest.h>

#include <random>

#include "clusterlab/invariance.hpp"
#include "clusterlab/simulators.hpp"
#include "oracles.hpp"

using namespace clusterlab;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected clusterlab::Error";
  return ErrorCode::ConfigError;
}

WindowLaw all_ones_law(int u, int v) {
  WindowLaw law;
  law.u = u;
  law.v = v;
  law.entries[(Pattern{1} << (u + v + 1)) - 1] = 1.0;
  return law;
}

/// Law of an i.i.d. Bernoulli(p) sequence given I_0 = 1.
WindowLaw bernoulli_law(int u, int v, double p) {
  WindowLaw law;
  law.u = u;
  law.v = v;
  const int w = u + v + 1;
  for (Pattern pat = 0; pat < (Pattern{1} << w); ++pat) {
    if (!((pat >> u) & 1U)) continue;
    double prob = 1.0;
    for (int i = 0; i < w; ++i) {
      if (i == u) continue;
      prob *= ((pat >> i) & 1U) ? p : 1.0 - p;
    }
    law.entries[pat] = prob;
  }
  return law;
}

}  // namespace

TEST(IndexSet, ShiftAndValidation) {
  const IndexSet A{0, 1};
  EXPECT_EQ(A.shifted(1), (IndexSet{-1, 0}));
  EXPECT_EQ(code_of([&] { (void)A.shifted(2); }), ErrorCode::ShiftNotInSet);
  EXPECT_EQ(code_of([] { IndexSet bad{1, 2}; }), ErrorCode::BadArgument);
  EXPECT_EQ(A.to_string(), "{0,1}");
}

TEST(ProbAllOnes, Examples) {
  const WindowLaw ones = all_ones_law(2, 2);
  EXPECT_EQ(prob_all_ones(ones, {0, 1}), 1.0);
  const WindowLaw iid = bernoulli_law(2, 2, 0.3);
  EXPECT_NEAR(prob_all_ones(iid, {-1, 0, 2}), 0.09, 1e-15);
  EXPECT_EQ(code_of([&] { prob_all_ones(iid, {0, 3}); }), ErrorCode::OutOfWindow);
}

TEST(ProbAllOnes, MarkovMatchesTransferMatrices) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  for (int rep = 0; rep < 20; ++rep) {
    const double p01 = unif(gen);
    const double p11 = unif(gen);
    const WindowLaw law = exact_window_law(markov_spec(p01, p11), 4, 4);
    for (const IndexSet& A : enumerate_index_sets(law, 4)) {
      EXPECT_NEAR(prob_all_ones(law, A), oracle::markov_all_ones(p01, p11, A.elements()), 1e-13)
          << A.to_string();
    }
  }
}

TEST(ProbSupportPattern, MarkovMatchesChainRule) {
  const double p01 = 0.2;
  const double p11 = 0.7;
  const WindowLaw law = exact_window_law(markov_spec(p01, p11), 3, 3);
  // C on [-1, 2] equals {0, 2}: pattern 0 1 0 1.
  EXPECT_NEAR(prob_support_pattern(law, {0, 2}, -1, 2), oracle::markov_pattern(p01, p11, {0, 1, 0, 1}),
              1e-15);
  EXPECT_NEAR(prob_support_pattern(law, {-3, 0, 1}, -2, 1), oracle::markov_pattern(p01, p11, {0, 0, 1, 1}),
              1e-15);
}

TEST(ProbSupportPattern, InclusionExclusionAgrees) {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  for (int rep = 0; rep < 10; ++rep) {
    const WindowLaw law = exact_window_law(markov_spec(unif(gen), unif(gen)), 3, 3);
    for (const IndexSet& A : enumerate_index_sets(law, 3)) {
      for (long long t1 = -3; t1 <= 0; ++t1) {
        for (long long t2 = 0; t2 <= 3; ++t2) {
          EXPECT_NEAR(prob_support_pattern(law, A, t1, t2),
                      prob_support_pattern_inclusion_exclusion(law, A, t1, t2), 1e-10);
        }
      }
    }
  }
}

TEST(CheckTimeChange, Examples) {
  const CheckResult r = check_time_change(all_ones_law(2, 2), {0, 1}, 1);
  EXPECT_EQ(r.residual, 0.0);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(code_of([] { check_time_change(all_ones_law(2, 2), {0, 1}, 2); }), ErrorCode::ShiftNotInSet);

  const CheckResult iid = check_time_change(bernoulli_law(2, 2, 0.3), {-1, 0, 1}, 1);
  EXPECT_LE(std::abs(iid.residual), 1e-15);
  EXPECT_TRUE(iid.passed);
}

TEST(CheckTimeChange, ShiftByZeroIsExactlyZero) {
  const WindowLaw law = exact_window_law(markov_spec(0.3, 0.6), 3, 3);
  for (const IndexSet& A : enumerate_index_sets(law, 3)) {
    EXPECT_EQ(check_time_change(law, A, 0).residual, 0.0);
    EXPECT_EQ(check_support_shift(law, A, -1, 1, 0).residual, 0.0);
  }
}

TEST(CheckTimeChange, DetectsNonStationaryLaw) {
  // I_0 = 1 and I_1 = 1 always, I_{-1} never: not the law of a stationary process.
  WindowLaw law;
  law.u = 1;
  law.v = 1;
  law.entries[bits_to_pattern("011")] = 1.0;
  const CheckResult r = check_time_change(law, {0, 1}, 1);
  EXPECT_EQ(r.residual, 1.0);
  EXPECT_FALSE(r.passed);
}

TEST(CheckSupportShift, Errors) {
  const WindowLaw law = all_ones_law(2, 2);
  EXPECT_EQ(code_of([&] { check_support_shift(law, {0, 1}, 1, 2, 1); }), ErrorCode::BadArgument);
  EXPECT_EQ(code_of([&] { check_support_shift(law, {0, 2}, -1, 1, 2); }), ErrorCode::ShiftNotInSet);
  EXPECT_EQ(code_of([&] { check_support_shift(law, {0, 1}, -2, 2, 1); }), ErrorCode::OutOfWindow);
}

TEST(EnumerateIndexSets, CountsAndOrder) {
  const WindowLaw law = all_ones_law(2, 2);
  const auto sets = enumerate_index_sets(law, 2);
  ASSERT_EQ(sets.size(), 5U);
  EXPECT_EQ(sets.front(), (IndexSet{-2, 0}));
  EXPECT_EQ(sets.back(), (IndexSet{0, 2}));
  // 1 + 8 + 28 subsets of the other 8 times for u = v = 4 and size <= 3.
  EXPECT_EQ(enumerate_index_sets(all_ones_law(4, 4), 3).size(), 37U);
  EXPECT_EQ(enumerate_index_sets(law, 1).size(), 1U);
}

TEST(SweepInvariance, ExactMarkovLawsPass) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> unif(0.01, 0.99);
  for (int rep = 0; rep < 10; ++rep) {
    const WindowLaw law = exact_window_law(markov_spec(unif(gen), unif(gen)), 4, 4);
    const auto checks = sweep_invariance(law, 3);
    EXPECT_GT(checks.size(), 100U);
    for (const auto& c : checks) ASSERT_TRUE(c.passed) << c.context << " " << c.residual;
  }
}

TEST(SweepInvariance, IsDeterministicAndOrdered) {
  const WindowLaw law = exact_window_law(markov_spec(0.4, 0.5), 2, 2);
  const auto a = sweep_invariance(law, 2);
  const auto b = sweep_invariance(law, 2);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].context, b[i].context);
  EXPECT_EQ(a.front().identity_name, "time_change");
  EXPECT_EQ(code_of([&] { sweep_invariance(law, 0); }), ErrorCode::BadArgument);
}

TEST(SweepInvariance, EmpiricalToleranceScalesWithSamples) {
  WindowLaw law = bernoulli_law(2, 2, 0.3);
  law.source = {LawKind::empirical, 1000, 1000.0};
  // Perturb one atom so the law is slightly non-stationary.
  law.entries[bits_to_pattern("00111")] += 0.01;
  law.entries[bits_to_pattern("00100")] -= 0.01;
  CheckResult r = check_time_change(law, {0, 1, 2}, 2);
  EXPECT_GT(r.tolerance, 1e-3);
  EXPECT_TRUE(r.passed);
  law.source.effective_samples = 1e8;
  r = check_time_change(law, {0, 1, 2}, 2);
  EXPECT_FALSE(r.passed);
}
