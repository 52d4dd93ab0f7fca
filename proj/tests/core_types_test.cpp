#include <gtest/gtest.h>

#include <random>

#include "clusterlab/core_types.hpp"
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

}  // namespace

TEST(ValidatePmf, AcceptsNormalisedLaw) {
  ExtendedPmf p{0, {0.5, 0.5}, 0.0};
  EXPECT_EQ(validate_pmf(p), p);
}

TEST(ValidatePmf, TrimsTrailingZeros) {
  ExtendedPmf p{0, {1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0, 0.0}, 0.0};
  const ExtendedPmf q = validate_pmf(p);
  ASSERT_EQ(q.probs.size(), 3U);
  EXPECT_DOUBLE_EQ(q.probs[2], 1.0 / 3);
}

TEST(ValidatePmf, RejectsBadMass) {
  EXPECT_EQ(code_of([] { validate_pmf({0, {0.5, 0.6}, 0.0}); }), ErrorCode::NotNormalized);
  EXPECT_EQ(code_of([] { validate_pmf({0, {1.5, -0.5}, 0.0}); }), ErrorCode::NegativeMass);
  EXPECT_EQ(code_of([] { validate_pmf({0, {0.5}, -0.5}); }), ErrorCode::NegativeMass);
  EXPECT_EQ(code_of([] { validate_pmf({2, {1.0}, 0.0}); }), ErrorCode::BadOffset);
}

TEST(ValidatePmf, NormalisationWithinTolerance) {
  EXPECT_NO_THROW(validate_pmf({1, {0.5, 0.5 + 0.5e-9}, 0.0}));
  EXPECT_EQ(code_of([] { validate_pmf({1, {0.5, 0.5 + 2e-9}, 0.0}); }), ErrorCode::NotNormalized);
}

TEST(ValidatePmf, CanonicalisationIsIdempotent) {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 200; ++i) {
    ExtendedPmf p = oracle::random_monotone_side(gen, 12, i % 3 == 0 ? 0.25 : 0.0);
    p.probs.resize(p.probs.size() + static_cast<std::size_t>(i % 4), 0.0);
    const ExtendedPmf once = validate_pmf(p);
    EXPECT_EQ(validate_pmf(once), once);
  }
}

TEST(PmfTail, Examples) {
  EXPECT_DOUBLE_EQ(pmf_tail(geometric_pmf(0, 0.5, 200), 2), 0.25);
  EXPECT_DOUBLE_EQ(pmf_tail(ExtendedPmf{0, {0.2, 0.3}, 0.5}, 1), 0.8);
  EXPECT_EQ(pmf_tail(ExtendedPmf{1, {0.2, 0.8}, 0.0}, 1), 1.0);
}

TEST(PmfTail, NonincreasingAndOneAtOffset) {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 200; ++i) {
    const ExtendedPmf p = validate_pmf(oracle::random_monotone_side(gen, 20, i % 2 ? 0.1 : 0.0));
    EXPECT_EQ(pmf_tail(p, p.offset), 1.0);
    double prev = 1.0;
    for (long long k = p.offset; k <= p.support_end() + 2; ++k) {
      const double t = pmf_tail(p, k);
      EXPECT_LE(t, prev + 1e-15);
      prev = t;
    }
    EXPECT_NEAR(pmf_tail(p, p.support_end()), p.infinity_mass, 1e-15);
  }
}

TEST(WindowLaw, BitOrderingAnchorsTimeZeroAtIndexU) {
  WindowLaw law;
  law.u = 2;
  law.v = 1;
  EXPECT_EQ(law.bit_index(0), 2);
  EXPECT_EQ(pattern_to_bits(law.bit(0) | law.bit(-2), law.width()), "1010");
  EXPECT_EQ(bits_to_pattern("1010"), law.bit(0) | law.bit(-2));
}

TEST(WindowLaw, ValidationEnforcesAnchorAndMass) {
  WindowLaw law;
  law.u = 1;
  law.v = 1;
  law.entries[bits_to_pattern("010")] = 0.5;
  law.entries[bits_to_pattern("011")] = 0.5;
  EXPECT_NO_THROW(validate_window_law(law));

  WindowLaw bad = law;
  bad.entries[bits_to_pattern("100")] = 0.1;
  bad.entries[bits_to_pattern("010")] = 0.4;
  EXPECT_EQ(code_of([&] { validate_window_law(bad); }), ErrorCode::BadArgument);

  WindowLaw unnormalised = law;
  unnormalised.entries[bits_to_pattern("110")] = 0.1;
  EXPECT_EQ(code_of([&] { validate_window_law(unnormalised); }), ErrorCode::NotNormalized);

  EXPECT_EQ(code_of([] { bits_to_pattern("01x"); }), ErrorCode::BadArgument);
}

TEST(ProcessSpec, ParameterRanges) {
  EXPECT_NO_THROW(validate_spec(moving_maxima_spec(3, 0.99)));
  EXPECT_EQ(code_of([] { validate_spec(moving_maxima_spec(0, 0.99)); }), ErrorCode::BadArgument);
  EXPECT_EQ(code_of([] { validate_spec(moving_maxima_spec(2, 1.0)); }), ErrorCode::BadArgument);
  EXPECT_EQ(code_of([] { validate_spec(urn_spec(1, 1, 0)); }), ErrorCode::BadArgument);
  EXPECT_EQ(code_of([] { validate_spec(urn_spec(0, 1, 1)); }), ErrorCode::BadArgument);
  EXPECT_EQ(code_of([] { validate_spec(markov_spec(0.0, 0.5)); }), ErrorCode::Degenerate);
  EXPECT_EQ(code_of([] { validate_spec(markov_spec(0.5, 1.0)); }), ErrorCode::Degenerate);
  EXPECT_EQ(code_of([] { validate_spec(markov_spec(1.5, 0.5)); }), ErrorCode::BadArgument);
  EXPECT_EQ(markov_spec(0.1, 0.6).model_name(), "markov_binary");
}

TEST(CheckResult, PassedIffWithinTolerance) {
  EXPECT_TRUE(make_check("x", 1e-13, 1e-12).passed);
  EXPECT_TRUE(make_check("x", -1e-12, 1e-12).passed);
  EXPECT_FALSE(make_check("x", 2e-12, 1e-12).passed);
  EXPECT_FALSE(make_check("x", std::nan(""), 1.0).passed);
}
