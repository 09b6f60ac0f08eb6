// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "tsm/core.hpp"

#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "tsm/builders.hpp"

namespace tsm {
namespace {

Rational Q(std::int64_t a, std::int64_t b = 1) { return Rational(a, b); }

TEST(RationalTest, ParsesFractionsAndDecimals) {
  EXPECT_EQ(parse_rational("3/4"), Q(3, 4));
  EXPECT_EQ(parse_rational("0.25"), Q(1, 4));
  EXPECT_EQ(parse_rational("-2"), Q(-2));
  EXPECT_EQ(parse_rational("6/8"), Q(3, 4));
  Rational q;
  EXPECT_FALSE(try_parse_rational("1/0", &q));
  EXPECT_FALSE(try_parse_rational("abc", &q));
  EXPECT_FALSE(try_parse_rational("", &q));
  EXPECT_EQ(to_string(Q(10, 4)), "5/2");
  EXPECT_EQ(to_string(Q(3)), "3");
}

TEST(EvaluateTest, UnitValuation) {
  Valuation v = UnitValuation{Q(5)};
  EXPECT_EQ(evaluate(v, 0b1, 2), Q(5));
  EXPECT_EQ(evaluate(v, 0b11, 2), Q(5));
  EXPECT_EQ(evaluate(v, 0, 2), Q(0));
}

TEST(EvaluateTest, XosTakesBestClause) {
  Valuation v = XosValuation{{{Q(4), Q(1)}, {Q(0), Q(3)}}};
  EXPECT_EQ(evaluate(v, 0b11, 2), Q(5));
  EXPECT_EQ(evaluate(v, 0b10, 2), Q(3));
  EXPECT_EQ(evaluate(v, 0, 2), Q(0));
}

TEST(EvaluateTest, UnknownItemIsInputError) {
  Valuation v = UnitValuation{Q(1)};
  EXPECT_THROW(evaluate(v, 0b100, 2), InputError);
}

TEST(EvaluateTest, XosIsMonotoneOnRandomClauses) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t m = 1 + rng() % 5;
    XosValuation x;
    const size_t clauses = 1 + rng() % 4;
    for (size_t c = 0; c < clauses; ++c) {
      std::vector<Rational> w;
      for (size_t j = 0; j < m; ++j) w.push_back(Q(rng() % 7, 1 + rng() % 3));
      x.clauses.push_back(w);
    }
    Valuation v = x;
    for (ItemSet t = 0; t < (ItemSet{1} << m); ++t) {
      for (ItemSet u = t; u < (ItemSet{1} << m); u = (u + 1) | t) {
        ASSERT_LE(evaluate(v, t, m), evaluate(v, u, m));
      }
      // Every clause underestimates the valuation.
      for (size_t c = 0; c < clauses; ++c) {
        ASSERT_LE(x.clause_value(c, t), x.value(t));
      }
    }
  }
}

TEST(DistributionTest, CanonicalizesAndValidates) {
  Distribution d = unit_dist({{Q(4), Q(1, 4)}, {Q(0), Q(1, 2)}, {Q(4), Q(1, 4)}});
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(unit_value(d.atoms()[0].value), Q(0));
  EXPECT_EQ(d.atoms()[1].probability, Q(1, 2));
  EXPECT_EQ(d.mean(), Q(2));
  EXPECT_THROW(unit_dist({{Q(1), Q(1, 2)}}), InputError);
  EXPECT_THROW(unit_dist({{Q(-1), Q(1)}}), InputError);
  EXPECT_THROW(unit_dist({}), InputError);
  EXPECT_THROW(unit_dist({{Q(1), Q(0)}, {Q(2), Q(1)}}), InputError);
}

TEST(UtilityTest, BuyerAndSeller) {
  Instance inst = bilateral_market(point(Q(1)), point(Q(5)));
  ValuationProfile p = sample_profile(inst, 1);
  Outcome o = Outcome::initial(inst);
  EXPECT_EQ(utility(inst, seller(0), o, p), Q(1));
  EXPECT_EQ(welfare(inst, o, p), Q(1));
  o.trade(0, 0, 0, Q(2), Q(2));
  EXPECT_EQ(utility(inst, buyer(0), o, p), Q(3));
  EXPECT_EQ(utility(inst, seller(0), o, p), Q(2));
  EXPECT_EQ(welfare(inst, o, p), Q(5));
  EXPECT_TRUE(check_outcome(inst, o).empty());
}

TEST(WelfareTest, SellersKeeping) {
  Instance inst = unit_market({}, {point(Q(1)), point(Q(2))}, Unconstrained{});
  ValuationProfile p = sample_profile(inst, 3);
  EXPECT_EQ(welfare(inst, Outcome::initial(inst), p), Q(3));
}

TEST(CheckOutcomeTest, DetectsBrokenLedger) {
  Instance inst = bilateral_market(point(Q(0)), point(Q(4)));
  Outcome o = Outcome::initial(inst);
  o.trade(0, 0, 0, Q(2), Q(2));
  o.seller_payments[0] = Q(3);
  EXPECT_FALSE(check_outcome(inst, o).empty());

  Outcome twice = Outcome::initial(inst);
  twice.trade(0, 0, 0, Q(1), Q(1));
  twice.ledger.push_back(twice.ledger.back());
  twice.buyer_payments[0] -= 1;
  twice.seller_payments[0] += 1;
  EXPECT_FALSE(check_outcome(inst, twice).empty());

  Outcome weak = Outcome::initial(inst);
  weak.trade(0, 0, 0, Q(1), Q(2));
  EXPECT_FALSE(check_outcome(inst, weak).empty());
}

TEST(InstanceTest, RejectsBadEndowments) {
  Instance inst = bilateral_market(point(Q(0)), point(Q(1)));
  inst.items.push_back("orphan");
  EXPECT_THROW(inst.validate(), InputError);
}

TEST(SampleProfileTest, DeterministicPerSeed) {
  Instance inst = unit_market({unit_dist({{Q(0), Q(1, 2)}, {Q(1), Q(1, 2)}})},
                              {point(Q(3))}, Unconstrained{});
  EXPECT_EQ(sample_profile(inst, 42), sample_profile(inst, 42));
  EXPECT_EQ(unit_value(sample_profile(inst, 9).sellers[0]), Q(3));
}

TEST(SampleProfileTest, EmpiricalMeanOfTwoPoint) {
  Instance inst = unit_market({unit_dist({{Q(0), Q(1, 2)}, {Q(1), Q(1, 2)}})},
                              {point(Q(0))}, Unconstrained{});
  std::mt19937_64 rng(2024);
  double sum = 0;
  const int draws = 10000;
  for (int t = 0; t < draws; ++t) {
    sum += to_double(unit_value(sample_profile(inst, rng).buyers[0]));
  }
  EXPECT_NEAR(sum / draws, 0.5, 0.02);
}

}  // namespace
}  // namespace tsm
