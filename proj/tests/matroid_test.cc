// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "tsm/matroid.hpp"

#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "support/brute_force.hpp"

namespace tsm {
namespace {

using ::tsm::testing::brute_forest;
using ::tsm::testing::brute_max_weight;

std::vector<Rational> W(std::initializer_list<int> xs) {
  std::vector<Rational> out;
  for (int x : xs) out.emplace_back(x);
  return out;
}

TEST(MatroidTest, UniformIndependence) {
  Matroid m(UniformMatroid{3, 2});
  EXPECT_FALSE(m.is_independent(0b111));
  EXPECT_TRUE(m.is_independent(0b101));
  EXPECT_TRUE(m.is_independent(0));
  EXPECT_THROW(m.is_independent(0b1000), InputError);
}

TEST(MatroidTest, GraphicTriangleMatchesCycleOracle) {
  GraphicMatroid g{3, {{0, 1}, {1, 2}, {0, 2}}};
  Matroid m(g);
  EXPECT_EQ(m.is_independent(0b111), brute_forest(3, g.edges, 0b111));
  EXPECT_FALSE(m.is_independent(0b111));
  for (Mask s = 0; s < 8; ++s) {
    EXPECT_EQ(m.is_independent(s), brute_forest(3, g.edges, s)) << s;
  }
}

TEST(MatroidTest, PartitionCapacities) {
  Matroid m(PartitionMatroid{{0, 0, 1}, {1, 1}});
  EXPECT_TRUE(m.is_independent(0b101));
  EXPECT_FALSE(m.is_independent(0b011));
  EXPECT_THROW(Matroid(PartitionMatroid{{0, 3}, {1}}), InputError);
}

TEST(MatroidTest, ExplicitRejectsNonMatroids) {
  // Not closed under subsets.
  EXPECT_THROW(ExplicitMatroid(2, {0, 0b11}), InputError);
  // {0} and {1,2} maximal with different sizes: exchange fails.
  EXPECT_THROW(ExplicitMatroid(3, {0, 0b1, 0b10, 0b100, 0b110}), InputError);
  // Missing the empty set.
  EXPECT_THROW(ExplicitMatroid(1, {0b1}), InputError);
  EXPECT_NO_THROW(ExplicitMatroid(2, {0, 0b1, 0b10}));
}

TEST(MaxWeightBasisTest, TopTwoOfUniform) {
  Matroid m(UniformMatroid{3, 2});
  Basis b = max_weight_basis(MatroidView{&m, 0, 2}, W({5, 3, 2}));
  EXPECT_EQ(b.set, Mask{0b011});
  EXPECT_EQ(b.weight, Rational(8));
}

TEST(MaxWeightBasisTest, ContractedView) {
  Matroid m(UniformMatroid{3, 2});
  const auto w = W({5, 3, 2});
  Basis b = max_weight_basis(MatroidView{&m, 0b010, 2}, w);
  EXPECT_EQ(b.set, Mask{0b001});
  EXPECT_EQ(b.weight, Rational(5));
  MatroidView view{&m, 0b010, 2};
  Rational brute = brute_max_weight(
      3, [&](std::uint64_t s) { return view.is_independent(s); }, w);
  EXPECT_EQ(b.weight, brute);
}

TEST(MaxWeightBasisTest, ZeroRankCap) {
  Matroid m(UniformMatroid{3, 3});
  Basis b = max_weight_basis(MatroidView{&m, 0, 0}, W({5, 3, 2}));
  EXPECT_EQ(b.set, Mask{0});
  EXPECT_EQ(b.weight, Rational(0));
}

TEST(MaxWeightBasisTest, ViewConsistencyByEnumeration) {
  Matroid m(GraphicMatroid{4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {1, 3}}});
  for (Mask x = 0; x < 32; ++x) {
    if (!m.is_independent(x)) continue;
    for (size_t r = size_of(x); r <= 4; ++r) {
      MatroidView view{&m, x, r};
      for (Mask t = 0; t < 32; ++t) {
        bool expected = !(t & x) && m.is_independent(t | x) &&
                        size_of(t | x) <= r;
        ASSERT_EQ(view.is_independent(t), expected);
      }
    }
  }
}

TEST(MaxWeightBasisTest, ObjectiveShrinksWithContractionAndCap) {
  std::mt19937_64 rng(11);
  Matroid m(PartitionMatroid{{0, 0, 1, 1, 2}, {1, 2, 1}});
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Rational> w;
    for (int e = 0; e < 5; ++e) w.emplace_back(rng() % 10);
    for (Mask x = 0; x < 32; ++x) {
      if (!m.is_independent(x)) continue;
      for (size_t r = size_of(x); r <= 5; ++r) {
        Rational base = max_weight_basis(MatroidView{&m, x, r}, w).weight;
        if (r > size_of(x)) {
          ASSERT_LE(max_weight_basis(MatroidView{&m, x, r - 1}, w).weight,
                    base);
        }
        for (size_t e = 0; e < 5; ++e) {
          Mask y = x | bit(e);
          if (y == x || !m.is_independent(y) || size_of(y) > r) continue;
          ASSERT_LE(max_weight_basis(MatroidView{&m, y, r}, w).weight, base);
        }
      }
    }
  }
}

TEST(ExtendedMatroidTest, TwoZeroSellersTwoBuyers) {
  Matroid m(UniformMatroid{2, 2});
  ExtendedMatroid ext{&m, 2};
  Basis b = extended_max_weight_basis(ext, W({5, 3}), W({0, 0}));
  EXPECT_EQ(b.weight, Rational(8));
  EXPECT_EQ(b.set, Mask{0b0011});
  Rational brute = brute_max_weight(
      4, [&](std::uint64_t s) { return ext.is_independent(s); },
      W({5, 3, 0, 0}));
  EXPECT_EQ(b.weight, brute);
}

TEST(ExtendedMatroidTest, OneValuableSeller) {
  Matroid m(UniformMatroid{2, 2});
  ExtendedMatroid ext{&m, 1};
  Basis b = extended_max_weight_basis(ext, W({5, 3}), W({10}));
  EXPECT_EQ(b.set, Mask{0b100});
  EXPECT_EQ(b.weight, Rational(10));
}

TEST(ExtendedMatroidTest, AllZeroWeights) {
  Matroid m(UniformMatroid{2, 1});
  ExtendedMatroid ext{&m, 2};
  EXPECT_EQ(extended_max_weight_basis(ext, W({0, 0}), W({0, 0})).weight,
            Rational(0));
}

TEST(ExtendedMatroidTest, IndependenceMatchesDefinitionExhaustively) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const size_t n = 1 + rng() % 6;
    const size_t k = 1 + rng() % (10 - n);
    Matroid m(UniformMatroid{n, 1 + rng() % n});
    ExtendedMatroid ext{&m, k};
    for (Mask s = 0; s < (Mask{1} << (n + k)); ++s) {
      Mask b = s & full_mask(n);
      bool expected = m.is_independent(b) && size_of(s) <= k;
      ASSERT_EQ(ext.is_independent(s), expected);
    }
  }
}

}  // namespace
}  // namespace tsm
