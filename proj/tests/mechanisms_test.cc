// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "support/brute_force.hpp"
#include "tsm/builders.hpp"
#include "tsm/mechanisms/mechanism.hpp"
#include "tsm/oracles.hpp"

namespace tsm {
namespace {

using ::tsm::testing::brute_max_weight;

Rational Q(std::int64_t a, std::int64_t b = 1) { return Rational(a, b); }

Distribution TwoPoint(int a, int b) {
  return unit_dist({{Q(a), Q(1, 2)}, {Q(b), Q(1, 2)}});
}

ValuationProfile UnitProfile(std::vector<Rational> buyers,
                             std::vector<Rational> sellers) {
  ValuationProfile p;
  for (auto& v : buyers) p.buyers.push_back(UnitValuation{v});
  for (auto& v : sellers) p.sellers.push_back(UnitValuation{v});
  return p;
}

// The only profile of a deterministic instance.
ValuationProfile OnlyProfile(const Instance& inst) {
  ValuationProfile out;
  for_each_profile(inst, [&](const ValuationProfile& p, const Rational&) {
    out = p;
  });
  return out;
}

void ExpectRecord(const TradeRecord& r, size_t buyer, size_t seller,
                  const Rational& pays, const Rational& receives) {
  EXPECT_EQ(r.buyer, buyer);
  EXPECT_EQ(r.seller, seller);
  EXPECT_EQ(r.buyer_pays, pays);
  EXPECT_EQ(r.seller_receives, receives);
}

std::vector<Rational> OfferedTo(const Outcome& o, AgentId a) {
  std::vector<Rational> out;
  for (const auto& off : o.offers) {
    if (off.agent == a) out.push_back(off.price);
  }
  return out;
}

// --- bilateral -----------------------------------------------------------

TEST(BilateralTest, TradesAtHalfTheExpectedMax) {
  Instance inst = bilateral_market(point(Q(0)), point(Q(1)));
  auto engine = ExpectationEngine::exact();
  Outcome o = run_bilateral(inst, OnlyProfile(inst), engine);
  ASSERT_EQ(o.ledger.size(), 1u);
  ExpectRecord(o.ledger[0], 0, 0, Q(1, 2), Q(1, 2));
  EXPECT_EQ(welfare(inst, o, OnlyProfile(inst)), Q(1));
}

TEST(BilateralTest, SellerKeepsAboveThePrice) {
  Instance inst = bilateral_market(point(Q(3)), point(Q(1)));
  Outcome o = run_bilateral(inst, OnlyProfile(inst), ExpectationEngine::exact());
  EXPECT_TRUE(o.ledger.empty());
  EXPECT_EQ(OfferedTo(o, seller(0)), std::vector<Rational>{Q(3, 2)});
  EXPECT_EQ(welfare(inst, o, OnlyProfile(inst)), Q(3));
}

TEST(BilateralTest, ZeroValuesGiveZeroWelfare) {
  Instance inst = bilateral_market(point(Q(0)), point(Q(0)));
  auto p = OnlyProfile(inst);
  Outcome o = run_bilateral(inst, p, ExpectationEngine::exact());
  // v_b >= p >= v_s holds with equality at p = 0: the item changes hands for
  // nothing.
  EXPECT_EQ(welfare(inst, o, p), Q(0));
  EXPECT_EQ(utility(inst, buyer(0), o, p), Q(0));
  EXPECT_EQ(utility(inst, seller(0), o, p), Q(0));
}

TEST(BilateralTest, RejectsLargerMarkets) {
  Instance inst = unit_market({point(Q(1)), point(Q(1))}, {point(Q(0))},
                              Unconstrained{});
  EXPECT_THROW(run_bilateral(inst, OnlyProfile(inst), Q(1)), ContractViolation);
}

// --- matroid SBB ---------------------------------------------------------

Instance FiveThree() {
  return matroid_market({point(Q(5)), point(Q(3))}, {point(Q(0)), point(Q(0))},
                        UniformMatroid{2, 2});
}

TEST(MatroidSbbTest, TwoTradesRecomputePrices) {
  Instance inst = FiveThree();
  auto p = OnlyProfile(inst);
  Outcome o = run_matroid_sbb(inst, p, ExpectationEngine::exact());
  ASSERT_EQ(o.ledger.size(), 2u);
  ExpectRecord(o.ledger[0], 0, 0, Q(5, 3), Q(5, 3));
  ExpectRecord(o.ledger[1], 1, 1, Q(1), Q(1));
  EXPECT_EQ(welfare(inst, o, p), Q(8));
  auto opt = opt_all_agents_matroid(ExtendedMatroid{&inst.matroid(), 2},
                                    p.buyer_values(), p.seller_values(), 0);
  EXPECT_EQ(opt.weight, Q(8));
  EXPECT_TRUE(check_outcome(inst, o).empty());
}

TEST(MatroidSbbTest, ExpensiveSellerKeeps) {
  Instance inst = matroid_market({point(Q(1))}, {point(Q(100))},
                                 UniformMatroid{1, 1});
  auto p = OnlyProfile(inst);
  Outcome o = run_matroid_sbb(inst, p, ExpectationEngine::exact());
  EXPECT_EQ(OfferedTo(o, seller(0)), std::vector<Rational>{Q(101, 3)});
  EXPECT_TRUE(o.ledger.empty());
  EXPECT_EQ(o.seller_payments[0], Q(0));
  EXPECT_EQ(welfare(inst, o, p), Q(100));
}

TEST(MatroidSbbTest, NoBuyersEveryoneKeeps) {
  Instance inst = matroid_market({}, {point(Q(2)), point(Q(7))},
                                 UniformMatroid{0, 0});
  auto p = OnlyProfile(inst);
  Outcome o = run_matroid_sbb(inst, p, ExpectationEngine::exact());
  EXPECT_EQ(o, Outcome::initial(inst));
  EXPECT_EQ(welfare(inst, o, p), Q(9));
}

TEST(MatroidSbbTest, InfeasibleBuyerIsDropped) {
  // Rank one: after b0 buys, b1 is infeasible and s1 keeps.
  Instance inst = matroid_market({point(Q(5)), point(Q(3))},
                                 {point(Q(0)), point(Q(0))},
                                 UniformMatroid{2, 1});
  auto p = OnlyProfile(inst);
  Outcome o = run_matroid_sbb(inst, p, ExpectationEngine::exact());
  ASSERT_EQ(o.ledger.size(), 1u);
  EXPECT_EQ(o.ledger[0].buyer, 0u);
  EXPECT_EQ(o.buyer_items[1], 0u);
  EXPECT_EQ(welfare(inst, o, p), Q(5));
}

TEST(MatroidSbbTest, RejectsOtherConstraints) {
  Instance inst = knapsack_market({point(Q(1))}, {Q(1, 2)},
                                  {point(Q(0)), point(Q(0))});
  EXPECT_THROW(run_matroid_sbb(inst, OnlyProfile(inst),
                               ExpectationEngine::exact()),
               ContractViolation);
}

TEST(MatroidSbbTest, MutantsChangeTheObviousThing) {
  Instance inst = FiveThree();
  auto p = OnlyProfile(inst);
  MatroidSbbPricer pricer(inst, ExpectationEngine::exact());
  Outcome shaved = run_matroid_sbb(pricer, p, SbbVariant::kPriceShaving);
  EXPECT_EQ(shaved.ledger[0].buyer_pays, Q(10, 3));  // (5/3 + 5) / 2

  Instance keep = matroid_market({point(Q(150))}, {point(Q(100))},
                                 UniformMatroid{1, 1});
  auto kp = OnlyProfile(keep);
  MatroidSbbPricer kpricer(keep, ExpectationEngine::exact());
  EXPECT_TRUE(run_matroid_sbb(kpricer, kp).ledger.empty());
  Outcome forced = run_matroid_sbb(kpricer, kp, SbbVariant::kForcedTrade);
  ASSERT_EQ(forced.ledger.size(), 1u);
  EXPECT_LT(utility(keep, seller(0), forced, kp),
            outside_option(keep, seller(0), kp));

  Instance low = matroid_market({TwoPoint(2, 10)}, {point(Q(0))},
                                UniformMatroid{1, 1});
  MatroidSbbPricer lpricer(low, ExpectationEngine::exact());
  auto lp = UnitProfile({Q(2)}, {Q(0)});
  // p = (6 + 0) / 3 = 2; buyer at 2 declines, then takes 1.
  EXPECT_TRUE(run_matroid_sbb(lpricer, lp).ledger.empty());
  Outcome again = run_matroid_sbb(lpricer, lp, SbbVariant::kReOffer);
  ASSERT_EQ(again.ledger.size(), 1u);
  EXPECT_EQ(again.ledger[0].buyer_pays, Q(1));
}

Instance RandomMatroidMarket(std::mt19937& rng) {
  size_t n = 1 + rng() % 3, k = 1 + rng() % 3;
  auto dist = [&]() {
    int a = static_cast<int>(rng() % 4);
    return rng() % 2 ? point(Q(a)) : TwoPoint(a, a + 1 + rng() % 5);
  };
  std::vector<Distribution> b, s;
  for (size_t i = 0; i < n; ++i) b.push_back(dist());
  for (size_t j = 0; j < k; ++j) s.push_back(dist());
  Matroid m = rng() % 2 ? Matroid(UniformMatroid{n, 1 + rng() % n})
                        : Matroid(PartitionMatroid{
                              [&] {
                                std::vector<size_t> blk(n);
                                for (auto& x : blk) x = rng() % 2;
                                return blk;
                              }(),
                              {1, 1}});
  return matroid_market(b, s, m);
}

TEST(MatroidSbbTest, OfferedPricesAreMonotone) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    Instance inst = RandomMatroidMarket(rng);
    MatroidSbbPricer pricer(inst, ExpectationEngine::exact());
    for_each_profile(inst, [&](const ValuationProfile& p, const Rational&) {
      Outcome o = run_matroid_sbb(pricer, p);
      EXPECT_TRUE(check_outcome(inst, o).empty());
      Mask bought = 0;
      for (const auto& r : o.ledger) {
        EXPECT_EQ(r.buyer_pays, r.seller_receives);
        bought |= bit(r.buyer);
      }
      EXPECT_TRUE(inst.matroid().is_independent(bought));
      for (size_t j = 0; j < inst.k(); ++j) {
        auto seen = OfferedTo(o, seller(j));
        EXPECT_TRUE(std::is_sorted(seen.rbegin(), seen.rend()));
      }
      for (size_t i = 0; i < inst.n(); ++i) {
        auto seen = OfferedTo(o, buyer(i));
        EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
      }
      EXPECT_EQ(run_matroid_sbb(pricer, p), o);
    });
  }
}

// --- matroid WBB ---------------------------------------------------------

TEST(MatroidWbbTest, BothSellersOfferAndBothTrade) {
  Instance inst = FiveThree();
  auto p = OnlyProfile(inst);
  Outcome o = run_matroid_wbb(inst, p, ArrivalOrder::index_order(),
                              ExpectationEngine::exact());
  EXPECT_EQ(OfferedTo(o, seller(0)), std::vector<Rational>{Q(3, 2)});
  EXPECT_EQ(OfferedTo(o, seller(1)), std::vector<Rational>{Q(3, 2)});
  ASSERT_EQ(o.ledger.size(), 2u);
  ExpectRecord(o.ledger[0], 0, 0, Q(5, 2), Q(3, 2));
  ExpectRecord(o.ledger[1], 1, 1, Q(3, 2), Q(3, 2));
  EXPECT_EQ(welfare(inst, o, p), Q(8));
}

// F(X) over the 16 profiles of the branch fixture, by brute force.
Rational FixtureF(const Instance& inst, Mask x) {
  Rational total = 0;
  for_each_profile(inst, [&](const ValuationProfile& p, const Rational& w) {
    std::vector<Rational> v = p.buyer_values();
    for (const auto& s : p.seller_values()) v.push_back(s);
    Rational best = brute_max_weight(
        4,
        [&](std::uint64_t s) {
          // two slots in total, buyer matroid has rank two
          return !(s & x) && std::popcount(s | x) <= 2;
        },
        v);
    total += w * best;
  });
  return total;
}

TEST(MatroidWbbTest, SellerKeepsWhenBuyerPriceUndercutsThreshold) {
  Instance inst = matroid_market({TwoPoint(4, 12), TwoPoint(0, 6)},
                                 {TwoPoint(4, 12), TwoPoint(0, 2)},
                                 UniformMatroid{2, 2});
  auto p = UnitProfile({Q(4), Q(0)}, {Q(4), Q(0)});
  Rational f0 = FixtureF(inst, 0);
  Rational t0 = (f0 - FixtureF(inst, 0b0100)) / 2;
  Rational t1 = (f0 - FixtureF(inst, 0b1000)) / 2;
  Rational pb0 = (f0 - FixtureF(inst, 0b0001)) / 2;
  Rational pb1 = (f0 - FixtureF(inst, 0b0010)) / 2;
  EXPECT_EQ(t0, Q(33, 8));
  ASSERT_GE(pb0, t0);
  ASSERT_LT(pb1, t0);

  MatroidWbbPricer pricer(inst, ExpectationEngine::exact());
  MatroidWbbAuction auction(pricer);
  play(auction, p, ArrivalOrder::index_order());
  const Outcome& o = auction.outcome();
  EXPECT_EQ(OfferedTo(o, seller(0)), (std::vector<Rational>{t0, pb1}));
  EXPECT_EQ(OfferedTo(o, seller(1)), std::vector<Rational>{t1});
  EXPECT_EQ(OfferedTo(o, buyer(0)), std::vector<Rational>{pb0});
  EXPECT_EQ(OfferedTo(o, buyer(1)), std::vector<Rational>{pb1});
  EXPECT_TRUE(o.ledger.empty());
  // b1 entered A' although s0 kept the item.
  EXPECT_EQ(auction.charging_set(), Mask{0b0010});
  ASSERT_EQ(auction.charged().size(), 1u);
  EXPECT_EQ(auction.charged()[0].price, pb1);
  EXPECT_EQ(welfare(inst, o, p), Q(4));
}

TEST(MatroidWbbTest, NoPendingSellersMeansNoTrade) {
  Instance inst = matroid_market({point(Q(1)), point(Q(1))},
                                 {point(Q(10)), point(Q(10))},
                                 UniformMatroid{2, 2});
  auto p = OnlyProfile(inst);
  Outcome o = run_matroid_wbb(inst, p, ArrivalOrder::index_order(),
                              ExpectationEngine::exact());
  EXPECT_TRUE(o.ledger.empty());
  EXPECT_EQ(o.buyer_items, Outcome::initial(inst).buyer_items);
  EXPECT_EQ(o.seller_items, Outcome::initial(inst).seller_items);
}

TEST(MatroidWbbTest, OrderMustNameEveryAgent) {
  Instance inst = FiveThree();
  auto p = OnlyProfile(inst);
  auto order = ArrivalOrder::sequence({seller(0), seller(1), buyer(1)});
  EXPECT_THROW(run_matroid_wbb(inst, p, order, ExpectationEngine::exact()),
               InputError);
  auto twice = ArrivalOrder::sequence(
      {seller(0), seller(1), buyer(1), buyer(1), buyer(0)});
  EXPECT_THROW(run_matroid_wbb(inst, p, twice, ExpectationEngine::exact()),
               InputError);
}

TEST(MatroidWbbTest, SequenceAndMatchRuleAreHonored) {
  Instance inst = FiveThree();
  auto p = OnlyProfile(inst);
  auto order = ArrivalOrder::sequence(
      {buyer(1), seller(0), buyer(0), seller(1)}, MatchRule::kHighestIndex);
  Outcome o = run_matroid_wbb(inst, p, order, ExpectationEngine::exact());
  ASSERT_EQ(o.ledger.size(), 2u);
  EXPECT_EQ(o.ledger[0].buyer, 1u);
  EXPECT_EQ(o.ledger[0].seller, 1u);
  EXPECT_EQ(o.ledger[1].buyer, 0u);
  EXPECT_EQ(o.ledger[1].seller, 0u);
}

TEST(MatroidWbbTest, ThresholdsNeverIncreaseAndBudgetIsWeak) {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    Instance inst = RandomMatroidMarket(rng);
    MatroidWbbPricer pricer(inst, ExpectationEngine::exact());
    for_each_profile(inst, [&](const ValuationProfile& p, const Rational&) {
      for (MatchRule rule : {MatchRule::kLowestIndex, MatchRule::kHighestIndex}) {
        MatroidWbbAuction a(pricer);
        auto order = ArrivalOrder::index_order(rule);
        std::vector<Rational> last;
        while (!a.done()) {
          Move m = order.next(a);
          a.step(m, p.at(m.agent));
          if (!last.empty()) {
            for (size_t j = 0; j < inst.k(); ++j) {
              if (last[j] != 0) EXPECT_LE(a.thresholds()[j], last[j]);
            }
          }
          last = a.thresholds();
        }
        const Outcome& o = a.outcome();
        EXPECT_TRUE(check_outcome(inst, o).empty());
        for (const auto& r : o.ledger) EXPECT_GE(r.buyer_pays, r.seller_receives);
        Rational charged = 0;
        for (const auto& c : a.charged()) charged += c.price;
        EXPECT_EQ(charged, (pricer.expected_opt(0) -
                            pricer.expected_opt(a.charging_set())) /
                               2);
      }
    });
  }
}

// --- combinatorial -------------------------------------------------------

TEST(CombinatorialTest, SingleItemTrade) {
  Instance inst = bilateral_market(point(Q(0)), point(Q(4)));
  auto p = OnlyProfile(inst);
  auto prices = combinatorial_item_prices(inst, ExpectationEngine::exact());
  Outcome o = run_combinatorial(inst, p, ArrivalOrder::index_order(), prices);
  ASSERT_EQ(o.ledger.size(), 1u);
  ExpectRecord(o.ledger[0], 0, 0, Q(2), Q(2));
  EXPECT_EQ(welfare(inst, o, p), Q(4));
  EXPECT_EQ(utility(inst, buyer(0), o, p), Q(2));
  EXPECT_EQ(utility(inst, seller(0), o, p), Q(2));
}

Instance AdditivePair() {
  Instance inst;
  inst.items = {"a", "b"};
  inst.buyers.push_back({"b0", Distribution(Valuation(additive({Q(2), Q(5)})))});
  Agent s{"s0", Distribution(Valuation(additive({Q(3), Q(1)})))};
  s.endowment = 0b11;
  inst.sellers.push_back(s);
  inst.constraint = Unconstrained{};
  inst.validate();
  return inst;
}

TEST(CombinatorialTest, AdditiveSellerKeepsOneItem) {
  Instance inst = AdditivePair();
  auto p = OnlyProfile(inst);
  auto prices = combinatorial_item_prices(inst, ExpectationEngine::exact());
  EXPECT_EQ(prices, (std::vector<Rational>{Q(3, 2), Q(5, 2)}));
  Outcome o = run_combinatorial(inst, p, ArrivalOrder::index_order(), prices);
  EXPECT_EQ(o.seller_items[0], ItemSet{0b01});
  EXPECT_EQ(o.buyer_items[0], ItemSet{0b10});
  ASSERT_EQ(o.ledger.size(), 1u);
  EXPECT_EQ(o.ledger[0].item, 1u);
  EXPECT_EQ(welfare(inst, o, p), Q(8));
  EXPECT_EQ(opt_combinatorial(inst, p).value, Q(8));
}

TEST(CombinatorialTest, NothingAvailableNothingBought) {
  Instance inst = bilateral_market(point(Q(9)), point(Q(4)));
  auto p = OnlyProfile(inst);
  Outcome o = run_combinatorial(inst, p, ArrivalOrder::index_order(), {Q(1)});
  EXPECT_TRUE(o.ledger.empty());
  EXPECT_EQ(o.buyer_items[0], 0u);
}

TEST(CombinatorialTest, DemandPrefersSmallBundlesOnTies) {
  XosValuation v{{{Q(3), Q(3), Q(0)}, {Q(0), Q(2), Q(4)}}};
  std::vector<Rational> prices{Q(1), Q(1), Q(1)};
  // Best utility 4 from {0,1} (6-2); {2} gives 3; {1,2} via clause 2: 6-2 = 4.
  EXPECT_EQ(demand(Valuation(v), 0b111, prices, 3), ItemSet{0b011});
  EXPECT_EQ(demand(Valuation(v), 0b100, prices, 3), ItemSet{0b100});
  EXPECT_EQ(demand(Valuation(UnitValuation{Q(1)}), 0b111, prices, 3),
            ItemSet{0});
  EXPECT_EQ(demand(Valuation(UnitValuation{Q(2)}), 0b110, prices, 3),
            ItemSet{0b010});
}

TEST(CombinatorialTest, RejectsXosSellersWithSeveralItems) {
  Instance inst = AdditivePair();
  inst.sellers[0].distribution = Distribution(
      Valuation(XosValuation{{{Q(1), Q(0)}, {Q(0), Q(1)}}}));
  EXPECT_THROW(CombinatorialAuction(inst, {Q(1), Q(1)}), ContractViolation);
}

// --- knapsack ------------------------------------------------------------

Instance TenSix(std::vector<Distribution> sellers = {point(Q(0)),
                                                     point(Q(0))}) {
  return knapsack_market({point(Q(10)), point(Q(6))}, {Q(1, 2), Q(1, 2)},
                         sellers);
}

TEST(KnapsackSbbTest, BothTradesAtTwoSevenths) {
  Instance inst = TenSix();
  auto p = OnlyProfile(inst);
  Outcome o = run_knapsack_sbb(inst, p, ExpectationEngine::exact());
  ASSERT_EQ(o.ledger.size(), 2u);
  ExpectRecord(o.ledger[0], 0, 0, Q(16, 7), Q(16, 7));
  ExpectRecord(o.ledger[1], 1, 1, Q(16, 7), Q(16, 7));
  EXPECT_EQ(welfare(inst, o, p), Q(16));
}

TEST(KnapsackSbbTest, KeepingSellerUsesCapacityAndPassesTheBuyerOn) {
  Instance inst = TenSix({point(Q(5)), point(Q(0))});
  auto p = OnlyProfile(inst);
  KnapsackPrices kp = knapsack_prices(inst, Regime::kSbb,
                                      ExpectationEngine::exact());
  EXPECT_EQ(kp.expected_opt, Q(16));
  Outcome o = run_knapsack_sbb(inst, p, kp);
  ASSERT_EQ(o.ledger.size(), 1u);
  ExpectRecord(o.ledger[0], 0, 1, Q(16, 7), Q(16, 7));
  EXPECT_EQ(o.buyer_items[1], 0u);  // capacity used up
  EXPECT_EQ(welfare(inst, o, p), Q(15));
}

TEST(KnapsackSbbTest, HeavierBuyersGoFirst) {
  Instance inst = knapsack_market({point(Q(10)), point(Q(9))},
                                  {Q(1, 5), Q(2, 5)},
                                  {point(Q(0)), point(Q(0)), point(Q(0))});
  EXPECT_EQ(knapsack_buyer_order(inst, ~Mask{0}),
            (std::vector<size_t>{1, 0}));
  Outcome o = run_knapsack_sbb(inst, OnlyProfile(inst),
                               ExpectationEngine::exact());
  ASSERT_EQ(o.ledger.size(), 2u);
  EXPECT_EQ(o.ledger[0].buyer, 1u);
  EXPECT_EQ(o.ledger[0].seller, 0u);
}

TEST(KnapsackSbbTest, NoBuyersAndBadWeights) {
  Instance none = knapsack_market({}, {}, {point(Q(1)), point(Q(2))});
  auto p = OnlyProfile(none);
  EXPECT_EQ(welfare(none, run_knapsack_sbb(none, p, ExpectationEngine::exact()),
                    p),
            Q(3));
  Instance heavy = knapsack_market({point(Q(1))}, {Q(3, 4)},
                                   {point(Q(0)), point(Q(0))});
  EXPECT_THROW(run_knapsack_sbb(heavy, OnlyProfile(heavy),
                                ExpectationEngine::exact()),
               ContractViolation);
}

TEST(KnapsackSbbTest, SingleSellerUsesItemPrices) {
  Instance inst = knapsack_market({point(Q(4))}, {Q(1)}, {point(Q(0))});
  Outcome o = run_knapsack_sbb(inst, OnlyProfile(inst),
                               ExpectationEngine::exact());
  ASSERT_EQ(o.ledger.size(), 1u);
  EXPECT_EQ(o.ledger[0].buyer_pays, Q(2));
}

TEST(KnapsackWbbTest, BothTradesAtTwoFifths) {
  Instance inst = TenSix();
  auto p = OnlyProfile(inst);
  Outcome o = run_knapsack_wbb(inst, p, ArrivalOrder::index_order(),
                               ExpectationEngine::exact());
  EXPECT_EQ(OfferedTo(o, seller(0)), std::vector<Rational>{Q(16, 5)});
  ASSERT_EQ(o.ledger.size(), 2u);
  ExpectRecord(o.ledger[0], 0, 0, Q(16, 5), Q(16, 5));
  ExpectRecord(o.ledger[1], 1, 1, Q(16, 5), Q(16, 5));
  EXPECT_EQ(welfare(inst, o, p), Q(16));
}

TEST(KnapsackWbbTest, LowBuyerLeavesItemWithSeller) {
  Instance inst = knapsack_market({TwoPoint(1, 30), point(Q(6))},
                                  {Q(1, 2), Q(1, 2)},
                                  {point(Q(0)), point(Q(0))});
  auto p = UnitProfile({Q(1), Q(6)}, {Q(0), Q(0)});
  KnapsackPrices kp = knapsack_prices(inst, Regime::kWbb,
                                      ExpectationEngine::exact());
  ASSERT_GT(kp.buyer_price[0], Q(1));
  ASSERT_LE(kp.buyer_price[1], Q(6));
  Outcome o = run_knapsack_wbb(inst, p, ArrivalOrder::index_order(), kp);
  ASSERT_EQ(o.ledger.size(), 1u);
  EXPECT_EQ(o.ledger[0].buyer, 1u);
  EXPECT_EQ(o.seller_items[1], ItemSet{0b10});
}

TEST(KnapsackWbbTest, StopsWhenSellersRunOut) {
  // E[OPT] = 100, every price 20: s1 keeps, one slot of weight 1/2 left.
  Instance inst = knapsack_market({point(Q(50)), point(Q(50))},
                                  {Q(1, 10), Q(1, 10)},
                                  {point(Q(0)), point(Q(30))});
  auto p = OnlyProfile(inst);
  KnapsackPrices kp = knapsack_prices(inst, Regime::kWbb,
                                      ExpectationEngine::exact());
  KnapsackWbbAuction a(inst, kp);
  play(a, p, ArrivalOrder::index_order());
  ASSERT_EQ(a.outcome().ledger.size(), 1u);
  EXPECT_EQ(a.used_weight(), Q(1));
  EXPECT_TRUE(a.done());
  EXPECT_EQ(kp.seller_price, Q(20));
  EXPECT_EQ(welfare(inst, a.outcome(), p), Q(80));
}

TEST(KnapsackGeneralTest, LightBuyersTakeTheLowBranch) {
  Instance inst = TenSix();
  auto engine = ExpectationEngine::exact();
  auto b = choose_knapsack_branch(inst, Regime::kSbb, engine);
  EXPECT_EQ(b.side, KnapsackBranch::Side::kLow);
  EXPECT_EQ(b.expected_high, Q(0));
  auto p = OnlyProfile(inst);
  EXPECT_EQ(run_knapsack_general(inst, p, Regime::kSbb,
                                 ArrivalOrder::index_order(), engine),
            run_knapsack_sbb(inst, p, engine));
  EXPECT_EQ(run_knapsack_general(inst, p, Regime::kWbb,
                                 ArrivalOrder::index_order(), engine),
            run_knapsack_wbb(inst, p, ArrivalOrder::index_order(), engine));
}

TEST(KnapsackGeneralTest, HeavyDominantBuyerTakesTheHighBranch) {
  Instance inst = knapsack_market({point(Q(100)), point(Q(1))},
                                  {Q(9, 10), Q(1, 5)},
                                  {point(Q(0)), point(Q(0))});
  auto engine = ExpectationEngine::exact();
  auto w = buyer_weights(inst);
  auto p = OnlyProfile(inst);
  Rational low = opt_knapsack(p.buyer_values(), w, p.seller_values(), 0b10).value;
  Rational high = opt_knapsack(p.buyer_values(), w, p.seller_values(), 0b01).value;
  auto b = choose_knapsack_branch(inst, Regime::kSbb, engine);
  EXPECT_EQ(b.expected_low, low);
  EXPECT_EQ(b.expected_high, high);
  EXPECT_EQ(b.side, KnapsackBranch::Side::kHigh);
  Outcome o = run_knapsack_general(inst, p, Regime::kSbb,
                                   ArrivalOrder::index_order(), engine);
  ASSERT_EQ(o.ledger.size(), 1u);
  EXPECT_EQ(o.ledger[0].buyer, 0u);
  EXPECT_EQ(o.ledger[0].buyer_pays, o.ledger[0].seller_receives);
  Outcome ow = run_knapsack_general(inst, p, Regime::kWbb,
                                    ArrivalOrder::index_order(), engine);
  ASSERT_EQ(ow.ledger.size(), 1u);
  EXPECT_EQ(ow.ledger[0].buyer, 0u);
}

TEST(KnapsackGeneralTest, EqualEstimatesPreferHigh) {
  Instance inst = knapsack_market({}, {}, {point(Q(1)), point(Q(1))});
  auto b = choose_knapsack_branch(inst, Regime::kSbb,
                                  ExpectationEngine::exact());
  EXPECT_EQ(b.expected_low, b.expected_high);
  EXPECT_EQ(b.side, KnapsackBranch::Side::kHigh);
}

// --- facade --------------------------------------------------------------

TEST(MechanismTest, NamesRoundTrip) {
  for (const auto& m : mechanism_catalog()) {
    EXPECT_EQ(parse_mechanism(m.name), m.kind);
  }
  EXPECT_FALSE(parse_mechanism("vickrey").has_value());
}

TEST(MechanismTest, IncompatibleMarketsAreRejected) {
  auto engine = ExpectationEngine::exact();
  Instance knap = TenSix();
  EXPECT_THROW(Mechanism(MechanismKind::kMatroidSbb, knap, engine),
               IncompatibleMechanism);
  EXPECT_THROW(Mechanism(MechanismKind::kBilateral, knap, engine),
               IncompatibleMechanism);
  Instance heavy = knapsack_market({point(Q(1))}, {Q(3, 4)},
                                   {point(Q(0)), point(Q(0))});
  EXPECT_THROW(Mechanism(MechanismKind::kKnapsackWbb, heavy, engine),
               IncompatibleMechanism);
  EXPECT_NO_THROW(Mechanism(MechanismKind::kKnapsackGeneralWbb, heavy, engine));
}

TEST(MechanismTest, FacadeMatchesDirectRuns) {
  auto engine = ExpectationEngine::exact();
  Instance inst = FiveThree();
  auto p = OnlyProfile(inst);
  Mechanism sbb(MechanismKind::kMatroidSbb, inst, engine);
  EXPECT_FALSE(sbb.online());
  EXPECT_EQ(sbb.budget(), BudgetRequirement::kDsbb);
  EXPECT_EQ(sbb.run(p), run_matroid_sbb(inst, p, engine));
  Mechanism wbb(MechanismKind::kMatroidWbb, inst, engine);
  EXPECT_TRUE(wbb.online());
  EXPECT_EQ(wbb.budget(), BudgetRequirement::kDwbb);
  EXPECT_EQ(wbb.run(p),
            run_matroid_wbb(inst, p, ArrivalOrder::index_order(), engine));
  Instance knap = TenSix();
  auto kp = OnlyProfile(knap);
  Mechanism ks(MechanismKind::kKnapsackSbb, knap, engine);
  EXPECT_EQ(ks.run(kp), run_knapsack_sbb(knap, kp, engine));
}

TEST(MechanismTest, PriceTables) {
  auto engine = ExpectationEngine::exact();
  Instance knap = TenSix();
  auto rows = Mechanism(MechanismKind::kKnapsackSbb, knap, engine).prices();
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].price, Price(Q(16, 7)));
  EXPECT_EQ(rows[1].price, Price(Q(16, 7)));

  Instance bil = bilateral_market(point(Q(0)), point(Q(1)));
  auto brow = Mechanism(MechanismKind::kBilateral, bil, engine).prices();
  ASSERT_EQ(brow.size(), 1u);
  EXPECT_EQ(brow[0].price, Price(Q(1, 2)));

  Instance narrow = matroid_market({point(Q(5)), point(Q(3))},
                                   {point(Q(0)), point(Q(0))},
                                   UniformMatroid{2, 1});
  auto srows = Mechanism(MechanismKind::kMatroidSbb, narrow, engine).prices();
  bool saw_blocked = false;
  for (const auto& r : srows) saw_blocked |= r.price.is_blocked();
  EXPECT_TRUE(saw_blocked);
}

}  // namespace
}  // namespace tsm
