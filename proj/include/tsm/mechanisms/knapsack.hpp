// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_MECHANISMS_KNAPSACK_HPP_
#define TSM_MECHANISMS_KNAPSACK_HPP_

#include <algorithm>
#include <bit>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "tsm/core.hpp"
#include "tsm/engine.hpp"
#include "tsm/mechanisms/auction.hpp"
#include "tsm/mechanisms/combinatorial.hpp"
#include "tsm/mechanisms/matroid_sbb.hpp"
#include "tsm/mechanisms/matroid_wbb.hpp"
#include "tsm/pricing.hpp"

namespace tsm {

// Static knapsack prices for one regime and a set of eligible buyers.
struct KnapsackPrices {
  Regime regime = Regime::kSbb;
  Mask eligible = ~Mask{0};
  Rational expected_opt;
  std::vector<Rational> buyer_weight;  // w*
  std::vector<Rational> buyer_price;
  Rational seller_weight;  // WBB only
  Rational seller_price;   // WBB only

  bool is_eligible(size_t i) const { return has(eligible, i); }
};

inline KnapsackPrices knapsack_prices(const Instance& inst, Regime regime,
                                      const ExpectationEngine& engine,
                                      Mask eligible = ~Mask{0}) {
  if (!inst.is_knapsack() || !inst.unit_supply() || !inst.unit_valued()) {
    throw ContractViolation("knapsack mechanism needs a unit knapsack market");
  }
  if (inst.k() < 2) throw ContractViolation("knapsack mechanism needs k >= 2");
  for (size_t i = 0; i < inst.n(); ++i) {
    if (has(eligible, i) && inst.buyers[i].weight > Rational(1, 2)) {
      throw ContractViolation("knapsack weight above 1/2; use the general "
                              "mechanism");
    }
  }
  KnapsackPrices kp;
  kp.regime = regime;
  kp.eligible = eligible & full_mask(inst.n());
  kp.expected_opt = knapsack_expected_opt(inst, engine, kp.eligible).mean;
  for (size_t i = 0; i < inst.n(); ++i) {
    kp.buyer_weight.push_back(artificial_weight(inst, buyer(i), regime));
    kp.buyer_price.push_back(
        knapsack_price(inst, buyer(i), regime, kp.expected_opt));
  }
  if (regime == Regime::kWbb) {
    kp.seller_weight = artificial_weight(inst, seller(0), regime);
    kp.seller_price = knapsack_price(inst, seller(0), regime, kp.expected_opt);
  }
  return kp;
}

// Eligible buyers by weight descending, ties by index.
inline std::vector<size_t> knapsack_buyer_order(const Instance& inst,
                                                Mask eligible) {
  std::vector<size_t> order;
  for (size_t i = 0; i < inst.n(); ++i) {
    if (has(eligible, i)) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return inst.buyers[a].weight > inst.buyers[b].weight;
  });
  return order;
}

// Two-pointer sweep over sorted buyers and sellers in index order.
inline Outcome run_knapsack_sbb(const Instance& inst,
                                const ValuationProfile& profile,
                                const KnapsackPrices& kp) {
  if (kp.regime != Regime::kSbb) throw ContractViolation("SBB prices needed");
  Outcome out = Outcome::initial(inst);
  const auto order = knapsack_buyer_order(inst, kp.eligible);
  Rational used = 0;
  size_t pos = 0, j = 0;
  while (pos < order.size() && j < inst.k()) {
    const size_t i = order[pos];
    const Rational& ws = kp.buyer_weight[i];
    if (used + ws > 1) {
      ++pos;
      continue;
    }
    const Rational& p = kp.buyer_price[i];
    out.offer(seller(j), p);
    if (profile.unit(seller(j)) >= p) {
      used += ws;
      ++j;
      continue;
    }
    out.offer(buyer(i), p);
    if (profile.unit(buyer(i)) >= p) {
      out.trade(static_cast<size_t>(std::countr_zero(inst.sellers[j].endowment)),
                j, i, p, p);
      used += ws;
      ++j;
    }
    ++pos;
  }
  return out;
}

inline Outcome run_knapsack_sbb(const Instance& inst,
                                const ValuationProfile& profile,
                                const ExpectationEngine& engine) {
  if (inst.k() == 1) {
    return run_combinatorial(inst, profile, ArrivalOrder::index_order(),
                             combinatorial_item_prices(inst, engine));
  }
  return run_knapsack_sbb(inst, profile,
                          knapsack_prices(inst, Regime::kSbb, engine));
}

// Online knapsack auction with weak budget balance.
class KnapsackWbbAuction : public PhasedAuction {
 public:
  KnapsackWbbAuction(const Instance& inst, const KnapsackPrices& kp)
      : PhasedAuction(inst), kp_(&kp), pending_(inst.k(), Rational(0)) {
    if (kp.regime != Regime::kWbb) throw ContractViolation("WBB prices needed");
  }

  std::vector<size_t> partners() const override {
    if (sellers_left_ > 0) return {};
    return pending_sellers();
  }

  Rational step(const Move& move, const Valuation& report) override {
    accept(move);
    const Rational& v = unit_value(report);
    const AgentId a = move.agent;
    if (a.role == Role::kSeller) {
      outcome_.offer(a, kp_->seller_price);
      if (v >= kp_->seller_price) {
        used_ += kp_->seller_weight;
        return v;
      }
      sell_ |= bit(a.index);
      pending_[a.index] = v;
      return 0;
    }
    const size_t i = a.index;
    if (!move.partner || !kp_->is_eligible(i)) return 0;
    const Rational& ws = kp_->buyer_weight[i];
    if (used_ > 1 - ws) return 0;
    const Rational& p = kp_->buyer_price[i];
    outcome_.offer(a, p);
    if (v < p) return 0;
    const size_t j = *move.partner;
    outcome_.trade(item_of(j), j, i, p, kp_->seller_price);
    used_ += ws;
    sell_ &= ~bit(j);
    return v;
  }

  Rational leftover() const override {
    Rational total = 0;
    for (size_t j : pending_sellers()) total += pending_[j];
    return total;
  }

  std::string key() const override {
    std::string s = seen_key() + '|' + to_string(used_) + '|';
    for (size_t j : pending_sellers()) {
      s += std::to_string(j) + ':' + to_string(pending_[j]) + ';';
    }
    return s;
  }

  std::unique_ptr<Auction> clone() const override {
    return std::make_unique<KnapsackWbbAuction>(*this);
  }

  // Sum of w* over allocated agents.
  const Rational& used_weight() const { return used_; }

 protected:
  bool closed() const override { return sell_ == 0; }

 private:
  std::vector<size_t> pending_sellers() const {
    std::vector<size_t> out;
    for (Mask rest = sell_; rest; rest &= rest - 1) {
      out.push_back(static_cast<size_t>(std::countr_zero(rest)));
    }
    return out;
  }

  const KnapsackPrices* kp_;
  std::vector<Rational> pending_;
  Mask sell_ = 0;
  Rational used_ = 0;
};

inline Outcome run_knapsack_wbb(const Instance& inst,
                                const ValuationProfile& profile,
                                const ArrivalOrder& order,
                                const KnapsackPrices& kp) {
  KnapsackWbbAuction auction(inst, kp);
  return play(auction, profile, order);
}

inline Outcome run_knapsack_wbb(const Instance& inst,
                                const ValuationProfile& profile,
                                const ArrivalOrder& order,
                                const ExpectationEngine& engine) {
  if (inst.k() == 1) {
    return run_combinatorial(inst, profile, order,
                             combinatorial_item_prices(inst, engine));
  }
  KnapsackPrices kp = knapsack_prices(inst, Regime::kWbb, engine);
  return run_knapsack_wbb(inst, profile, order, kp);
}

// Branch selection for arbitrary weights in [0,1].
struct KnapsackBranch {
  enum class Side { kLow, kHigh, kSingleItem };
  Side side = Side::kLow;
  Mask low = 0;   // w <= 1/2
  Mask high = 0;  // w > 1/2
  Rational expected_low;
  Rational expected_high;
  // Same market with a partition matroid: HIGH buyers share one slot,
  // LOW buyers are loops.
  std::shared_ptr<const Instance> high_market;
};

inline KnapsackBranch choose_knapsack_branch(const Instance& inst,
                                             Regime regime,
                                             const ExpectationEngine& engine) {
  if (!inst.is_knapsack()) throw ContractViolation("knapsack market needed");
  KnapsackBranch b;
  for (size_t i = 0; i < inst.n(); ++i) {
    (inst.buyers[i].weight > Rational(1, 2) ? b.high : b.low) |= bit(i);
  }
  if (inst.k() == 1) {
    b.side = KnapsackBranch::Side::kSingleItem;
    return b;
  }
  b.expected_low = knapsack_expected_opt(inst, engine, b.low).mean;
  b.expected_high = knapsack_expected_opt(inst, engine, b.high).mean;
  Rational low_factor = regime == Regime::kSbb ? Rational(1, 7) : Rational(1, 5);
  Rational high_factor = regime == Regime::kSbb ? Rational(1, 3) : Rational(1, 2);
  b.side = low_factor * b.expected_low > high_factor * b.expected_high
               ? KnapsackBranch::Side::kLow
               : KnapsackBranch::Side::kHigh;
  auto copy = std::make_shared<Instance>(inst);
  std::vector<size_t> block(inst.n());
  for (size_t i = 0; i < inst.n(); ++i) block[i] = has(b.high, i) ? 0 : 1;
  copy->constraint =
      MatroidConstraint{Matroid(PartitionMatroid{block, {1, 0}})};
  copy->validate();
  b.high_market = std::move(copy);
  return b;
}

inline Outcome run_knapsack_general(const Instance& inst,
                                    const ValuationProfile& profile,
                                    Regime regime, const ArrivalOrder& order,
                                    const ExpectationEngine& engine) {
  KnapsackBranch b = choose_knapsack_branch(inst, regime, engine);
  switch (b.side) {
    case KnapsackBranch::Side::kSingleItem:
      return run_combinatorial(inst, profile, order,
                               combinatorial_item_prices(inst, engine));
    case KnapsackBranch::Side::kLow: {
      KnapsackPrices kp = knapsack_prices(inst, regime, engine, b.low);
      return regime == Regime::kSbb ? run_knapsack_sbb(inst, profile, kp)
                                    : run_knapsack_wbb(inst, profile, order, kp);
    }
    case KnapsackBranch::Side::kHigh:
      break;
  }
  if (regime == Regime::kSbb) {
    MatroidSbbPricer pricer(*b.high_market, engine);
    return run_matroid_sbb(pricer, profile);
  }
  MatroidWbbPricer pricer(*b.high_market, engine);
  return run_matroid_wbb(pricer, profile, order);
}

}  // namespace tsm

#endif  // TSM_MECHANISMS_KNAPSACK_HPP_
