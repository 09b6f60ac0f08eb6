// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_MECHANISMS_COMBINATORIAL_HPP_
#define TSM_MECHANISMS_COMBINATORIAL_HPP_

#include <bit>
#include <memory>
#include <string>
#include <vector>

#include "tsm/core.hpp"
#include "tsm/mechanisms/auction.hpp"
#include "tsm/pricing.hpp"

namespace tsm {

inline constexpr size_t kDemandSearchCap = 20;

inline bool additive_valuation(const Valuation& v) {
  const auto* x = std::get_if<XosValuation>(&v);
  return x && x->additive();
}

// Unit-supply sellers with any buyers, or additive agents on both sides.
inline void check_combinatorial(const Instance& inst) {
  bool unit_supply = std::all_of(
      inst.sellers.begin(), inst.sellers.end(),
      [](const Agent& s) { return std::popcount(s.endowment) == 1; });
  if (unit_supply) return;
  auto additive_agent = [](const Agent& a) {
    const auto& atoms = a.distribution.atoms();
    return std::all_of(atoms.begin(), atoms.end(), [](const auto& atom) {
      return additive_valuation(atom.value);
    });
  };
  if (std::all_of(inst.buyers.begin(), inst.buyers.end(), additive_agent) &&
      std::all_of(inst.sellers.begin(), inst.sellers.end(), additive_agent)) {
    return;
  }
  throw ContractViolation(
      "combinatorial mechanism needs unit-supply sellers or additive agents");
}

// Utility-maximizing bundle within the available items. Ties go to the
// smaller bundle, then the lower mask.
inline ItemSet demand(const Valuation& v, ItemSet available,
                      const std::vector<Rational>& prices, size_t m) {
  if (static_cast<size_t>(std::popcount(available)) > kDemandSearchCap) {
    throw CapExceeded("demand search over more than 20 items");
  }
  ItemSet best = 0;
  Rational best_u = 0;
  // Submasks of available in increasing order.
  for (ItemSet t = available; t; t = (t - 1) & available) {
    Rational u = evaluate(v, t, m);
    for (ItemSet rest = t; rest; rest &= rest - 1) {
      u -= prices[std::countr_zero(rest)];
    }
    const int size = std::popcount(t), best_size = std::popcount(best);
    bool better = u > best_u ||
                  (u == best_u && (size < best_size ||
                                   (size == best_size && t < best)));
    if (better) {
      best = t;
      best_u = u;
    }
  }
  return best;
}

// Static item prices: sellers keep items worth more than the price, buyers
// then buy demanded bundles, unsold items go back.
class CombinatorialAuction : public PhasedAuction {
 public:
  CombinatorialAuction(const Instance& inst, std::vector<Rational> prices)
      : PhasedAuction(inst),
        prices_(std::move(prices)),
        item_value_(inst.m(), Rational(0)),
        owner_(inst.owners()) {
    check_combinatorial(inst);
    if (prices_.size() != inst.m()) {
      throw ContractViolation("one price per item required");
    }
  }

  Rational step(const Move& move, const Valuation& report) override {
    accept(move);
    const AgentId a = move.agent;
    const size_t m = inst_->m();
    if (a.role == Role::kSeller) {
      const ItemSet owned = inst_->sellers[a.index].endowment;
      ItemSet keep = 0;
      for (ItemSet rest = owned; rest; rest &= rest - 1) {
        auto it = static_cast<size_t>(std::countr_zero(rest));
        ItemSet single = ItemSet{1} << it;
        Rational v = evaluate(report, single, m);
        outcome_.offer(a, prices_[it]);
        if (v > prices_[it]) {
          keep |= single;
        } else {
          available_ |= single;
          item_value_[it] = v;
        }
      }
      return evaluate(report, keep, m);
    }
    for (ItemSet rest = available_; rest; rest &= rest - 1) {
      outcome_.offer(a, prices_[std::countr_zero(rest)]);
    }
    ItemSet bundle = demand(report, available_, prices_, m);
    for (ItemSet rest = bundle; rest; rest &= rest - 1) {
      auto it = static_cast<size_t>(std::countr_zero(rest));
      outcome_.trade(it, owner_[it], a.index, prices_[it], prices_[it]);
    }
    available_ &= ~bundle;
    return evaluate(report, bundle, m);
  }

  // Sellers are unit-supply or additive, so unsold items add their own value.
  Rational leftover() const override {
    Rational total = 0;
    for (ItemSet rest = available_; rest; rest &= rest - 1) {
      total += item_value_[std::countr_zero(rest)];
    }
    return total;
  }

  std::string key() const override {
    std::string s = seen_key() + '|';
    for (ItemSet rest = available_; rest; rest &= rest - 1) {
      auto it = std::countr_zero(rest);
      s += std::to_string(it) + ':' + to_string(item_value_[it]) + ';';
    }
    return s;
  }

  std::unique_ptr<Auction> clone() const override {
    return std::make_unique<CombinatorialAuction>(*this);
  }

  ItemSet available() const { return available_; }
  const std::vector<Rational>& prices() const { return prices_; }

 protected:
  bool closed() const override { return available_ == 0; }

 private:
  std::vector<Rational> prices_;
  std::vector<Rational> item_value_;
  std::vector<size_t> owner_;
  ItemSet available_ = 0;
};

inline Outcome run_combinatorial(const Instance& inst,
                                 const ValuationProfile& profile,
                                 const ArrivalOrder& order,
                                 const std::vector<Rational>& prices) {
  CombinatorialAuction auction(inst, prices);
  return play(auction, profile, order);
}

}  // namespace tsm

#endif  // TSM_MECHANISMS_COMBINATORIAL_HPP_
