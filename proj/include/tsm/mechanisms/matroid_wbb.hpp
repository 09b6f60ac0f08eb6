// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_MECHANISMS_MATROID_WBB_HPP_
#define TSM_MECHANISMS_MATROID_WBB_HPP_

#include <bit>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tsm/core.hpp"
#include "tsm/engine.hpp"
#include "tsm/mechanisms/auction.hpp"
#include "tsm/pricing.hpp"

namespace tsm {

// Online matroid double auction with weak budget balance. Prices are read
// from the extended matroid with the charging set A'.
class MatroidWbbAuction : public PhasedAuction {
 public:
  explicit MatroidWbbAuction(MatroidWbbPricer& pricer)
      : PhasedAuction(pricer.instance()),
        pricer_(&pricer),
        threshold_(inst_->k(), Rational(0)),
        pending_(inst_->k(), Rational(0)) {
    if (!inst_->is_matroid() || !inst_->unit_supply() ||
        !inst_->unit_valued()) {
      throw ContractViolation("matroid mechanism needs a unit matroid market");
    }
  }

  std::vector<size_t> partners() const override {
    std::vector<size_t> out;
    if (sellers_left_ > 0) return out;
    for (Mask rest = sell_; rest; rest &= rest - 1) {
      out.push_back(static_cast<size_t>(std::countr_zero(rest)));
    }
    return out;
  }

  Rational step(const Move& move, const Valuation& report) override {
    accept(move);
    const Rational& v = unit_value(report);
    const AgentId a = move.agent;
    if (a.role == Role::kSeller) {
      const size_t j = a.index;
      Price p = pricer_->price(a, charging_);
      if (p.is_blocked()) throw ContractViolation("seller price blocked");
      outcome_.offer(a, p.value());
      if (v >= p.value()) {
        charge(a, p.value());
        return v;
      }
      sell_ |= bit(j);
      threshold_[j] = p.value();
      pending_[j] = v;
      return 0;
    }
    if (!move.partner) return 0;  // nobody left to sell
    const size_t i = a.index;
    const size_t j = *move.partner;
    Price p = pricer_->price(a, charging_);
    if (p.is_blocked()) return 0;
    const Rational& pi = p.value();
    outcome_.offer(a, pi);
    if (pi < threshold_[j]) {
      outcome_.offer(seller(j), pi);
      if (pending_[j] >= pi) {
        charge(a, pi);
        sell_ &= ~bit(j);
        return pending_[j];
      }
      threshold_[j] = pi;
    }
    if (v >= pi) {
      outcome_.trade(item_of(j), j, i, pi, threshold_[j]);
      charge(a, pi);
      sell_ &= ~bit(j);
      return v;
    }
    return 0;
  }

  Rational leftover() const override {
    Rational total = 0;
    for (size_t j : partners_any()) total += pending_[j];
    return total;
  }

  std::string key() const override {
    std::string s = seen_key() + '|' + std::to_string(charging_) + '|';
    for (size_t j : partners_any()) {
      s += std::to_string(j) + ':' + to_string(threshold_[j]) + ':' +
           to_string(pending_[j]) + ';';
    }
    return s;
  }

  std::unique_ptr<Auction> clone() const override {
    return std::make_unique<MatroidWbbAuction>(*this);
  }

  // A' as a mask over the extended ground set.
  Mask charging_set() const { return charging_; }
  // Agents added to A', each with the price charged at that moment.
  const std::vector<Offer>& charged() const { return charged_; }
  const std::vector<Rational>& thresholds() const { return threshold_; }

 protected:
  bool closed() const override { return sell_ == 0; }

 private:
  std::vector<size_t> partners_any() const {
    std::vector<size_t> out;
    for (Mask rest = sell_; rest; rest &= rest - 1) {
      out.push_back(static_cast<size_t>(std::countr_zero(rest)));
    }
    return out;
  }

  void charge(AgentId a, const Rational& p) {
    charging_ |= pricer_->element(a);
    charged_.push_back({a, p});
  }

  MatroidWbbPricer* pricer_;
  Mask charging_ = 0;
  Mask sell_ = 0;
  std::vector<Rational> threshold_;
  std::vector<Rational> pending_;
  std::vector<Offer> charged_;
};

inline Outcome run_matroid_wbb(MatroidWbbPricer& pricer,
                               const ValuationProfile& profile,
                               const ArrivalOrder& order) {
  MatroidWbbAuction auction(pricer);
  return play(auction, profile, order);
}

inline Outcome run_matroid_wbb(const Instance& inst,
                               const ValuationProfile& profile,
                               const ArrivalOrder& order,
                               const ExpectationEngine& engine) {
  MatroidWbbPricer pricer(inst, engine);
  return run_matroid_wbb(pricer, profile, order);
}

}  // namespace tsm

#endif  // TSM_MECHANISMS_MATROID_WBB_HPP_
