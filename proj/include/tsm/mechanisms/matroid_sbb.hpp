// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_MECHANISMS_MATROID_SBB_HPP_
#define TSM_MECHANISMS_MATROID_SBB_HPP_

#include <bit>
#include <vector>

#include "tsm/core.hpp"
#include "tsm/engine.hpp"
#include "tsm/pricing.hpp"

namespace tsm {

// Deliberately broken variants used to exercise the truthfulness checks.
enum class SbbVariant {
  kFaithful,
  kPriceShaving,  // buyer pays (p + reported value) / 2
  kForcedTrade,   // seller cannot keep
  kReOffer,       // declining buyer gets a second offer at p / 2
};

inline Outcome run_matroid_sbb(MatroidSbbPricer& pricer,
                               const ValuationProfile& profile,
                               SbbVariant variant = SbbVariant::kFaithful) {
  const Instance& inst = pricer.instance();
  if (!inst.is_matroid() || !inst.unit_supply() || !inst.unit_valued()) {
    throw ContractViolation("matroid mechanism needs a unit matroid market");
  }
  Outcome out = Outcome::initial(inst);
  Mask buy = full_mask(inst.n());
  Mask sell = full_mask(inst.k());
  Mask a_b = 0;
  size_t r = inst.k();

  while (buy && sell) {
    size_t j = 0;
    bool first = true;
    for (Mask rest = sell; rest; rest &= rest - 1) {
      auto c = static_cast<size_t>(std::countr_zero(rest));
      if (first || pricer.seller_threshold(c) < pricer.seller_threshold(j)) {
        j = c;
        first = false;
      }
    }
    size_t i = 0;
    std::optional<Price> best;
    for (Mask rest = buy; rest; rest &= rest - 1) {
      auto c = static_cast<size_t>(std::countr_zero(rest));
      Price p = pricer.buyer_threshold(c, a_b, r);
      if (!best || *best < p) {
        best = p;
        i = c;
      }
    }
    if (!pricer.feasible(i, a_b, r)) {
      buy &= ~bit(i);
      continue;
    }
    const Rational p = pricer.trade_price(i, j, a_b, r).value();
    const Rational& vj = profile.unit(seller(j));
    const Rational& vi = profile.unit(buyer(i));
    const size_t item = static_cast<size_t>(
        std::countr_zero(inst.sellers[j].endowment));
    out.offer(seller(j), p);
    if (vj > p && variant != SbbVariant::kForcedTrade) {
      sell &= ~bit(j);
      --r;
      continue;
    }
    buy &= ~bit(i);
    out.offer(buyer(i), p);
    if (vi > p) {
      Rational pay = variant == SbbVariant::kPriceShaving
                         ? Rational((p + vi) / 2)
                         : p;
      out.trade(item, j, i, pay, pay);
      a_b |= bit(i);
      sell &= ~bit(j);
    } else if (variant == SbbVariant::kReOffer) {
      Rational half = p / 2;
      out.offer(buyer(i), half);
      if (vi > half) {
        out.trade(item, j, i, half, half);
        a_b |= bit(i);
        sell &= ~bit(j);
      }
    }
  }
  return out;
}

inline Outcome run_matroid_sbb(const Instance& inst,
                               const ValuationProfile& profile,
                               const ExpectationEngine& engine) {
  MatroidSbbPricer pricer(inst, engine);
  return run_matroid_sbb(pricer, profile);
}

}  // namespace tsm

#endif  // TSM_MECHANISMS_MATROID_SBB_HPP_
