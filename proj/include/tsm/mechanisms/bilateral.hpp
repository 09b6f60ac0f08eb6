// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_MECHANISMS_BILATERAL_HPP_
#define TSM_MECHANISMS_BILATERAL_HPP_

#include "tsm/core.hpp"
#include "tsm/engine.hpp"
#include "tsm/pricing.hpp"

namespace tsm {

// Seller keeps iff v_s > p; otherwise the buyer buys iff v_b >= p.
inline Outcome run_bilateral(const Instance& inst,
                             const ValuationProfile& profile,
                             const Rational& price) {
  if (inst.n() != 1 || inst.k() != 1 || inst.m() != 1) {
    throw ContractViolation("bilateral trade needs one buyer, seller, item");
  }
  Outcome out = Outcome::initial(inst);
  Rational vs = agent_value(inst, seller(0), 1, profile);
  Rational vb = agent_value(inst, buyer(0), 1, profile);
  out.offer(seller(0), price);
  if (vs > price) return out;
  out.offer(buyer(0), price);
  if (vb >= price) out.trade(0, 0, 0, price, price);
  return out;
}

inline Outcome run_bilateral(const Instance& inst,
                             const ValuationProfile& profile,
                             const ExpectationEngine& engine) {
  return run_bilateral(inst, profile, bilateral_price(inst, engine));
}

}  // namespace tsm

#endif  // TSM_MECHANISMS_BILATERAL_HPP_
