// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_HARNESS_OPTIMUM_HPP_
#define TSM_HARNESS_OPTIMUM_HPP_

#include "tsm/core.hpp"
#include "tsm/oracles.hpp"
#include "tsm/pricing.hpp"

namespace tsm {

// Welfare of the best feasible allocation for the market's constraint.
inline Rational optimal_welfare(const Instance& inst,
                                const ValuationProfile& profile) {
  if (inst.is_matroid()) {
    ExtendedMatroid ext{&inst.matroid(), inst.k()};
    return opt_all_agents_matroid(ext, profile.buyer_values(),
                                  profile.seller_values(), 0)
        .weight;
  }
  if (inst.is_knapsack()) {
    return opt_knapsack(profile.buyer_values(), buyer_weights(inst),
                        profile.seller_values())
        .value;
  }
  return opt_combinatorial(inst, profile).value;
}

}  // namespace tsm

#endif  // TSM_HARNESS_OPTIMUM_HPP_
