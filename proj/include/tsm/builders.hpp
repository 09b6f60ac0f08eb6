// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_BUILDERS_HPP_
#define TSM_BUILDERS_HPP_

#include <string>
#include <utility>
#include <vector>

#include "tsm/core.hpp"

namespace tsm {

inline Distribution point(const Rational& v) {
  return Distribution(Valuation(UnitValuation{v}));
}

// Unit distribution from (value, probability) pairs.
inline Distribution unit_dist(
    const std::vector<std::pair<Rational, Rational>>& support) {
  std::vector<Distribution::Atom> atoms;
  for (const auto& [v, p] : support) atoms.push_back({UnitValuation{v}, p});
  return Distribution(std::move(atoms));
}

inline XosValuation additive(std::vector<Rational> weights) {
  return XosValuation{{std::move(weights)}};
}

// Unit-supply sellers (one item each, named after the seller), unit-demand
// buyers, under the given constraint.
inline Instance unit_market(const std::vector<Distribution>& buyers,
                            const std::vector<Distribution>& sellers,
                            Constraint constraint,
                            const std::vector<Rational>& weights = {}) {
  Instance inst;
  for (size_t i = 0; i < buyers.size(); ++i) {
    Agent a{"b" + std::to_string(i), buyers[i]};
    if (i < weights.size()) a.weight = weights[i];
    inst.buyers.push_back(std::move(a));
  }
  for (size_t j = 0; j < sellers.size(); ++j) {
    Agent a{"s" + std::to_string(j), sellers[j]};
    a.endowment = ItemSet{1} << j;
    inst.sellers.push_back(std::move(a));
    inst.items.push_back("i" + std::to_string(j));
  }
  inst.constraint = std::move(constraint);
  inst.validate();
  return inst;
}

inline Instance matroid_market(const std::vector<Distribution>& buyers,
                               const std::vector<Distribution>& sellers,
                               Matroid matroid) {
  return unit_market(buyers, sellers, MatroidConstraint{std::move(matroid)});
}

inline Instance knapsack_market(const std::vector<Distribution>& buyers,
                                const std::vector<Rational>& weights,
                                const std::vector<Distribution>& sellers) {
  return unit_market(buyers, sellers, KnapsackConstraint{}, weights);
}

inline Instance bilateral_market(const Distribution& seller_dist,
                                 const Distribution& buyer_dist) {
  return unit_market({buyer_dist}, {seller_dist}, Unconstrained{});
}

}  // namespace tsm

#endif  // TSM_BUILDERS_HPP_
