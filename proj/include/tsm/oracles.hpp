// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_ORACLES_HPP_
#define TSM_ORACLES_HPP_

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>
#include <vector>

#include "tsm/core.hpp"
#include "tsm/errors.hpp"
#include "tsm/matroid.hpp"
#include "tsm/rational.hpp"

namespace tsm {

// OPT_B(v | A, r): best buyer set T with A u T independent and |A u T| <= r.
// The value counts T only.
inline Basis opt_buyers(const Matroid& matroid,
                        const std::vector<Rational>& buyer_values, Mask a,
                        size_t r) {
  if (size_of(a) > r || !matroid.is_independent(a)) {
    throw ContractViolation("opt_buyers: infeasible conditioning set");
  }
  return max_weight_basis(MatroidView{&matroid, a, r}, buyer_values);
}

// Same, with a precomputed greedy order of the buyer values.
inline Basis opt_buyers_ordered(const Matroid& matroid,
                                const std::vector<size_t>& order,
                                const std::vector<Rational>& buyer_values,
                                Mask a, size_t r) {
  MatroidView view{&matroid, a, r};
  return greedy_basis(order, buyer_values, a,
                      [&view](Mask t) { return view.is_independent(t); });
}

// OPT(v | X) over buyers and sellers on the extended matroid.
inline Basis opt_all_agents_matroid(const ExtendedMatroid& ext,
                                    const std::vector<Rational>& buyer_values,
                                    const std::vector<Rational>& seller_values,
                                    Mask x = 0) {
  if (!ext.is_independent(x)) {
    throw ContractViolation("opt_all_agents_matroid: dependent conditioning");
  }
  return extended_max_weight_basis(ext, buyer_values, seller_values, x);
}

// Variant over the concatenated weight vector (buyers then sellers).
inline Basis opt_all_agents_ordered(const ExtendedMatroid& ext,
                                    const std::vector<size_t>& order,
                                    const std::vector<Rational>& weights,
                                    Mask x) {
  return greedy_basis(order, weights, x, [&ext, x](Mask t) {
    return ext.is_independent(t | x);
  });
}

struct KnapsackOptimum {
  Mask buyers = 0;
  Mask sellers = 0;  // sellers keeping their items
  Rational value = 0;
};

inline constexpr size_t kKnapsackOracleCap = 22;

// Best buyer set B' (sum w <= 1, |B'| <= k) plus the k - |B'| most valuable
// sellers. Only buyers in `eligible` may be chosen.
inline KnapsackOptimum opt_knapsack(const std::vector<Rational>& buyer_values,
                                    const std::vector<Rational>& weights,
                                    const std::vector<Rational>& seller_values,
                                    Mask eligible = ~Mask{0},
                                    size_t cap = kKnapsackOracleCap) {
  const size_t n = buyer_values.size();
  const size_t k = seller_values.size();
  if (weights.size() != n) throw InputError("knapsack: weight count mismatch");
  std::vector<size_t> cand;
  for (size_t i = 0; i < n; ++i) {
    if (has(eligible, i)) cand.push_back(i);
  }
  if (cand.size() > cap) {
    throw CapExceeded("instance too large for exact oracle: " +
                      std::to_string(cand.size()) + " buyers > " +
                      std::to_string(cap));
  }
  std::stable_sort(cand.begin(), cand.end(), [&](size_t a, size_t b) {
    return buyer_values[a] > buyer_values[b];
  });
  std::vector<size_t> sellers = greedy_order(seller_values);
  std::vector<Rational> top(k + 1, 0);  // top[t] = sum of t best sellers
  for (size_t t = 0; t < k; ++t) top[t + 1] = top[t] + seller_values[sellers[t]];

  KnapsackOptimum best;
  best.value = -1;
  Mask chosen = 0;
  Rational sum = 0, used = 0;
  size_t count = 0;

  // Upper bound: best (k - count) values among remaining buyers and sellers.
  auto bound = [&](size_t from) {
    Rational b = sum;
    size_t slots = k - count, bi = from, si = 0;
    while (slots > 0) {
      bool take_buyer =
          bi < cand.size() &&
          (si >= k || buyer_values[cand[bi]] > seller_values[sellers[si]]);
      if (take_buyer) {
        b += buyer_values[cand[bi++]];
      } else if (si < k) {
        b += seller_values[sellers[si++]];
      } else {
        break;
      }
      --slots;
    }
    return b;
  };

  auto search = [&](auto&& self, size_t pos) -> void {
    Rational here = sum + top[k - count];
    if (here > best.value) {
      best.value = here;
      best.buyers = chosen;
      best.sellers = 0;
      for (size_t t = 0; t < k - count; ++t) best.sellers |= bit(sellers[t]);
    }
    if (pos == cand.size() || count == k) return;
    if (bound(pos) <= best.value) return;
    size_t i = cand[pos];
    if (used + weights[i] <= 1) {
      chosen |= bit(i);
      sum += buyer_values[i];
      used += weights[i];
      ++count;
      self(self, pos + 1);
      --count;
      used -= weights[i];
      sum -= buyer_values[i];
      chosen &= ~bit(i);
    }
    self(self, pos + 1);
  };
  search(search, 0);
  return best;
}

struct CombinatorialOptimum {
  std::vector<AgentId> holder;  // per item
  std::vector<ItemSet> buyer_bundles;
  std::vector<ItemSet> seller_bundles;
  Rational value = 0;
};

inline constexpr size_t kCombinatorialOracleCap = 8;

namespace internal {

inline bool additive_profile(const Instance& inst,
                             const ValuationProfile& profile) {
  for (const auto& v : profile.buyers) {
    const auto* x = std::get_if<XosValuation>(&v);
    if (!x || !x->additive()) return false;
  }
  for (size_t j = 0; j < inst.k(); ++j) {
    const auto& v = profile.sellers[j];
    if (const auto* x = std::get_if<XosValuation>(&v)) {
      if (!x->additive()) return false;
    } else if (std::popcount(inst.sellers[j].endowment) != 1) {
      return false;
    }
  }
  return true;
}

inline Rational single_item_value(const Instance& inst, AgentId a,
                                  size_t item,
                                  const ValuationProfile& profile) {
  return agent_value(inst, a, ItemSet{1} << item, profile);
}

}  // namespace internal

// Welfare-maximizing allocation of all items; sellers only get own items.
inline CombinatorialOptimum opt_combinatorial(
    const Instance& inst, const ValuationProfile& profile,
    size_t cap = kCombinatorialOracleCap) {
  const size_t n = inst.n(), k = inst.k(), m = inst.m();
  const auto owner = inst.owners();
  CombinatorialOptimum out;
  out.holder.resize(m);
  out.buyer_bundles.assign(n, 0);
  out.seller_bundles.assign(k, 0);

  auto finish = [&]() {
    out.value = 0;
    for (size_t i = 0; i < n; ++i) {
      out.value += agent_value(inst, buyer(i), out.buyer_bundles[i], profile);
    }
    for (size_t j = 0; j < k; ++j) {
      out.value += agent_value(inst, seller(j), out.seller_bundles[j], profile);
    }
  };

  if (internal::additive_profile(inst, profile)) {
    for (size_t it = 0; it < m; ++it) {
      AgentId best = seller(owner[it]);
      Rational best_v = internal::single_item_value(inst, best, it, profile);
      for (size_t i = 0; i < n; ++i) {
        Rational v = internal::single_item_value(inst, buyer(i), it, profile);
        if (v > best_v) {
          best_v = v;
          best = buyer(i);
        }
      }
      out.holder[it] = best;
      if (best.role == Role::kBuyer) {
        out.buyer_bundles[best.index] |= ItemSet{1} << it;
      } else {
        out.seller_bundles[best.index] |= ItemSet{1} << it;
      }
    }
    finish();
    return out;
  }

  if (m > cap) {
    throw CapExceeded("XOS instance with " + std::to_string(m) +
                      " items is above the exact oracle cap of " +
                      std::to_string(cap) +
                      "; use additive valuations or plug in an approximate "
                      "allocation rule");
  }
  // choice[it] = 0 means the owner keeps it, c > 0 means buyer c-1.
  std::vector<size_t> choice(m, 0);
  std::vector<size_t> best_choice(m, 0);
  Rational best_value = -1;
  std::vector<ItemSet> bb(n), sb(k);
  while (true) {
    std::fill(bb.begin(), bb.end(), 0);
    std::fill(sb.begin(), sb.end(), 0);
    for (size_t it = 0; it < m; ++it) {
      if (choice[it] == 0) {
        sb[owner[it]] |= ItemSet{1} << it;
      } else {
        bb[choice[it] - 1] |= ItemSet{1} << it;
      }
    }
    Rational v = 0;
    for (size_t i = 0; i < n; ++i) {
      if (bb[i]) v += agent_value(inst, buyer(i), bb[i], profile);
    }
    for (size_t j = 0; j < k; ++j) {
      if (sb[j]) v += agent_value(inst, seller(j), sb[j], profile);
    }
    if (v > best_value) {
      best_value = v;
      best_choice = choice;
    }
    size_t pos = 0;
    while (pos < m && ++choice[pos] == n + 1) choice[pos++] = 0;
    if (pos == m) break;
  }
  for (size_t it = 0; it < m; ++it) {
    if (best_choice[it] == 0) {
      out.holder[it] = seller(owner[it]);
      out.seller_bundles[owner[it]] |= ItemSet{1} << it;
    } else {
      out.holder[it] = buyer(best_choice[it] - 1);
      out.buyer_bundles[best_choice[it] - 1] |= ItemSet{1} << it;
    }
  }
  finish();
  return out;
}

// SW_j: each holder's bundle value split along its first supporting clause.
inline std::vector<Rational> sw_contribution(const Instance& inst,
                                             const ValuationProfile& profile,
                                             const CombinatorialOptimum& y) {
  std::vector<Rational> sw(inst.m(), 0);
  auto split = [&](AgentId a, ItemSet bundle) {
    if (bundle == 0) return;
    if (a.role == Role::kSeller) bundle &= inst.sellers[a.index].endowment;
    const Valuation& v = profile.at(a);
    if (const auto* u = std::get_if<UnitValuation>(&v)) {
      // Unit demand: the clause supported on the lowest item of the bundle.
      sw[std::countr_zero(bundle)] = u->value;
      return;
    }
    const auto& x = std::get<XosValuation>(v);
    const auto& clause = x.clauses[x.supporting_clause(bundle)];
    for (ItemSet rest = bundle; rest; rest &= rest - 1) {
      size_t it = std::countr_zero(rest);
      sw[it] = clause[it];
    }
  };
  for (size_t i = 0; i < inst.n(); ++i) split(buyer(i), y.buyer_bundles[i]);
  for (size_t j = 0; j < inst.k(); ++j) split(seller(j), y.seller_bundles[j]);
  return sw;
}

}  // namespace tsm

#endif  // TSM_ORACLES_HPP_
