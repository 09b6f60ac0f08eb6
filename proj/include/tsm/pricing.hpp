// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_PRICING_HPP_
#define TSM_PRICING_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tsm/core.hpp"
#include "tsm/engine.hpp"
#include "tsm/matroid.hpp"
#include "tsm/oracles.hpp"
#include "tsm/rational.hpp"

namespace tsm {

// A posted price or the blocked marker (an infinite price nobody accepts).
class Price {
 public:
  Price(Rational value) : value_(std::move(value)) {}  // NOLINT
  static Price blocked() { return Price(); }

  bool is_blocked() const { return !value_.has_value(); }
  const Rational& value() const {
    if (!value_) throw ContractViolation("value of a blocked price");
    return *value_;
  }

  // Only a finite price can be accepted.
  bool accepted_by(const Rational& v) const { return value_ && v >= *value_; }

  friend bool operator==(const Price& a, const Price& b) {
    return a.value_ == b.value_;
  }
  friend bool operator<(const Price& a, const Price& b) {
    if (a.is_blocked()) return false;
    if (b.is_blocked()) return true;
    return *a.value_ < *b.value_;
  }
  friend bool operator<=(const Price& a, const Price& b) { return !(b < a); }
  friend bool operator>(const Price& a, const Price& b) { return b < a; }
  friend bool operator>=(const Price& a, const Price& b) { return !(a < b); }

  std::string str() const { return value_ ? to_string(*value_) : "blocked"; }

 private:
  Price() = default;
  std::optional<Rational> value_;
};

// Unit-valued profiles materialized once, with per-profile greedy orders.
class UnitProfileTable {
 public:
  static constexpr std::uint64_t kMaxRows = std::uint64_t{1} << 20;

  struct Row {
    Rational weight;
    std::vector<Rational> buyers;
    std::vector<Rational> sellers;
    std::vector<Rational> all;  // buyers then sellers
    std::vector<size_t> buyer_order;
    std::vector<size_t> all_order;
  };

  UnitProfileTable(const Instance& inst, const ExpectationEngine& engine)
      : exact_(engine.is_exact(inst)) {
    if (!inst.unit_valued()) {
      throw ContractViolation("unit profile table on non-unit valuations");
    }
    if (exact_ && profile_space_size(inst, kMaxRows) > kMaxRows) {
      throw CapExceeded("profile table above " + std::to_string(kMaxRows));
    }
    engine.for_each_weighted(
        inst, [this](const ValuationProfile& p, const Rational& w) {
          Row row;
          row.weight = w;
          row.buyers = p.buyer_values();
          row.sellers = p.seller_values();
          row.all = row.buyers;
          row.all.insert(row.all.end(), row.sellers.begin(), row.sellers.end());
          row.buyer_order = greedy_order(row.buyers);
          row.all_order = greedy_order(row.all);
          rows_.push_back(std::move(row));
        });
  }

  const std::vector<Row>& rows() const { return rows_; }
  bool exact() const { return exact_; }

 private:
  bool exact_;
  std::vector<Row> rows_;
};

// p_i(A, r, v) = v(OPT_B(v|A,r)) - v(OPT_B(v|A u {i},r)), or blocked.
inline Price buyer_threshold_realized(const Matroid& matroid,
                                      const std::vector<Rational>& values,
                                      size_t i, Mask a, size_t r) {
  Mask with = a | bit(i);
  if (has(a, i) || size_of(with) > r || !matroid.is_independent(with)) {
    return Price::blocked();
  }
  return Rational(opt_buyers(matroid, values, a, r).weight -
                  opt_buyers(matroid, values, with, r).weight);
}

// p_j = E[v_j].
inline Rational seller_threshold(const Instance& inst, size_t j) {
  return inst.sellers.at(j).distribution.mean();
}

// Prices of the strongly budget-balanced matroid mechanism.
class MatroidSbbPricer {
 public:
  MatroidSbbPricer(const Instance& inst, const ExpectationEngine& engine)
      : inst_(&inst), table_(inst, engine) {
    for (size_t j = 0; j < inst.k(); ++j) {
      seller_.push_back(::tsm::seller_threshold(inst, j));
    }
  }

  const Instance& instance() const { return *inst_; }
  const Rational& seller_threshold(size_t j) const { return seller_.at(j); }

  bool feasible(size_t i, Mask a, size_t r) const {
    Mask with = a | bit(i);
    return !has(a, i) && size_of(with) <= r &&
           inst_->matroid().is_independent(with);
  }

  // G(A, r) = E[v(OPT_B(v|A,r))].
  Rational expected_opt(Mask a, size_t r) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(a, r);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const Matroid& mat = inst_->matroid();
    if (size_of(a) > r || !mat.is_independent(a)) {
      throw ContractViolation("expected_opt: infeasible state");
    }
    Rational g = 0;
    for (const auto& row : table_.rows()) {
      g += row.weight *
           opt_buyers_ordered(mat, row.buyer_order, row.buyers, a, r).weight;
    }
    return cache_.emplace(key, std::move(g)).first->second;
  }

  // E[p_i(A, r, v)].
  Price buyer_threshold(size_t i, Mask a, size_t r) {
    if (!feasible(i, a, r)) return Price::blocked();
    return Rational(expected_opt(a, r) - expected_opt(a | bit(i), r));
  }

  // p_{i,j}(A, r) = (E[p_i(A,r,v)] + E[v_j]) / 3.
  Price trade_price(size_t i, size_t j, Mask a, size_t r) {
    Price b = buyer_threshold(i, a, r);
    if (b.is_blocked()) return b;
    return Rational((b.value() + seller_.at(j)) / 3);
  }

  const UnitProfileTable& table() const { return table_; }
  size_t cache_size() const { return cache_.size(); }

 private:
  const Instance* inst_;
  UnitProfileTable table_;
  std::vector<Rational> seller_;
  std::mutex mu_;
  std::map<std::pair<Mask, size_t>, Rational> cache_;
};

// Prices of the weakly budget-balanced matroid mechanism on the extended
// matroid. Agent masks use bits 0..n-1 for buyers and n..n+k-1 for sellers.
class MatroidWbbPricer {
 public:
  MatroidWbbPricer(const Instance& inst, const ExpectationEngine& engine)
      : inst_(&inst),
        ext_{&inst.matroid(), inst.k()},
        table_(inst, engine) {}

  const Instance& instance() const { return *inst_; }
  const ExtendedMatroid& extended() const { return ext_; }

  Mask element(AgentId a) const {
    return a.role == Role::kBuyer ? bit(a.index) : ext_.seller_element(a.index);
  }

  // F(X) = E[v(OPT(v|X))].
  Rational expected_opt(Mask x) {
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = cache_.find(x); it != cache_.end()) return it->second;
    if (!ext_.is_independent(x)) {
      throw ContractViolation("expected_opt: dependent conditioning set");
    }
    Rational f = 0;
    for (const auto& row : table_.rows()) {
      f += row.weight *
           opt_all_agents_ordered(ext_, row.all_order, row.all, x).weight;
    }
    return cache_.emplace(x, std::move(f)).first->second;
  }

  // p_a(A') = (F(A') - F(A' u {a})) / 2; blocked when A' u {a} is dependent.
  Price price(AgentId a, Mask a_prime) {
    Mask e = element(a);
    if ((a_prime & e) || !ext_.is_independent(a_prime | e)) {
      return Price::blocked();
    }
    return Rational((expected_opt(a_prime) - expected_opt(a_prime | e)) / 2);
  }

  // Realized difference for one profile (no halving).
  Price realized(AgentId a, Mask a_prime, const std::vector<Rational>& buyers,
                 const std::vector<Rational>& sellers) const {
    Mask e = element(a);
    if ((a_prime & e) || !ext_.is_independent(a_prime | e)) {
      return Price::blocked();
    }
    return Rational(
        opt_all_agents_matroid(ext_, buyers, sellers, a_prime).weight -
        opt_all_agents_matroid(ext_, buyers, sellers, a_prime | e).weight);
  }

  const UnitProfileTable& table() const { return table_; }

 private:
  const Instance* inst_;
  ExtendedMatroid ext_;
  UnitProfileTable table_;
  std::mutex mu_;
  std::map<Mask, Rational> cache_;
};

// p_j = E[SW_j(v)] / 2 with the exact welfare optimum as allocation rule.
inline std::vector<Rational> combinatorial_item_prices(
    const Instance& inst, const ExpectationEngine& engine) {
  std::vector<Rational> price(inst.m(), 0);
  engine.for_each_weighted(
      inst, [&](const ValuationProfile& p, const Rational& w) {
        auto y = opt_combinatorial(inst, p);
        auto sw = sw_contribution(inst, p, y);
        for (size_t it = 0; it < inst.m(); ++it) price[it] += w * sw[it];
      });
  for (auto& q : price) q /= 2;
  return price;
}

inline Rational combinatorial_item_price(size_t item, const Instance& inst,
                                         const ExpectationEngine& engine) {
  return combinatorial_item_prices(inst, engine).at(item);
}

enum class Regime { kSbb, kWbb };

// Buyers: max(w_i, 1/k). Sellers (WBB only): 1/k.
inline Rational artificial_weight(const Instance& inst, AgentId a,
                                  Regime regime) {
  if (inst.k() < 2) {
    throw ContractViolation("artificial weights need k >= 2");
  }
  Rational floor(1, inst.k());
  if (a.role == Role::kSeller) {
    if (regime == Regime::kSbb) {
      throw ContractViolation("sellers carry no artificial weight under SBB");
    }
    return floor;
  }
  const Rational& w = inst.buyers.at(a.index).weight;
  return w > floor ? w : floor;
}

inline std::vector<Rational> buyer_weights(const Instance& inst) {
  std::vector<Rational> w;
  for (const auto& b : inst.buyers) w.push_back(b.weight);
  return w;
}

// E[v(OPT(v))] under the knapsack constraint, buyers restricted to eligible.
inline Estimate knapsack_expected_opt(const Instance& inst,
                                      const ExpectationEngine& engine,
                                      Mask eligible = ~Mask{0}) {
  const auto w = buyer_weights(inst);
  return engine.expect(inst, [&](const ValuationProfile& p) {
    return opt_knapsack(p.buyer_values(), w, p.seller_values(), eligible).value;
  });
}

inline Rational knapsack_price_factor(Regime regime) {
  return regime == Regime::kSbb ? Rational(2, 7) : Rational(2, 5);
}

// (2/7 or 2/5) * w* * E[OPT].
inline Rational knapsack_price(const Instance& inst, AgentId a, Regime regime,
                               const Rational& expected_opt) {
  return knapsack_price_factor(regime) * artificial_weight(inst, a, regime) *
         expected_opt;
}

inline Rational knapsack_price(const Instance& inst, AgentId a, Regime regime,
                               const ExpectationEngine& engine) {
  return knapsack_price(inst, a, regime,
                        knapsack_expected_opt(inst, engine).mean);
}

// p = E[max(v_s, v_b)] / 2.
inline Rational bilateral_price(const Instance& inst,
                                const ExpectationEngine& engine) {
  if (inst.n() != 1 || inst.k() != 1 || inst.m() != 1) {
    throw ContractViolation("bilateral price needs one buyer, seller, item");
  }
  return engine
             .expect(inst,
                     [&](const ValuationProfile& p) {
                       Rational vs = agent_value(inst, seller(0), 1, p);
                       Rational vb = agent_value(inst, buyer(0), 1, p);
                       return vs > vb ? vs : vb;
                     })
             .mean /
         2;
}

}  // namespace tsm

#endif  // TSM_PRICING_HPP_
