// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_CORE_HPP_
#define TSM_CORE_HPP_

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tsm/errors.hpp"
#include "tsm/matroid.hpp"
#include "tsm/rational.hpp"

namespace tsm {

enum class Role : std::uint8_t { kBuyer, kSeller };

struct AgentId {
  Role role = Role::kBuyer;
  size_t index = 0;

  auto operator<=>(const AgentId&) const = default;
};

inline AgentId buyer(size_t i) { return {Role::kBuyer, i}; }
inline AgentId seller(size_t j) { return {Role::kSeller, j}; }

inline std::string to_string(AgentId a) {
  return (a.role == Role::kBuyer ? "b" : "s") + std::to_string(a.index);
}

// Item bundles over at most 32 items.
using ItemSet = std::uint32_t;
inline constexpr size_t kMaxItems = 32;

struct UnitValuation {
  Rational value;

  bool operator<(const UnitValuation& o) const { return value < o.value; }
  bool operator==(const UnitValuation& o) const { return value == o.value; }
};

// Max over additive clauses; each clause is a dense item -> weight vector.
struct XosValuation {
  std::vector<std::vector<Rational>> clauses;

  Rational clause_value(size_t c, ItemSet bundle) const {
    Rational total = 0;
    for (ItemSet rest = bundle; rest; rest &= rest - 1) {
      total += clauses[c][std::countr_zero(rest)];
    }
    return total;
  }

  // First clause attaining the maximum.
  size_t supporting_clause(ItemSet bundle) const {
    size_t best = 0;
    Rational best_value = clause_value(0, bundle);
    for (size_t c = 1; c < clauses.size(); ++c) {
      Rational v = clause_value(c, bundle);
      if (v > best_value) {
        best_value = v;
        best = c;
      }
    }
    return best;
  }

  Rational value(ItemSet bundle) const {
    if (bundle == 0) return 0;
    return clause_value(supporting_clause(bundle), bundle);
  }

  bool additive() const { return clauses.size() == 1; }

  bool operator<(const XosValuation& o) const {
    return std::lexicographical_compare(
        clauses.begin(), clauses.end(), o.clauses.begin(), o.clauses.end(),
        [](const auto& a, const auto& b) {
          return std::lexicographical_compare(a.begin(), a.end(), b.begin(),
                                              b.end());
        });
  }
  bool operator==(const XosValuation& o) const { return clauses == o.clauses; }
};

using Valuation = std::variant<UnitValuation, XosValuation>;

inline bool is_unit(const Valuation& v) {
  return std::holds_alternative<UnitValuation>(v);
}

inline const Rational& unit_value(const Valuation& v) {
  if (const auto* u = std::get_if<UnitValuation>(&v)) return u->value;
  throw ContractViolation("unit value requested from an XOS valuation");
}

// Value of a bundle. Items are indices below item_count.
inline Rational evaluate(const Valuation& v, ItemSet bundle,
                         size_t item_count) {
  if (item_count < kMaxItems && (bundle >> item_count) != 0) {
    throw InputError("bundle contains an unknown item");
  }
  if (const auto* u = std::get_if<UnitValuation>(&v)) {
    return bundle ? u->value : Rational(0);
  }
  return std::get<XosValuation>(v).value(bundle);
}

// Finite distribution with exact probabilities, stored in canonical order.
class Distribution {
 public:
  struct Atom {
    Valuation value;
    Rational probability;
  };

  Distribution() : Distribution(UnitValuation{0}) {}

  Distribution(Valuation point)  // NOLINT: implicit point mass
      : atoms_{Atom{std::move(point), 1}} {
    check_nonnegative(atoms_[0].value);
  }

  explicit Distribution(std::vector<Atom> atoms) {
    if (atoms.empty()) throw InputError("distribution has empty support");
    Rational total = 0;
    for (const auto& a : atoms) {
      if (a.probability <= 0 || a.probability > 1) {
        throw InputError("probability outside (0,1]: " +
                         to_string(a.probability));
      }
      check_nonnegative(a.value);
      total += a.probability;
    }
    if (total != 1) {
      throw InputError("probabilities sum to " + to_string(total) +
                       ", expected 1");
    }
    std::stable_sort(atoms.begin(), atoms.end(),
                     [](const Atom& x, const Atom& y) {
                       return x.value < y.value;
                     });
    for (auto& a : atoms) {
      if (!atoms_.empty() && atoms_.back().value == a.value) {
        atoms_.back().probability += a.probability;
      } else {
        atoms_.push_back(std::move(a));
      }
    }
  }

  static Distribution uniform(const std::vector<Rational>& values) {
    std::vector<Atom> atoms;
    for (const auto& v : values) {
      atoms.push_back({UnitValuation{v}, Rational(1, values.size())});
    }
    return Distribution(std::move(atoms));
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  size_t size() const { return atoms_.size(); }
  bool deterministic() const { return atoms_.size() == 1; }

  bool all_unit() const {
    return std::all_of(atoms_.begin(), atoms_.end(),
                       [](const Atom& a) { return is_unit(a.value); });
  }

  // Expected value of a unit-valued distribution.
  Rational mean() const {
    Rational m = 0;
    for (const auto& a : atoms_) m += a.probability * unit_value(a.value);
    return m;
  }

  // Draw with u uniform in [0,1).
  const Valuation& draw(const Rational& u) const {
    Rational cumulative = 0;
    for (const auto& a : atoms_) {
      cumulative += a.probability;
      if (u < cumulative) return a.value;
    }
    return atoms_.back().value;
  }

 private:
  static void check_nonnegative(const Valuation& v) {
    if (const auto* u = std::get_if<UnitValuation>(&v)) {
      if (u->value < 0) throw InputError("negative valuation");
      return;
    }
    const auto& x = std::get<XosValuation>(v);
    if (x.clauses.empty()) throw InputError("XOS valuation without clauses");
    for (const auto& c : x.clauses) {
      for (const auto& w : c) {
        if (w < 0) throw InputError("negative XOS clause weight");
      }
    }
  }

  std::vector<Atom> atoms_;
};

struct Agent {
  std::string name;
  Distribution distribution;
  Rational weight = 0;     // knapsack weight, buyers only
  ItemSet endowment = 0;   // sellers only
};

struct Unconstrained {};
struct KnapsackConstraint {};
struct MatroidConstraint {
  Matroid matroid;
};

using Constraint =
    std::variant<Unconstrained, MatroidConstraint, KnapsackConstraint>;

struct Instance {
  std::vector<Agent> buyers;
  std::vector<Agent> sellers;
  std::vector<std::string> items;
  Constraint constraint;

  size_t n() const { return buyers.size(); }
  size_t k() const { return sellers.size(); }
  size_t m() const { return items.size(); }

  const Agent& agent(AgentId a) const {
    return a.role == Role::kBuyer ? buyers.at(a.index) : sellers.at(a.index);
  }

  bool is_matroid() const {
    return std::holds_alternative<MatroidConstraint>(constraint);
  }
  bool is_knapsack() const {
    return std::holds_alternative<KnapsackConstraint>(constraint);
  }
  const Matroid& matroid() const {
    if (!is_matroid()) throw ContractViolation("instance has no matroid");
    return std::get<MatroidConstraint>(constraint).matroid;
  }

  // Owner of each item.
  std::vector<size_t> owners() const {
    std::vector<size_t> owner(m(), 0);
    for (size_t j = 0; j < k(); ++j) {
      for (ItemSet rest = sellers[j].endowment; rest; rest &= rest - 1) {
        owner[std::countr_zero(rest)] = j;
      }
    }
    return owner;
  }

  bool unit_valued() const {
    auto unit = [](const Agent& a) { return a.distribution.all_unit(); };
    return std::all_of(buyers.begin(), buyers.end(), unit) &&
           std::all_of(sellers.begin(), sellers.end(), unit);
  }

  // Unit-supply sellers each holding one item with k = m.
  bool unit_supply() const {
    return m() == k() &&
           std::all_of(sellers.begin(), sellers.end(), [](const Agent& a) {
             return std::popcount(a.endowment) == 1;
           });
  }

  void validate() const {
    if (m() > kMaxItems) throw InputError("more than 32 items");
    if (n() + k() > 64) throw InputError("more than 64 agents");
    std::set<std::string> names;
    for (const auto* group : {&buyers, &sellers}) {
      for (const auto& a : *group) {
        if (a.name.empty()) throw InputError("agent without a name");
        if (!names.insert(a.name).second) {
          throw InputError("duplicate agent name '" + a.name + "'");
        }
      }
    }
    ItemSet covered = 0;
    for (const auto& s : sellers) {
      if (s.endowment & covered) {
        throw InputError("item owned by two sellers (seller " + s.name + ")");
      }
      covered |= s.endowment;
    }
    ItemSet all = m() == kMaxItems ? ~ItemSet{0} : (ItemSet{1} << m()) - 1;
    if (covered != all) throw InputError("endowments do not cover all items");
    for (const auto* group : {&buyers, &sellers}) {
      for (const auto& a : *group) {
        for (const auto& atom : a.distribution.atoms()) {
          if (const auto* x = std::get_if<XosValuation>(&atom.value)) {
            for (const auto& c : x->clauses) {
              if (c.size() != m()) {
                throw InputError("XOS clause of agent " + a.name +
                                 " does not cover all items");
              }
            }
          }
        }
      }
    }
    for (const auto& b : buyers) {
      if (b.endowment) throw InputError("buyer " + b.name + " owns items");
    }
    if (is_matroid() || is_knapsack()) {
      if (!unit_supply()) {
        throw InputError("matroid/knapsack markets need one item per seller");
      }
      if (!unit_valued()) {
        throw InputError("matroid/knapsack markets need unit valuations");
      }
    }
    if (is_matroid() && matroid().size() != n()) {
      throw InputError("matroid ground set size differs from buyer count");
    }
    if (is_knapsack()) {
      for (const auto& b : buyers) {
        if (b.weight < 0 || b.weight > 1) {
          throw InputError("knapsack weight of " + b.name + " outside [0,1]");
        }
      }
    }
  }
};

struct ValuationProfile {
  std::vector<Valuation> buyers;
  std::vector<Valuation> sellers;

  const Valuation& at(AgentId a) const {
    return a.role == Role::kBuyer ? buyers.at(a.index) : sellers.at(a.index);
  }
  Valuation& at(AgentId a) {
    return a.role == Role::kBuyer ? buyers.at(a.index) : sellers.at(a.index);
  }
  const Rational& unit(AgentId a) const { return unit_value(at(a)); }

  std::vector<Rational> buyer_values() const { return values(buyers); }
  std::vector<Rational> seller_values() const { return values(sellers); }

  bool operator==(const ValuationProfile&) const = default;

 private:
  static std::vector<Rational> values(const std::vector<Valuation>& vs) {
    std::vector<Rational> out;
    out.reserve(vs.size());
    for (const auto& v : vs) out.push_back(unit_value(v));
    return out;
  }
};

struct TradeRecord {
  size_t item = 0;
  size_t seller = 0;
  size_t buyer = 0;
  Rational buyer_pays;
  Rational seller_receives;
};

// A posted price seen by an agent during a run.
struct Offer {
  AgentId agent;
  Rational price;
};

struct Outcome {
  std::vector<ItemSet> buyer_items;
  std::vector<ItemSet> seller_items;
  std::vector<Rational> buyer_payments;   // <= 0
  std::vector<Rational> seller_payments;  // >= 0
  std::vector<TradeRecord> ledger;
  std::vector<Offer> offers;

  static Outcome initial(const Instance& inst) {
    Outcome o;
    o.buyer_items.assign(inst.n(), 0);
    o.buyer_payments.assign(inst.n(), 0);
    o.seller_payments.assign(inst.k(), 0);
    for (const auto& s : inst.sellers) o.seller_items.push_back(s.endowment);
    return o;
  }

  void trade(size_t item, size_t seller, size_t buyer, const Rational& pays,
             const Rational& receives) {
    seller_items.at(seller) &= ~(ItemSet{1} << item);
    buyer_items.at(buyer) |= ItemSet{1} << item;
    buyer_payments[buyer] -= pays;
    seller_payments[seller] += receives;
    ledger.push_back({item, seller, buyer, pays, receives});
  }

  void offer(AgentId a, const Rational& price) { offers.push_back({a, price}); }

  ItemSet items_of(AgentId a) const {
    return a.role == Role::kBuyer ? buyer_items.at(a.index)
                                  : seller_items.at(a.index);
  }
  const Rational& payment_of(AgentId a) const {
    return a.role == Role::kBuyer ? buyer_payments.at(a.index)
                                  : seller_payments.at(a.index);
  }

  bool operator==(const Outcome& o) const {
    auto same_ledger = [](const TradeRecord& x, const TradeRecord& y) {
      return x.item == y.item && x.seller == y.seller && x.buyer == y.buyer &&
             x.buyer_pays == y.buyer_pays &&
             x.seller_receives == y.seller_receives;
    };
    return buyer_items == o.buyer_items && seller_items == o.seller_items &&
           buyer_payments == o.buyer_payments &&
           seller_payments == o.seller_payments &&
           std::equal(ledger.begin(), ledger.end(), o.ledger.begin(),
                      o.ledger.end(), same_ledger);
  }
};

inline Rational agent_value(const Instance& inst, AgentId a, ItemSet bundle,
                            const ValuationProfile& profile) {
  if (a.role == Role::kSeller) bundle &= inst.sellers.at(a.index).endowment;
  return evaluate(profile.at(a), bundle, inst.m());
}

// Buyers: v(X) + P (P <= 0). Sellers: v(X) + P.
inline Rational utility(const Instance& inst, AgentId a,
                        const Outcome& outcome,
                        const ValuationProfile& profile) {
  return agent_value(inst, a, outcome.items_of(a), profile) +
         outcome.payment_of(a);
}

// Utility of staying out: 0 for buyers, v(I_l) for sellers.
inline Rational outside_option(const Instance& inst, AgentId a,
                               const ValuationProfile& profile) {
  if (a.role == Role::kBuyer) return 0;
  return agent_value(inst, a, inst.sellers.at(a.index).endowment, profile);
}

inline Rational welfare(const Instance& inst, const Outcome& outcome,
                        const ValuationProfile& profile) {
  Rational total = 0;
  for (size_t i = 0; i < inst.n(); ++i) {
    total += agent_value(inst, buyer(i), outcome.buyer_items[i], profile);
  }
  for (size_t j = 0; j < inst.k(); ++j) {
    total += agent_value(inst, seller(j), outcome.seller_items[j], profile);
  }
  return total;
}

// Structural problems with an outcome; empty when consistent.
inline std::vector<std::string> check_outcome(const Instance& inst,
                                              const Outcome& o) {
  std::vector<std::string> problems;
  if (o.buyer_items.size() != inst.n() || o.seller_items.size() != inst.k()) {
    problems.push_back("allocation size mismatch");
    return problems;
  }
  ItemSet seen = 0;
  bool overlap = false;
  for (const auto* group : {&o.buyer_items, &o.seller_items}) {
    for (ItemSet s : *group) {
      if (s & seen) overlap = true;
      seen |= s;
    }
  }
  ItemSet all = inst.m() == kMaxItems ? ~ItemSet{0}
                                      : (ItemSet{1} << inst.m()) - 1;
  if (overlap) problems.push_back("item allocated twice");
  if (seen != all) problems.push_back("allocation does not cover all items");
  for (size_t j = 0; j < inst.k(); ++j) {
    if (o.seller_items[j] & ~inst.sellers[j].endowment) {
      problems.push_back("seller " + inst.sellers[j].name +
                         " holds a foreign item");
    }
  }
  std::vector<Rational> bp(inst.n(), 0), sp(inst.k(), 0);
  ItemSet traded = 0;
  for (const auto& r : o.ledger) {
    if (r.item >= inst.m() || r.buyer >= inst.n() || r.seller >= inst.k()) {
      problems.push_back("ledger record out of range");
      continue;
    }
    ItemSet b = ItemSet{1} << r.item;
    if (traded & b) problems.push_back("item traded twice: " + inst.items[r.item]);
    traded |= b;
    if (!(inst.sellers[r.seller].endowment & b)) {
      problems.push_back("trade of item not owned by the seller");
    }
    if (!(o.buyer_items[r.buyer] & b)) {
      problems.push_back("traded item not held by the buyer");
    }
    if (r.seller_receives < 0 || r.buyer_pays < r.seller_receives) {
      problems.push_back("record with buyer_pays < seller_receives or negative");
    }
    bp[r.buyer] -= r.buyer_pays;
    sp[r.seller] += r.seller_receives;
  }
  for (size_t i = 0; i < inst.n(); ++i) {
    if (o.buyer_items[i] & ~traded) {
      problems.push_back("buyer holds an item without a trade record");
    }
  }
  if (bp != o.buyer_payments || sp != o.seller_payments) {
    problems.push_back("payments do not reconstruct from the ledger");
  }
  return problems;
}

// Uniform rational in [0,1) with 53 random bits.
template <typename Rng>
Rational uniform_unit(Rng& rng) {
  std::uint64_t bits = rng() >> 11;
  return Rational(Integer(bits), Integer(1) << 53);
}

template <typename Rng>
ValuationProfile sample_profile(const Instance& inst, Rng& rng) {
  ValuationProfile p;
  p.buyers.reserve(inst.n());
  p.sellers.reserve(inst.k());
  for (const auto& b : inst.buyers) {
    p.buyers.push_back(b.distribution.draw(uniform_unit(rng)));
  }
  for (const auto& s : inst.sellers) {
    p.sellers.push_back(s.distribution.draw(uniform_unit(rng)));
  }
  return p;
}

inline ValuationProfile sample_profile(const Instance& inst,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_profile(inst, rng);
}

}  // namespace tsm

#endif  // TSM_CORE_HPP_
