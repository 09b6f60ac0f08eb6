// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_HARNESS_ORDERS_HPP_
#define TSM_HARNESS_ORDERS_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tsm/core.hpp"
#include "tsm/errors.hpp"
#include "tsm/mechanisms/auction.hpp"

namespace tsm {

inline constexpr size_t kExhaustiveOrderCap = 8;  // n + k
inline constexpr size_t kGreedyRolloutCap = 4096;

struct OrderPolicy {
  enum class Kind {
    kIndex,
    kReverse,
    kSequence,
    kRandom,
    kExhaustive,
    kGreedy,
    kAdversarial,
  };
  Kind kind = Kind::kIndex;
  MatchRule rule = MatchRule::kLowestIndex;
  std::vector<AgentId> sequence;
  std::uint64_t seed = 1;

  static OrderPolicy of(Kind kind) {
    OrderPolicy p;
    p.kind = kind;
    return p;
  }

  std::string describe() const {
    std::string rule_text =
        rule == MatchRule::kHighestIndex ? "-highest" : "";
    switch (kind) {
      case Kind::kIndex:
        return "index" + rule_text;
      case Kind::kReverse:
        return "reverse" + rule_text;
      case Kind::kSequence: {
        std::string s = "sequence:";
        for (size_t t = 0; t < sequence.size(); ++t) {
          s += (t ? "," : "") + to_string(sequence[t]);
        }
        return s;
      }
      case Kind::kRandom:
        return "random:" + std::to_string(seed);
      case Kind::kExhaustive:
        return "exhaustive";
      case Kind::kGreedy:
        return "greedy";
      case Kind::kAdversarial:
        return "adversarial";
    }
    return "?";
  }

  // index, index-highest, reverse, reverse-highest, random[:SEED],
  // exhaustive, greedy, adversarial, sequence:NAME,NAME,...
  static OrderPolicy parse(std::string_view text, const Instance& inst) {
    OrderPolicy p;
    std::string t(text);
    auto fail = [&]() -> OrderPolicy {
      throw InputError("unknown order policy '" + t + "'");
    };
    if (t == "index") return p;
    if (t == "index-highest") {
      p.rule = MatchRule::kHighestIndex;
      return p;
    }
    if (t == "reverse" || t == "reverse-highest") {
      p.kind = Kind::kReverse;
      if (t == "reverse-highest") p.rule = MatchRule::kHighestIndex;
      return p;
    }
    if (t == "exhaustive") return of(Kind::kExhaustive);
    if (t == "greedy") return of(Kind::kGreedy);
    if (t == "adversarial") return of(Kind::kAdversarial);
    if (t.rfind("random", 0) == 0) {
      p.kind = Kind::kRandom;
      if (t.size() > 6) {
        if (t[6] != ':') return fail();
        try {
          size_t used = 0;
          p.seed = std::stoull(t.substr(7), &used);
          if (used != t.size() - 7) return fail();
        } catch (const std::exception&) {
          return fail();
        }
      }
      return p;
    }
    if (t.rfind("sequence:", 0) == 0) {
      p.kind = Kind::kSequence;
      std::map<std::string, AgentId> by_name;
      for (size_t i = 0; i < inst.n(); ++i) by_name[inst.buyers[i].name] = buyer(i);
      for (size_t j = 0; j < inst.k(); ++j) by_name[inst.sellers[j].name] = seller(j);
      std::stringstream ss(t.substr(9));
      std::string name;
      while (std::getline(ss, name, ',')) {
        auto it = by_name.find(name);
        if (it == by_name.end()) {
          throw InputError("order names unknown agent '" + name + "'");
        }
        p.sequence.push_back(it->second);
      }
      return p;
    }
    return fail();
  }
};

// Sellers then buyers, each group permuted.
inline std::vector<AgentId> phase_sequence(const std::vector<size_t>& sellers,
                                           const std::vector<size_t>& buyers) {
  std::vector<AgentId> out;
  for (size_t j : sellers) out.push_back(seller(j));
  for (size_t i : buyers) out.push_back(buyer(i));
  return out;
}

inline std::vector<size_t> iota_vec(size_t n) {
  std::vector<size_t> v(n);
  std::iota(v.begin(), v.end(), size_t{0});
  return v;
}

// Every phase-respecting oblivious order.
inline std::vector<ArrivalOrder> exhaustive_orders(
    const Instance& inst, MatchRule rule = MatchRule::kLowestIndex) {
  if (inst.n() + inst.k() > kExhaustiveOrderCap) {
    throw CapExceeded("exhaustive orders need n + k <= 8");
  }
  std::vector<ArrivalOrder> out;
  auto s = iota_vec(inst.k());
  do {
    auto b = iota_vec(inst.n());
    do {
      out.push_back(ArrivalOrder::sequence(phase_sequence(s, b), rule));
    } while (std::next_permutation(b.begin(), b.end()));
  } while (std::next_permutation(s.begin(), s.end()));
  return out;
}

inline ArrivalOrder random_order(const Instance& inst, std::uint64_t seed,
                                 MatchRule rule = MatchRule::kLowestIndex) {
  std::mt19937_64 rng(seed);
  auto s = iota_vec(inst.k());
  auto b = iota_vec(inst.n());
  std::shuffle(s.begin(), s.end(), rng);
  std::shuffle(b.begin(), b.end(), rng);
  return ArrivalOrder::sequence(phase_sequence(s, b), rule);
}

inline ArrivalOrder reverse_order(const Instance& inst,
                                  MatchRule rule = MatchRule::kLowestIndex) {
  auto s = iota_vec(inst.k());
  auto b = iota_vec(inst.n());
  std::reverse(s.begin(), s.end());
  std::reverse(b.begin(), b.end());
  return ArrivalOrder::sequence(phase_sequence(s, b), rule);
}

// Welfare from this state on when the remaining agents arrive in index order
// with the given valuations.
inline Rational finish_in_index_order(
    const Auction& state, const std::map<AgentId, const Valuation*>& values) {
  auto a = state.clone();
  auto order = ArrivalOrder::index_order();
  Rational total = 0;
  while (!a->done()) {
    Move m = order.next(*a);
    total += a->step(m, *values.at(m.agent));
  }
  return total + a->leftover();
}

// Expected index-order welfare from this state over the pending agents'
// distributions: exact up to `cap` joint outcomes, sampled beyond.
inline Rational rollout_value(const Auction& state, size_t cap,
                              std::uint64_t seed) {
  const Instance& inst = state.instance();
  const auto pending = state.pending();
  std::uint64_t combos = 1;
  for (AgentId a : pending) {
    combos *= inst.agent(a).distribution.size();
    if (combos > cap) break;
  }
  std::map<AgentId, const Valuation*> values;
  if (combos <= cap) {
    std::vector<size_t> pos(pending.size(), 0);
    Rational total = 0;
    while (true) {
      Rational w = 1;
      for (size_t t = 0; t < pending.size(); ++t) {
        const auto& atom = inst.agent(pending[t]).distribution.atoms()[pos[t]];
        values[pending[t]] = &atom.value;
        w *= atom.probability;
      }
      total += w * finish_in_index_order(state, values);
      size_t t = 0;
      for (; t < pending.size(); ++t) {
        if (++pos[t] < inst.agent(pending[t]).distribution.size()) break;
        pos[t] = 0;
      }
      if (t == pending.size()) return total;
    }
  }
  std::mt19937_64 rng(seed);
  Rational total = 0;
  for (size_t s = 0; s < cap; ++s) {
    for (AgentId a : pending) {
      values[a] = &inst.agent(a).distribution.draw(uniform_unit(rng));
    }
    total += finish_in_index_order(state, values);
  }
  return total / cap;
}

// Adaptive heuristic: picks the move with the lowest one-step expected
// welfare, completing the run in index order.
inline ArrivalOrder greedy_adversary(size_t cap = kGreedyRolloutCap,
                                     std::uint64_t seed = 1) {
  return ArrivalOrder::adaptive(
      [cap, seed](const Auction& state) {
        const Instance& inst = state.instance();
        std::optional<Rational> best;
        Move pick{};
        for (const Move& m : state.legal_moves()) {
          Rational ev = 0;
          for (const auto& atom : inst.agent(m.agent).distribution.atoms()) {
            auto next = state.clone();
            Rational inc = next->step(m, atom.value);
            ev += atom.probability * (inc + rollout_value(*next, cap, seed));
          }
          if (!best || ev < *best) {
            best = ev;
            pick = m;
          }
        }
        return pick;
      },
      "greedy");
}

// Oblivious or adaptive orders for a policy. The adversarial policy maps to
// its sampled fallback: greedy, index, reverse and eight random orders.
inline std::vector<ArrivalOrder> make_order(const OrderPolicy& policy,
                                            const Instance& inst) {
  using K = OrderPolicy::Kind;
  switch (policy.kind) {
    case K::kIndex:
      return {ArrivalOrder::index_order(policy.rule)};
    case K::kReverse:
      return {reverse_order(inst, policy.rule)};
    case K::kSequence: {
      auto o = ArrivalOrder::sequence(policy.sequence, policy.rule);
      o.validate(inst);
      return {o};
    }
    case K::kRandom:
      return {random_order(inst, policy.seed, policy.rule)};
    case K::kExhaustive:
      return exhaustive_orders(inst, policy.rule);
    case K::kGreedy:
      return {greedy_adversary()};
    case K::kAdversarial: {
      std::vector<ArrivalOrder> out{greedy_adversary(),
                                    ArrivalOrder::index_order(),
                                    reverse_order(inst)};
      for (std::uint64_t s = 1; s <= 8; ++s) {
        out.push_back(random_order(inst, policy.seed + s));
      }
      return out;
    }
  }
  return {};
}

// Exact adaptive adversary: minimizes expected welfare over arrival and
// matching choices, seeing realized values of agents that already arrived.
class Adversary {
 public:
  explicit Adversary(size_t state_cap = size_t{1} << 21) : cap_(state_cap) {}

  Rational value(const Auction& state) {
    if (state.done()) return state.leftover();
    std::string key = state.key();
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (memo_.size() >= cap_) {
      throw CapExceeded("adversary state space above " + std::to_string(cap_));
    }
    const Instance& inst = state.instance();
    std::optional<Rational> best;
    for (const Move& m : state.legal_moves()) {
      Rational ev = 0;
      for (const auto& atom : inst.agent(m.agent).distribution.atoms()) {
        auto next = state.clone();
        Rational inc = next->step(m, atom.value);
        ev += atom.probability * (inc + value(*next));
      }
      if (!best || ev < *best) best = ev;
    }
    return memo_.emplace(std::move(key), *best).first->second;
  }

  size_t states() const { return memo_.size(); }

 private:
  size_t cap_;
  std::unordered_map<std::string, Rational> memo_;
};

}  // namespace tsm

#endif  // TSM_HARNESS_ORDERS_HPP_
