// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_MECHANISMS_AUCTION_HPP_
#define TSM_MECHANISMS_AUCTION_HPP_

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tsm/core.hpp"
#include "tsm/errors.hpp"

namespace tsm {

// One arrival: the agent, and for a buyer the seller it is matched with.
struct Move {
  AgentId agent;
  std::optional<size_t> partner;

  bool operator==(const Move&) const = default;
};

enum class MatchRule { kLowestIndex, kHighestIndex };

// An online mechanism as a state machine. Sellers arrive first, then buyers.
class Auction {
 public:
  virtual ~Auction() = default;

  virtual const Instance& instance() const = 0;

  // Agents allowed to arrive next, ascending by index.
  virtual std::vector<AgentId> arrivals() const = 0;

  // Sellers an arriving buyer may be matched with; empty when unused.
  virtual std::vector<size_t> partners() const { return {}; }

  // Every agent that has not arrived yet, sellers first.
  virtual std::vector<AgentId> pending() const = 0;

  std::vector<Move> legal_moves() const {
    std::vector<Move> moves;
    const auto with = partners();
    for (AgentId a : arrivals()) {
      if (a.role == Role::kBuyer && !with.empty()) {
        for (size_t j : with) moves.push_back({a, j});
      } else {
        moves.push_back({a, std::nullopt});
      }
    }
    return moves;
  }

  // Processes one arrival with the agent's reported valuation. Returns the
  // welfare that the step fixes irrevocably (true = reported here).
  virtual Rational step(const Move& move, const Valuation& report) = 0;

  virtual bool done() const = 0;

  // Welfare of items still held by pending sellers.
  virtual Rational leftover() const = 0;

  // Identifies the state for everything that affects future welfare.
  virtual std::string key() const = 0;

  virtual const Outcome& outcome() const = 0;
  virtual std::unique_ptr<Auction> clone() const = 0;
};

// Shared bookkeeping: arrival phases, move validation, outcome.
class PhasedAuction : public Auction {
 public:
  explicit PhasedAuction(const Instance& inst)
      : inst_(&inst),
        outcome_(Outcome::initial(inst)),
        buyer_seen_(inst.n(), false),
        seller_seen_(inst.k(), false) {}

  const Instance& instance() const override { return *inst_; }
  const Outcome& outcome() const override { return outcome_; }

  std::vector<AgentId> arrivals() const override {
    std::vector<AgentId> out;
    if (sellers_left_ > 0) {
      for (size_t j = 0; j < inst_->k(); ++j) {
        if (!seller_seen_[j]) out.push_back(seller(j));
      }
      return out;
    }
    for (size_t i = 0; i < inst_->n(); ++i) {
      if (!buyer_seen_[i]) out.push_back(buyer(i));
    }
    return out;
  }

  std::vector<AgentId> pending() const override {
    std::vector<AgentId> out;
    for (size_t j = 0; j < inst_->k(); ++j) {
      if (!seller_seen_[j]) out.push_back(seller(j));
    }
    for (size_t i = 0; i < inst_->n(); ++i) {
      if (!buyer_seen_[i]) out.push_back(buyer(i));
    }
    return out;
  }

  bool done() const override {
    return sellers_left_ == 0 && (buyers_left_ == 0 || closed());
  }

 protected:
  // True once no buyer can trade any more.
  virtual bool closed() const { return false; }

  void accept(const Move& move) {
    if (done()) throw ContractViolation("auction already finished");
    const AgentId a = move.agent;
    bool buyer_phase = sellers_left_ == 0;
    if (a.role == Role::kSeller) {
      if (buyer_phase || a.index >= inst_->k() || seller_seen_[a.index]) {
        throw ContractViolation("illegal arrival of " + to_string(a));
      }
      seller_seen_[a.index] = true;
      --sellers_left_;
      return;
    }
    if (!buyer_phase || a.index >= inst_->n() || buyer_seen_[a.index]) {
      throw ContractViolation("illegal arrival of " + to_string(a));
    }
    const auto with = partners();
    if (!with.empty() &&
        (!move.partner ||
         std::find(with.begin(), with.end(), *move.partner) == with.end())) {
      throw ContractViolation("illegal partner for " + to_string(a));
    }
    buyer_seen_[a.index] = true;
    --buyers_left_;
  }

  std::string seen_key() const {
    std::string s;
    for (bool b : seller_seen_) s += b ? '1' : '0';
    s += '|';
    for (bool b : buyer_seen_) s += b ? '1' : '0';
    return s;
  }

  size_t item_of(size_t j) const {
    return static_cast<size_t>(std::countr_zero(inst_->sellers[j].endowment));
  }

  const Instance* inst_;
  Outcome outcome_;
  std::vector<bool> buyer_seen_;
  std::vector<bool> seller_seen_;
  size_t buyers_left_ = inst_->n();
  size_t sellers_left_ = inst_->k();
};

// Arrival order: a fixed sequence, index order, or an adaptive strategy that
// sees the public state.
class ArrivalOrder {
 public:
  using Strategy = std::function<Move(const Auction&)>;

  static ArrivalOrder index_order(MatchRule rule = MatchRule::kLowestIndex) {
    ArrivalOrder o;
    o.rule_ = rule;
    return o;
  }

  static ArrivalOrder sequence(std::vector<AgentId> agents,
                               MatchRule rule = MatchRule::kLowestIndex) {
    ArrivalOrder o;
    o.sequence_ = std::move(agents);
    o.fixed_ = true;
    o.rule_ = rule;
    return o;
  }

  static ArrivalOrder adaptive(Strategy strategy, std::string name) {
    ArrivalOrder o;
    o.strategy_ = std::move(strategy);
    o.name_ = std::move(name);
    return o;
  }

  MatchRule rule() const { return rule_; }
  const std::vector<AgentId>& agents() const { return sequence_; }

  // A fixed sequence must list every agent exactly once.
  void validate(const Instance& inst) const {
    if (!fixed_) return;
    std::vector<int> seen_b(inst.n(), 0), seen_s(inst.k(), 0);
    for (AgentId a : sequence_) {
      auto& seen = a.role == Role::kBuyer ? seen_b : seen_s;
      if (a.index >= seen.size()) {
        throw InputError("order names unknown agent " + to_string(a));
      }
      if (seen[a.index]++) {
        throw InputError("order lists " + to_string(a) + " twice");
      }
    }
    for (size_t i = 0; i < inst.n(); ++i) {
      if (!seen_b[i]) throw InputError("order omits " + to_string(buyer(i)));
    }
    for (size_t j = 0; j < inst.k(); ++j) {
      if (!seen_s[j]) throw InputError("order omits " + to_string(seller(j)));
    }
  }

  Move next(const Auction& auction) const {
    if (strategy_) return strategy_(auction);
    const auto ready = auction.arrivals();
    if (ready.empty()) throw ContractViolation("no agent can arrive");
    AgentId pick = ready.front();
    if (fixed_) {
      auto it = std::find_if(sequence_.begin(), sequence_.end(), [&](AgentId a) {
        return std::find(ready.begin(), ready.end(), a) != ready.end();
      });
      if (it == sequence_.end()) throw ContractViolation("order exhausted");
      pick = *it;
    }
    Move m{pick, std::nullopt};
    if (pick.role == Role::kBuyer) {
      const auto with = auction.partners();
      if (!with.empty()) {
        m.partner = rule_ == MatchRule::kLowestIndex ? with.front() : with.back();
      }
    }
    return m;
  }

  std::string describe() const {
    if (strategy_) return name_;
    std::string rule = rule_ == MatchRule::kLowestIndex ? "" : " match=highest";
    if (!fixed_) return "index" + rule;
    std::string s = "sequence(";
    for (size_t t = 0; t < sequence_.size(); ++t) {
      if (t) s += ' ';
      s += to_string(sequence_[t]);
    }
    return s + ")" + rule;
  }

 private:
  ArrivalOrder() = default;

  std::vector<AgentId> sequence_;
  bool fixed_ = false;
  MatchRule rule_ = MatchRule::kLowestIndex;
  Strategy strategy_;
  std::string name_;
};

// Drives an auction to completion on a profile.
inline Outcome play(Auction& auction, const ValuationProfile& profile,
                    const ArrivalOrder& order) {
  order.validate(auction.instance());
  while (!auction.done()) {
    Move m = order.next(auction);
    auction.step(m, profile.at(m.agent));
  }
  return auction.outcome();
}

}  // namespace tsm

#endif  // TSM_MECHANISMS_AUCTION_HPP_
