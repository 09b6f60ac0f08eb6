// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_MECHANISMS_MECHANISM_HPP_
#define TSM_MECHANISMS_MECHANISM_HPP_

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsm/core.hpp"
#include "tsm/engine.hpp"
#include "tsm/mechanisms/auction.hpp"
#include "tsm/mechanisms/bilateral.hpp"
#include "tsm/mechanisms/combinatorial.hpp"
#include "tsm/mechanisms/knapsack.hpp"
#include "tsm/mechanisms/matroid_sbb.hpp"
#include "tsm/mechanisms/matroid_wbb.hpp"
#include "tsm/pricing.hpp"

namespace tsm {

enum class MechanismKind {
  kBilateral,
  kMatroidSbb,
  kMatroidWbb,
  kCombinatorial,
  kKnapsackSbb,
  kKnapsackWbb,
  kKnapsackGeneralSbb,
  kKnapsackGeneralWbb,
  kMutantPriceShaving,
  kMutantForcedTrade,
  kMutantReOffer,
};

enum class BudgetRequirement { kDsbb, kDwbb };

struct MechanismInfo {
  MechanismKind kind;
  std::string_view name;
  BudgetRequirement budget;
  bool mutant;
};

inline const std::vector<MechanismInfo>& mechanism_catalog() {
  using K = MechanismKind;
  using B = BudgetRequirement;
  static const std::vector<MechanismInfo> catalog = {
      {K::kBilateral, "bilateral", B::kDsbb, false},
      {K::kMatroidSbb, "matroid-sbb", B::kDsbb, false},
      {K::kMatroidWbb, "matroid-wbb", B::kDwbb, false},
      {K::kCombinatorial, "combinatorial", B::kDsbb, false},
      {K::kKnapsackSbb, "knapsack-sbb", B::kDsbb, false},
      {K::kKnapsackWbb, "knapsack-wbb", B::kDwbb, false},
      {K::kKnapsackGeneralSbb, "knapsack-general-sbb", B::kDsbb, false},
      {K::kKnapsackGeneralWbb, "knapsack-general-wbb", B::kDwbb, false},
      {K::kMutantPriceShaving, "mutant-price-shaving", B::kDsbb, true},
      {K::kMutantForcedTrade, "mutant-forced-trade", B::kDsbb, true},
      {K::kMutantReOffer, "mutant-re-offer", B::kDsbb, true},
  };
  return catalog;
}

inline const MechanismInfo& info(MechanismKind kind) {
  for (const auto& m : mechanism_catalog()) {
    if (m.kind == kind) return m;
  }
  throw ContractViolation("unknown mechanism kind");
}

inline std::optional<MechanismKind> parse_mechanism(std::string_view name) {
  for (const auto& m : mechanism_catalog()) {
    if (m.name == name) return m.kind;
  }
  return std::nullopt;
}

// A price as printed by the prices command.
struct PriceRow {
  std::string agent;
  std::string state;
  Price price;
};

// A mechanism bound to one market, with prices computed once.
class Mechanism {
 public:
  Mechanism(MechanismKind kind, const Instance& inst,
            const ExpectationEngine& engine)
      : kind_(kind), inst_(&inst), engine_(engine) {
    check_compatible();
    prepare();
  }

  MechanismKind kind() const { return kind_; }
  std::string_view name() const { return info(kind_).name; }
  BudgetRequirement budget() const { return info(kind_).budget; }
  const Instance& instance() const { return *inst_; }
  const ExpectationEngine& engine() const { return engine_; }

  // Whether the arrival order affects the run.
  bool online() const { return static_cast<bool>(start()); }

  // Fresh auction state for order-dependent mechanisms, else null.
  std::unique_ptr<Auction> start() const {
    switch (kind_) {
      case MechanismKind::kMatroidWbb:
        return std::make_unique<MatroidWbbAuction>(*wbb_);
      case MechanismKind::kCombinatorial:
        return std::make_unique<CombinatorialAuction>(*inst_, item_prices_);
      case MechanismKind::kKnapsackSbb:
      case MechanismKind::kKnapsackWbb:
      case MechanismKind::kKnapsackGeneralSbb:
      case MechanismKind::kKnapsackGeneralWbb:
        if (branch_.side == KnapsackBranch::Side::kSingleItem) {
          return std::make_unique<CombinatorialAuction>(*inst_, item_prices_);
        }
        if (regime_ == Regime::kSbb) return nullptr;
        if (branch_.side == KnapsackBranch::Side::kHigh) {
          return std::make_unique<MatroidWbbAuction>(*wbb_);
        }
        return std::make_unique<KnapsackWbbAuction>(*inst_, *knapsack_);
      default:
        return nullptr;
    }
  }

  Outcome run(const ValuationProfile& profile,
              const ArrivalOrder& order = ArrivalOrder::index_order()) const {
    if (auto auction = start()) return play(*auction, profile, order);
    switch (kind_) {
      case MechanismKind::kBilateral:
        return run_bilateral(*inst_, profile, bilateral_);
      case MechanismKind::kMatroidSbb:
        return run_matroid_sbb(*sbb_, profile);
      case MechanismKind::kMutantPriceShaving:
        return run_matroid_sbb(*sbb_, profile, SbbVariant::kPriceShaving);
      case MechanismKind::kMutantForcedTrade:
        return run_matroid_sbb(*sbb_, profile, SbbVariant::kForcedTrade);
      case MechanismKind::kMutantReOffer:
        return run_matroid_sbb(*sbb_, profile, SbbVariant::kReOffer);
      default:
        break;
    }
    if (sbb_) return run_matroid_sbb(*sbb_, profile);
    return run_knapsack_sbb(*inst_, profile, *knapsack_);
  }

  // Static item prices when the run uses the combinatorial mechanism.
  const std::vector<Rational>& item_prices() const { return item_prices_; }

  // Branch taken by the knapsack mechanisms.
  const KnapsackBranch& knapsack_branch() const { return branch_; }

  // Prices at the initial state, plus state-indexed tables when the state
  // space is small.
  std::vector<PriceRow> prices(size_t state_cap = 4096) const {
    std::vector<PriceRow> rows;
    auto name = [&](AgentId a) { return inst_->agent(a).name; };
    switch (kind_) {
      case MechanismKind::kBilateral:
        rows.push_back({"*", "initial", bilateral_});
        return rows;
      case MechanismKind::kCombinatorial:
        return item_rows();
      default:
        break;
    }
    if (branch_.side == KnapsackBranch::Side::kSingleItem) return item_rows();
    if (knapsack_) {
      for (size_t i = 0; i < inst_->n(); ++i) {
        if (!knapsack_->is_eligible(i)) continue;
        rows.push_back({name(buyer(i)), "initial", knapsack_->buyer_price[i]});
      }
      if (regime_ == Regime::kWbb) {
        for (size_t j = 0; j < inst_->k(); ++j) {
          rows.push_back({name(seller(j)), "initial", knapsack_->seller_price});
        }
      }
      return rows;
    }
    if (sbb_) return sbb_rows(state_cap);
    return wbb_rows(state_cap);
  }

 private:
  bool is_knapsack_kind() const {
    switch (kind_) {
      case MechanismKind::kKnapsackSbb:
      case MechanismKind::kKnapsackWbb:
      case MechanismKind::kKnapsackGeneralSbb:
      case MechanismKind::kKnapsackGeneralWbb:
        return true;
      default:
        return false;
    }
  }

  void check_compatible() const {
    const Instance& in = *inst_;
    auto fail = [&](const std::string& why) {
      throw IncompatibleMechanism(std::string(name()) + ": " + why);
    };
    switch (kind_) {
      case MechanismKind::kBilateral:
        if (in.n() != 1 || in.k() != 1 || in.m() != 1) {
          fail("needs exactly one buyer, one seller, one item");
        }
        break;
      case MechanismKind::kCombinatorial:
        if (!std::holds_alternative<Unconstrained>(in.constraint)) {
          fail("needs an unconstrained market");
        }
        try {
          check_combinatorial(in);
        } catch (const ContractViolation& e) {
          fail(e.what());
        }
        break;
      case MechanismKind::kKnapsackSbb:
      case MechanismKind::kKnapsackWbb:
        if (!in.is_knapsack()) fail("needs a knapsack constraint");
        for (const auto& b : in.buyers) {
          if (b.weight > Rational(1, 2)) {
            fail("weight of " + b.name + " above 1/2");
          }
        }
        break;
      case MechanismKind::kKnapsackGeneralSbb:
      case MechanismKind::kKnapsackGeneralWbb:
        if (!in.is_knapsack()) fail("needs a knapsack constraint");
        break;
      default:
        if (!in.is_matroid()) fail("needs a matroid constraint");
        break;
    }
  }

  void prepare() {
    switch (kind_) {
      case MechanismKind::kBilateral:
        bilateral_ = bilateral_price(*inst_, engine_);
        return;
      case MechanismKind::kCombinatorial:
        item_prices_ = combinatorial_item_prices(*inst_, engine_);
        return;
      case MechanismKind::kMatroidWbb:
        wbb_ = std::make_shared<MatroidWbbPricer>(*inst_, engine_);
        return;
      default:
        break;
    }
    if (!is_knapsack_kind()) {
      sbb_ = std::make_shared<MatroidSbbPricer>(*inst_, engine_);
      return;
    }
    regime_ = kind_ == MechanismKind::kKnapsackSbb ||
                      kind_ == MechanismKind::kKnapsackGeneralSbb
                  ? Regime::kSbb
                  : Regime::kWbb;
    bool general = kind_ == MechanismKind::kKnapsackGeneralSbb ||
                   kind_ == MechanismKind::kKnapsackGeneralWbb;
    if (inst_->k() == 1) {
      branch_.side = KnapsackBranch::Side::kSingleItem;
      item_prices_ = combinatorial_item_prices(*inst_, engine_);
      return;
    }
    if (!general) {
      branch_.side = KnapsackBranch::Side::kLow;
      branch_.low = full_mask(inst_->n());
      knapsack_ = std::make_shared<KnapsackPrices>(
          knapsack_prices(*inst_, regime_, engine_));
      return;
    }
    branch_ = choose_knapsack_branch(*inst_, regime_, engine_);
    if (branch_.side == KnapsackBranch::Side::kLow) {
      knapsack_ = std::make_shared<KnapsackPrices>(
          knapsack_prices(*inst_, regime_, engine_, branch_.low));
    } else if (regime_ == Regime::kSbb) {
      sbb_ = std::make_shared<MatroidSbbPricer>(*branch_.high_market, engine_);
    } else {
      wbb_ = std::make_shared<MatroidWbbPricer>(*branch_.high_market, engine_);
    }
  }

  std::vector<PriceRow> item_rows() const {
    std::vector<PriceRow> rows;
    for (size_t it = 0; it < inst_->m(); ++it) {
      rows.push_back({inst_->items[it], "initial", item_prices_[it]});
    }
    return rows;
  }

  static std::string mask_str(const Instance& in, Mask buyers, Mask sellers) {
    std::string s = "{";
    bool first = true;
    for (size_t i = 0; i < in.n(); ++i) {
      if (!has(buyers, i)) continue;
      s += (first ? "" : ",") + in.buyers[i].name;
      first = false;
    }
    for (size_t j = 0; j < in.k(); ++j) {
      if (!has(sellers, j)) continue;
      s += (first ? "" : ",") + in.sellers[j].name;
      first = false;
    }
    return s + "}";
  }

  std::vector<PriceRow> sbb_rows(size_t state_cap) const {
    const Instance& in = sbb_->instance();
    std::vector<PriceRow> rows;
    const size_t k = in.k();
    for (size_t j = 0; j < k; ++j) {
      rows.push_back({in.sellers[j].name, "initial", sbb_->seller_threshold(j)});
    }
    for (size_t i = 0; i < in.n(); ++i) {
      rows.push_back({in.buyers[i].name, "initial",
                      sbb_->buyer_threshold(i, 0, k)});
      for (size_t j = 0; j < k; ++j) {
        rows.push_back({in.buyers[i].name + "/" + in.sellers[j].name,
                        "initial", sbb_->trade_price(i, j, 0, k)});
      }
    }
    if ((std::uint64_t{1} << in.n()) * (k + 1) > state_cap) return rows;
    for (size_t r = 0; r <= k; ++r) {
      for (Mask a = 0; a < (Mask{1} << in.n()); ++a) {
        if (size_of(a) > r || !in.matroid().is_independent(a)) continue;
        std::string state = "A=" + mask_str(in, a, 0) + " r=" +
                            std::to_string(r);
        for (size_t i = 0; i < in.n(); ++i) {
          if (has(a, i)) continue;
          rows.push_back({in.buyers[i].name, state,
                          sbb_->buyer_threshold(i, a, r)});
        }
      }
    }
    return rows;
  }

  std::vector<PriceRow> wbb_rows(size_t state_cap) const {
    const Instance& in = wbb_->instance();
    const auto& ext = wbb_->extended();
    std::vector<PriceRow> rows;
    auto agents = [&]() {
      std::vector<AgentId> out;
      for (size_t j = 0; j < in.k(); ++j) out.push_back(seller(j));
      for (size_t i = 0; i < in.n(); ++i) out.push_back(buyer(i));
      return out;
    }();
    for (AgentId a : agents) {
      rows.push_back({in.agent(a).name, "initial", wbb_->price(a, 0)});
    }
    if ((std::uint64_t{1} << ext.size()) > state_cap) return rows;
    for (Mask x = 1; x < (Mask{1} << ext.size()); ++x) {
      if (!ext.is_independent(x)) continue;
      std::string state =
          "A'=" + mask_str(in, ext.buyer_part(x), ext.seller_part(x));
      for (AgentId a : agents) {
        if (x & wbb_->element(a)) continue;
        rows.push_back({in.agent(a).name, state, wbb_->price(a, x)});
      }
    }
    return rows;
  }

  MechanismKind kind_;
  const Instance* inst_;
  ExpectationEngine engine_;
  Regime regime_ = Regime::kSbb;
  Rational bilateral_;
  std::vector<Rational> item_prices_;
  std::shared_ptr<MatroidSbbPricer> sbb_;
  std::shared_ptr<MatroidWbbPricer> wbb_;
  std::shared_ptr<KnapsackPrices> knapsack_;
  KnapsackBranch branch_;
};

}  // namespace tsm

#endif  // TSM_MECHANISMS_MECHANISM_HPP_
