// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_HARNESS_DEVIATION_HPP_
#define TSM_HARNESS_DEVIATION_HPP_

#include <set>
#include <string>
#include <variant>
#include <vector>

#include "tsm/core.hpp"
#include "tsm/engine.hpp"
#include "tsm/errors.hpp"
#include "tsm/harness/orders.hpp"
#include "tsm/mechanisms/mechanism.hpp"

namespace tsm {

inline const Rational& probe_offset() {
  static const Rational kOffset(1, 1000);
  return kOffset;
}

inline std::string valuation_str(const Valuation& v) {
  if (const auto* u = std::get_if<UnitValuation>(&v)) return to_string(u->value);
  const auto& x = std::get<XosValuation>(v);
  std::string s = "xos[";
  for (size_t c = 0; c < x.clauses.size(); ++c) {
    s += c ? "|" : "";
    for (size_t it = 0; it < x.clauses[c].size(); ++it) {
      s += (it ? "," : "") + to_string(x.clauses[c][it]);
    }
  }
  return s + "]";
}

inline std::string profile_str(const ValuationProfile& p) {
  std::string s = "b(";
  for (size_t i = 0; i < p.buyers.size(); ++i) {
    s += (i ? " " : "") + valuation_str(p.buyers[i]);
  }
  s += ") s(";
  for (size_t j = 0; j < p.sellers.size(); ++j) {
    s += (j ? " " : "") + valuation_str(p.sellers[j]);
  }
  return s + ")";
}

struct DeviationReport {
  AgentId agent;
  std::string profile;
  std::string order;
  Rational truthful;
  std::string best_report;
  Rational best;
  Rational margin;  // truthful - best
};

struct DeviationResult {
  bool pass = true;
  size_t rows = 0;
  std::vector<DeviationReport> violations;  // first kMaxKept
  std::optional<DeviationReport> tightest;  // smallest margin seen

  static constexpr size_t kMaxKept = 16;
};

// Orders tried by the truthfulness and IR checks.
inline std::vector<ArrivalOrder> probe_orders(const Instance& inst) {
  return {ArrivalOrder::index_order(),
          ArrivalOrder::index_order(MatchRule::kHighestIndex),
          reverse_order(inst), random_order(inst, 7)};
}

inline void require_exact(const Mechanism& mech) {
  if (!mech.engine().is_exact(mech.instance())) {
    throw CapExceeded("truthfulness checks need an enumerable profile space");
  }
}

// Misreports: the agent's support, and values just across every posted price
// of the truthful run. XOS agents also get additive reports p_j +- 1/1000 on
// each item subset.
inline std::vector<Valuation> probe_reports(const Mechanism& mech, AgentId a,
                                            const Outcome& truthful) {
  const Instance& inst = mech.instance();
  const auto& dist = inst.agent(a).distribution;
  std::vector<Valuation> out;
  for (const auto& atom : dist.atoms()) out.push_back(atom.value);
  const Rational& d = probe_offset();
  if (dist.all_unit()) {
    std::set<Rational> values;
    for (const auto& offer : truthful.offers) {
      for (const Rational& v : {Rational(offer.price - d), offer.price,
                                Rational(offer.price + d)}) {
        values.insert(v < 0 ? Rational(0) : v);
      }
    }
    for (const auto& v : values) out.push_back(UnitValuation{v});
    return out;
  }
  const size_t m = inst.m();
  std::vector<Rational> base = mech.item_prices();
  if (base.size() != m) base.assign(m, 0);
  if (m > 12) return out;
  for (ItemSet t = 1; t < (ItemSet{1} << m); ++t) {
    for (int sign : {1, -1}) {
      std::vector<Rational> clause(m, 0);
      for (size_t it = 0; it < m; ++it) {
        if (t >> it & 1) {
          Rational w = base[it] + sign * d;
          clause[it] = w < 0 ? Rational(0) : w;
        }
      }
      out.push_back(XosValuation{{clause}});
    }
  }
  return out;
}

// Pointwise DSIC check for one agent over every profile and probe order.
inline DeviationResult deviation_test(const Mechanism& mech, AgentId agent,
                                      const std::vector<ArrivalOrder>& orders) {
  require_exact(mech);
  const Instance& inst = mech.instance();
  DeviationResult res;
  for_each_profile(inst, [&](const ValuationProfile& p, const Rational&) {
    for (const auto& order : orders) {
      Outcome truthful = mech.run(p, order);
      DeviationReport row{agent, profile_str(p), order.describe(), 0, "", 0, 0};
      row.truthful = utility(inst, agent, truthful, p);
      row.best = row.truthful;
      row.best_report = valuation_str(p.at(agent));
      ValuationProfile lie = p;
      for (const auto& report : probe_reports(mech, agent, truthful)) {
        lie.at(agent) = report;
        Rational u = utility(inst, agent, mech.run(lie, order), p);
        if (u > row.best) {
          row.best = u;
          row.best_report = valuation_str(report);
        }
      }
      row.margin = row.truthful - row.best;
      ++res.rows;
      if (!res.tightest || row.margin < res.tightest->margin) res.tightest = row;
      if (row.margin < 0) {
        res.pass = false;
        if (res.violations.size() < DeviationResult::kMaxKept) {
          res.violations.push_back(row);
        }
      }
    }
  });
  return res;
}

inline DeviationResult deviation_test(const Mechanism& mech, AgentId agent) {
  return deviation_test(mech, agent, probe_orders(mech.instance()));
}

// Every buyer and seller.
inline DeviationResult deviation_test_all(const Mechanism& mech) {
  DeviationResult all;
  const Instance& inst = mech.instance();
  std::vector<AgentId> agents;
  for (size_t i = 0; i < inst.n(); ++i) agents.push_back(buyer(i));
  for (size_t j = 0; j < inst.k(); ++j) agents.push_back(seller(j));
  const auto orders = probe_orders(inst);
  for (AgentId a : agents) {
    DeviationResult r = deviation_test(mech, a, orders);
    all.rows += r.rows;
    all.pass = all.pass && r.pass;
    for (auto& v : r.violations) {
      if (all.violations.size() < DeviationResult::kMaxKept) {
        all.violations.push_back(std::move(v));
      }
    }
    if (r.tightest && (!all.tightest || r.tightest->margin < all.tightest->margin)) {
      all.tightest = r.tightest;
    }
  }
  return all;
}

struct IrViolation {
  AgentId agent;
  std::string profile;
  std::string order;
  Rational utility;
  Rational outside;
};

struct IrResult {
  bool pass = true;
  size_t runs = 0;
  std::vector<IrViolation> violations;
};

// Buyers end with utility >= 0, sellers with at least v(I_l).
inline IrResult ir_test(const Mechanism& mech,
                        const std::vector<ArrivalOrder>& orders) {
  require_exact(mech);
  const Instance& inst = mech.instance();
  IrResult res;
  for_each_profile(inst, [&](const ValuationProfile& p, const Rational&) {
    for (const auto& order : orders) {
      Outcome o = mech.run(p, order);
      ++res.runs;
      auto check = [&](AgentId a) {
        Rational u = utility(inst, a, o, p);
        Rational out = outside_option(inst, a, p);
        if (u < out) {
          res.pass = false;
          if (res.violations.size() < DeviationResult::kMaxKept) {
            res.violations.push_back(
                {a, profile_str(p), order.describe(), u, out});
          }
        }
      };
      for (size_t i = 0; i < inst.n(); ++i) check(buyer(i));
      for (size_t j = 0; j < inst.k(); ++j) check(seller(j));
    }
  });
  return res;
}

inline IrResult ir_test(const Mechanism& mech) {
  return ir_test(mech, probe_orders(mech.instance()));
}

}  // namespace tsm

#endif  // TSM_HARNESS_DEVIATION_HPP_
