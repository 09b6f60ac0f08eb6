// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_IO_REPORT_HPP_
#define TSM_IO_REPORT_HPP_

#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsm/core.hpp"
#include "tsm/engine.hpp"
#include "tsm/harness/budget.hpp"
#include "tsm/harness/deviation.hpp"
#include "tsm/harness/orders.hpp"
#include "tsm/harness/ratio.hpp"
#include "tsm/mechanisms/mechanism.hpp"

namespace tsm {

inline constexpr const char* kRunReportSchema = "tsm-run-report/1";
inline constexpr const char* kVerifyReportSchema = "tsm-verify-report/1";

using Json = nlohmann::ordered_json;

// {"q": "p/q", "approx": decimal}
inline Json rational_json(const Rational& q) {
  return Json{{"q", to_string(q)}, {"approx", to_double(q)}};
}

struct TrialRecord {
  std::string profile;
  Rational weight;
  Outcome outcome;
  Rational welfare;
  Rational optimum;
};

struct RunReport {
  std::string mechanism;
  std::string instance;
  EngineConfig engine;
  std::string order_policy;
  std::string trial_order;
  std::vector<TrialRecord> trials;  // first max_trials
  size_t trials_total = 0;
  RatioReport ratio;
  size_t audited = 0;
  BudgetAudit audit;
};

inline std::string engine_mode(const EngineConfig& c) {
  switch (c.mode) {
    case EngineConfig::Mode::kExact:
      return "exact";
    case EngineConfig::Mode::kMonteCarlo:
      return "monte-carlo";
    default:
      return "auto";
  }
}

// Ratio over the policy, plus per-trial outcomes under the worst oblivious
// order. Every trial is audited; only the first max_trials are kept.
inline RunReport build_run_report(const Mechanism& mech,
                                  const OrderPolicy& policy,
                                  const std::string& instance_name,
                                  size_t max_trials = 64) {
  const Instance& inst = mech.instance();
  ProfileSet set(inst, mech.engine());
  RunReport rep;
  rep.mechanism = std::string(mech.name());
  rep.instance = instance_name;
  rep.engine = mech.engine().config();
  rep.order_policy = policy.describe();
  rep.ratio = expected_ratio(mech, policy, set);
  const auto orders = ratio_orders(mech, policy, set);
  const ArrivalOrder& order = orders.at(rep.ratio.worst_index);
  rep.trial_order = mech.online() ? order.describe() : "offline";
  for (size_t t = 0; t < set.profiles.size(); ++t) {
    const auto& p = set.profiles[t];
    Outcome o = mech.run(p, order);
    ++rep.audited;
    auto audit = audit_budget(o, mech.budget());
    for (auto& v : audit.violations) {
      if (rep.audit.violations.size() < 16) {
        rep.audit.violations.push_back("trial " + std::to_string(t) + ": " + v);
      }
    }
    rep.audit.pass = rep.audit.pass && audit.pass;
    if (rep.trials.size() < max_trials) {
      rep.trials.push_back({profile_str(p), set.weights[t], o,
                            welfare(inst, o, p), set.optimum[t]});
    }
  }
  rep.trials_total = set.profiles.size();
  return rep;
}

inline Json outcome_json(const Instance& inst, const Outcome& o) {
  Json alloc = Json::object();
  auto items = [&](ItemSet s) {
    Json a = Json::array();
    for (ItemSet rest = s; rest; rest &= rest - 1) {
      a.push_back(inst.items[std::countr_zero(rest)]);
    }
    return a;
  };
  Json pay = Json::object();
  for (size_t i = 0; i < inst.n(); ++i) {
    alloc[inst.buyers[i].name] = items(o.buyer_items[i]);
    pay[inst.buyers[i].name] = to_string(o.buyer_payments[i]);
  }
  for (size_t j = 0; j < inst.k(); ++j) {
    alloc[inst.sellers[j].name] = items(o.seller_items[j]);
    pay[inst.sellers[j].name] = to_string(o.seller_payments[j]);
  }
  Json ledger = Json::array();
  for (const auto& r : o.ledger) {
    ledger.push_back({{"item", inst.items[r.item]},
                      {"seller", inst.sellers[r.seller].name},
                      {"buyer", inst.buyers[r.buyer].name},
                      {"buyer_pays", to_string(r.buyer_pays)},
                      {"seller_receives", to_string(r.seller_receives)}});
  }
  return {{"allocation", alloc}, {"payments", pay}, {"ledger", ledger}};
}

inline Json ratio_json(const RatioReport& r) {
  Json orders = Json::array();
  for (const auto& o : r.per_order) {
    Json row{{"order", o.order},
             {"welfare", rational_json(o.welfare)},
             {"ratio", rational_json(o.ratio)}};
    if (!r.exact) row["std_error"] = o.std_error;
    orders.push_back(row);
  }
  Json j{{"policy", r.policy},
         {"mode", r.exact ? "exact" : "monte-carlo"},
         {"mechanism_welfare", rational_json(r.mechanism_welfare)},
         {"optimal_welfare", rational_json(r.optimal_welfare)},
         {"ratio", rational_json(r.ratio)},
         {"zero_over_zero", "1"},
         {"worst_order", r.worst_order}};
  if (!r.exact) {
    j["samples"] = r.samples;
    j["std_error"] = r.std_error;
  }
  j["per_order"] = orders;
  return j;
}

inline Json run_report_json(const Instance& inst, const RunReport& rep) {
  Json trials = Json::array();
  for (const auto& t : rep.trials) {
    Json row{{"profile", t.profile},
             {"weight", to_string(t.weight)},
             {"welfare", rational_json(t.welfare)},
             {"optimum", rational_json(t.optimum)}};
    row["outcome"] = outcome_json(inst, t.outcome);
    trials.push_back(row);
  }
  return {
      {"schema", kRunReportSchema},
      {"meta",
       {{"instance", rep.instance},
        {"mechanism", rep.mechanism},
        {"engine",
         {{"mode", engine_mode(rep.engine)},
          {"exact_cap", rep.engine.exact_cap},
          {"samples", rep.engine.samples},
          {"seed", rep.engine.seed}}},
        {"order", rep.order_policy},
        {"trial_order", rep.trial_order}}},
      {"ratio", ratio_json(rep.ratio)},
      {"budget",
       {{"pass", rep.audit.pass},
        {"audited", rep.audited},
        {"violations", rep.audit.violations}}},
      {"trials_total", rep.trials_total},
      {"trials", trials}};
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// One row per kept trial, then an aggregate row.
inline std::string run_report_csv(const RunReport& rep) {
  std::ostringstream os;
  os << "schema,mechanism,order,row,profile,weight,welfare,welfare_approx,"
        "optimum,optimum_approx,trades,ratio\n";
  auto prefix = [&](const std::string& row) {
    os << kRunReportSchema << ',' << csv_field(rep.mechanism) << ','
       << csv_field(rep.trial_order) << ',' << row << ',';
  };
  for (size_t t = 0; t < rep.trials.size(); ++t) {
    const auto& tr = rep.trials[t];
    prefix(std::to_string(t));
    os << csv_field(tr.profile) << ',' << to_string(tr.weight) << ','
       << to_string(tr.welfare) << ',' << to_decimal(tr.welfare) << ','
       << to_string(tr.optimum) << ',' << to_decimal(tr.optimum) << ','
       << tr.outcome.ledger.size() << ",\n";
  }
  prefix("aggregate");
  os << "," << "1," << to_string(rep.ratio.mechanism_welfare) << ','
     << to_decimal(rep.ratio.mechanism_welfare) << ','
     << to_string(rep.ratio.optimal_welfare) << ','
     << to_decimal(rep.ratio.optimal_welfare) << ",,"
     << to_string(rep.ratio.ratio) << '\n';
  return os.str();
}

}  // namespace tsm

#endif  // TSM_IO_REPORT_HPP_
