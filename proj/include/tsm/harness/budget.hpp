// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_HARNESS_BUDGET_HPP_
#define TSM_HARNESS_BUDGET_HPP_

#include <map>
#include <string>
#include <vector>

#include "tsm/core.hpp"
#include "tsm/mechanisms/mechanism.hpp"

namespace tsm {

struct BudgetAudit {
  bool pass = true;
  std::vector<std::string> violations;
};

// DSBB: every record balances exactly. DWBB: buyer_pays >= seller_receives.
// Both: no item appears in two records.
inline BudgetAudit audit_budget(const Outcome& outcome,
                                BudgetRequirement requirement) {
  BudgetAudit audit;
  std::map<size_t, size_t> uses;
  for (size_t t = 0; t < outcome.ledger.size(); ++t) {
    const TradeRecord& r = outcome.ledger[t];
    std::string where = "record " + std::to_string(t) + " (item " +
                        std::to_string(r.item) + "): ";
    if (++uses[r.item] == 2) {
      audit.violations.push_back(where + "item traded twice");
    }
    if (requirement == BudgetRequirement::kDsbb &&
        r.buyer_pays != r.seller_receives) {
      audit.violations.push_back(where + "pays " + to_string(r.buyer_pays) +
                                 ", receives " + to_string(r.seller_receives));
    }
    if (requirement == BudgetRequirement::kDwbb &&
        r.buyer_pays < r.seller_receives) {
      audit.violations.push_back(where + "deficit " +
                                 to_string(r.seller_receives - r.buyer_pays));
    }
  }
  audit.pass = audit.violations.empty();
  return audit;
}

}  // namespace tsm

#endif  // TSM_HARNESS_BUDGET_HPP_
