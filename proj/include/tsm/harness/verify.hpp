// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_HARNESS_VERIFY_HPP_
#define TSM_HARNESS_VERIFY_HPP_

#include <string>
#include <vector>

#include "tsm/harness/budget.hpp"
#include "tsm/harness/deviation.hpp"
#include "tsm/harness/lemmas.hpp"
#include "tsm/harness/orders.hpp"
#include "tsm/mechanisms/mechanism.hpp"

namespace tsm {

struct SuiteResult {
  explicit SuiteResult(std::string n, bool applicable = false)
      : name(std::move(n)), ran(applicable) {}

  std::string name;
  bool ran = false;  // false: not applicable to this market
  bool pass = true;
  std::uint64_t checks = 0;
  std::vector<std::string> failures;  // first few counterexamples
  std::string note;
};

struct VerifySelection {
  bool budget = false;
  bool dsic = false;
  bool ir = false;
  bool lemmas = false;

  bool any() const { return budget || dsic || ir || lemmas; }
  static VerifySelection all() { return {true, true, true, true}; }
};

inline constexpr size_t kMaxFailures = 8;

// Every profile under the probe orders, audited against the mechanism's
// budget requirement.
inline SuiteResult verify_budget(const Mechanism& mech) {
  require_exact(mech);
  SuiteResult s{"budget", true};
  const Instance& inst = mech.instance();
  const auto orders = probe_orders(inst);
  for_each_profile(inst, [&](const ValuationProfile& p, const Rational&) {
    for (const auto& o : orders) {
      ++s.checks;
      auto audit = audit_budget(mech.run(p, o), mech.budget());
      if (!audit.pass) {
        s.pass = false;
        if (s.failures.size() < kMaxFailures) {
          s.failures.push_back(profile_str(p) + " " + o.describe() + ": " +
                               audit.violations.front());
        }
      }
    }
  });
  return s;
}

inline SuiteResult verify_dsic(const Mechanism& mech) {
  SuiteResult s{"dsic", true};
  auto r = deviation_test_all(mech);
  s.pass = r.pass;
  s.checks = r.rows;
  for (const auto& v : r.violations) {
    if (s.failures.size() >= kMaxFailures) break;
    s.failures.push_back(to_string(v.agent) + " at " + v.profile + " " +
                         v.order + ": truthful " + to_string(v.truthful) +
                         ", report " + v.best_report + " gets " +
                         to_string(v.best));
  }
  if (r.tightest) s.note = "smallest margin " + to_string(r.tightest->margin);
  return s;
}

inline SuiteResult verify_ir(const Mechanism& mech) {
  SuiteResult s{"ir", true};
  auto r = ir_test(mech);
  s.pass = r.pass;
  s.checks = r.runs;
  for (const auto& v : r.violations) {
    if (s.failures.size() >= kMaxFailures) break;
    s.failures.push_back(to_string(v.agent) + " at " + v.profile + " " +
                         v.order + ": utility " + to_string(v.utility) +
                         " < " + to_string(v.outside));
  }
  return s;
}

// Lemma checks for unit matroid markets; for matroid-wbb also the
// telescoping identity on every profile and probe order.
inline std::vector<SuiteResult> verify_lemmas(const Mechanism& mech) {
  const Instance& inst = mech.instance();
  std::vector<SuiteResult> out;
  if (!inst.is_matroid() || !inst.unit_valued()) {
    SuiteResult s{"lemmas"};
    s.note = "not a unit matroid market";
    out.push_back(s);
    return out;
  }
  auto rep = lemma_suite(inst, mech.engine());
  for (const auto& l : rep.lemmas) {
    SuiteResult s{l.name, true};
    s.pass = l.pass;
    s.checks = l.checks;
    if (!l.pass) s.failures.push_back(l.counterexample);
    out.push_back(s);
  }
  if (mech.kind() == MechanismKind::kMatroidWbb) {
    SuiteResult s{"telescoping", true};
    MatroidWbbPricer pricer(inst, mech.engine());
    const auto orders = probe_orders(inst);
    for_each_profile(inst, [&](const ValuationProfile& p, const Rational&) {
      for (const auto& o : orders) {
        MatroidWbbAuction auction(pricer);
        play(auction, p, o);
        auto c = telescoping_check(pricer, auction);
        ++s.checks;
        if (!c.pass) {
          s.pass = false;
          if (s.failures.size() < kMaxFailures) {
            s.failures.push_back(profile_str(p) + " " + o.describe() + ": " +
                                 to_string(c.charged) + " != " +
                                 to_string(c.expected));
          }
        }
      }
    });
    out.push_back(s);
  }
  return out;
}

inline std::vector<SuiteResult> verify(const Mechanism& mech,
                                       VerifySelection sel) {
  if (!sel.any()) sel = VerifySelection::all();
  std::vector<SuiteResult> out;
  if (sel.budget) out.push_back(verify_budget(mech));
  if (sel.dsic) out.push_back(verify_dsic(mech));
  if (sel.ir) out.push_back(verify_ir(mech));
  if (sel.lemmas) {
    for (auto& s : verify_lemmas(mech)) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace tsm

#endif  // TSM_HARNESS_VERIFY_HPP_
