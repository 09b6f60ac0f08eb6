// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_HARNESS_RATIO_HPP_
#define TSM_HARNESS_RATIO_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsm/core.hpp"
#include "tsm/engine.hpp"
#include "tsm/harness/optimum.hpp"
#include "tsm/harness/orders.hpp"
#include "tsm/mechanisms/mechanism.hpp"

namespace tsm {

struct OrderResult {
  std::string order;
  Rational welfare;
  Rational ratio;
  double std_error = 0;
};

struct RatioReport {
  std::string mechanism;
  std::string policy;
  Rational mechanism_welfare = 0;
  Rational optimal_welfare = 0;
  Rational ratio = 1;
  bool exact = true;
  std::uint64_t samples = 0;
  double std_error = 0;  // of the ratio, Monte Carlo only
  std::vector<OrderResult> per_order;
  std::string worst_order;
  size_t worst_index = 0;  // into per_order
};

// 0/0 is reported as 1.
inline Rational welfare_ratio(const Rational& mech, const Rational& opt) {
  if (opt == 0) return mech == 0 ? Rational(1) : Rational(0);
  return mech / opt;
}

// Profiles of the engine with their weights and optimal welfare.
struct ProfileSet {
  std::vector<ValuationProfile> profiles;
  std::vector<Rational> weights;
  std::vector<Rational> optimum;
  bool exact = true;

  ProfileSet(const Instance& inst, const ExpectationEngine& engine)
      : exact(engine.is_exact(inst)) {
    engine.for_each_weighted(
        inst, [&](const ValuationProfile& p, const Rational& w) {
          profiles.push_back(p);
          weights.push_back(w);
          optimum.push_back(optimal_welfare(inst, p));
        });
  }

  Rational expected_optimum() const {
    Rational total = 0;
    for (size_t t = 0; t < weights.size(); ++t) total += weights[t] * optimum[t];
    return total;
  }
};

// Mean welfare of one order, with the delta-method standard error of the
// paired ratio estimator mean(W) / mean(OPT).
inline OrderResult evaluate_order(const Mechanism& mech, const ProfileSet& set,
                                  const ArrivalOrder& order,
                                  const Rational& expected_opt) {
  OrderResult r;
  r.order = order.describe();
  r.welfare = 0;
  std::vector<double> w(set.profiles.size());
  for (size_t t = 0; t < set.profiles.size(); ++t) {
    Rational x = welfare(mech.instance(), mech.run(set.profiles[t], order),
                         set.profiles[t]);
    r.welfare += set.weights[t] * x;
    w[t] = to_double(x);
  }
  r.ratio = welfare_ratio(r.welfare, expected_opt);
  const size_t count = w.size();
  if (!set.exact && count > 1 && expected_opt > 0) {
    double mx = to_double(r.welfare), my = to_double(expected_opt);
    double ratio = mx / my, s = 0;
    for (size_t t = 0; t < count; ++t) {
      double d = w[t] - ratio * to_double(set.optimum[t]);
      s += d * d;
    }
    double var = s / static_cast<double>(count - 1);
    r.std_error = std::sqrt(var / static_cast<double>(count)) / my;
  }
  return r;
}

// Oblivious order set used next to the exact adversary: every order when
// affordable, else index, reverse and seeded random orders.
inline std::vector<ArrivalOrder> breakdown_orders(const Instance& inst,
                                                  size_t profiles,
                                                  std::uint64_t seed) {
  std::uint64_t count = 1;
  for (size_t t = 2; t <= inst.n(); ++t) count *= t;
  for (size_t t = 2; t <= inst.k(); ++t) count *= t;
  if (inst.n() + inst.k() <= kExhaustiveOrderCap &&
      count * profiles <= (std::uint64_t{1} << 18)) {
    return exhaustive_orders(inst);
  }
  std::vector<ArrivalOrder> out{ArrivalOrder::index_order(),
                                reverse_order(inst)};
  for (std::uint64_t s = 1; s <= 8; ++s) {
    out.push_back(random_order(inst, seed + s));
  }
  return out;
}

// Orders evaluated for a policy.
inline std::vector<ArrivalOrder> ratio_orders(const Mechanism& mech,
                                              const OrderPolicy& policy,
                                              const ProfileSet& set) {
  if (!mech.online()) return {ArrivalOrder::index_order()};
  if (policy.kind == OrderPolicy::Kind::kAdversarial && set.exact) {
    return breakdown_orders(mech.instance(), set.profiles.size(), policy.seed);
  }
  return make_order(policy, mech.instance());
}

// E[mechanism welfare] / E[optimal welfare], minimized over the orders of the
// policy. Adversarial policies in exact mode use the adaptive adversary.
inline RatioReport expected_ratio(const Mechanism& mech,
                                  const OrderPolicy& policy,
                                  const ProfileSet& set) {
  RatioReport rep;
  rep.mechanism = std::string(mech.name());
  rep.policy = policy.describe();
  rep.exact = set.exact;
  rep.samples = set.profiles.size();
  rep.optimal_welfare = set.expected_optimum();

  const auto orders = ratio_orders(mech, policy, set);
  const bool adversarial = policy.kind == OrderPolicy::Kind::kAdversarial;

  std::optional<size_t> worst;
  for (const auto& o : orders) {
    rep.per_order.push_back(
        evaluate_order(mech, set, o, rep.optimal_welfare));
    if (!worst || rep.per_order.back().welfare <
                      rep.per_order[*worst].welfare) {
      worst = rep.per_order.size() - 1;
    }
  }
  rep.mechanism_welfare = rep.per_order[*worst].welfare;
  rep.std_error = rep.per_order[*worst].std_error;
  rep.worst_order = rep.per_order[*worst].order;
  rep.worst_index = *worst;
  if (!mech.online()) rep.worst_order = "offline";

  if (adversarial && set.exact && mech.online()) {
    Adversary adversary;
    Rational v = adversary.value(*mech.start());
    if (v < rep.mechanism_welfare) {
      rep.mechanism_welfare = v;
      rep.worst_order = "adaptive";
    }
  }
  rep.ratio = welfare_ratio(rep.mechanism_welfare, rep.optimal_welfare);
  return rep;
}

inline RatioReport expected_ratio(const Mechanism& mech,
                                  const OrderPolicy& policy) {
  return expected_ratio(mech, policy, ProfileSet(mech.instance(), mech.engine()));
}

}  // namespace tsm

#endif  // TSM_HARNESS_RATIO_HPP_
