// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_HARNESS_LEMMAS_HPP_
#define TSM_HARNESS_LEMMAS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "tsm/core.hpp"
#include "tsm/engine.hpp"
#include "tsm/errors.hpp"
#include "tsm/matroid.hpp"
#include "tsm/mechanisms/matroid_wbb.hpp"
#include "tsm/oracles.hpp"
#include "tsm/pricing.hpp"

namespace tsm {

struct LemmaCheck {
  explicit LemmaCheck(std::string n) : name(std::move(n)) {}

  std::string name;
  bool pass = true;
  std::uint64_t checks = 0;
  std::string counterexample;

  void fail(std::string what) {
    if (pass) counterexample = std::move(what);
    pass = false;
  }
};

struct LemmaReport {
  std::vector<LemmaCheck> lemmas;

  bool pass() const {
    for (const auto& l : lemmas) {
      if (!l.pass) return false;
    }
    return true;
  }
  const LemmaCheck& at(std::string_view name) const {
    for (const auto& l : lemmas) {
      if (l.name == name) return l;
    }
    throw ContractViolation("no lemma named " + std::string(name));
  }
};

struct LemmaOptions {
  // Scales every realized price by a seeded factor in [3/2, 5/2]; a
  // sensitivity fixture, not a mechanism.
  bool perturb = false;
  std::uint64_t seed = 1;
  std::uint64_t state_cap = 1 << 22;
};

namespace lemma_detail {

inline std::string set_str(Mask s) {
  std::string out = "{";
  for (Mask rest = s; rest; rest &= rest - 1) {
    out += (out.size() > 1 ? "," : "") +
           std::to_string(std::countr_zero(rest));
  }
  return out + "}";
}

inline Rational perturbation(std::uint64_t seed, std::uint64_t a,
                             std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(a ^ splitmix64(b ^ (c << 1))));
  return Rational(3, 2) + Rational(static_cast<long>(h % 1001), 1000);
}

// Independent masks of an independence oracle, and the maximal ones.
template <typename Independent>
void independent_sets(size_t ground, Independent&& independent,
                      std::vector<Mask>& all, std::vector<Mask>& maximal) {
  for (Mask s = 0; s < (Mask{1} << ground); ++s) {
    if (!independent(s)) continue;
    all.push_back(s);
    bool is_max = true;
    for (size_t e = 0; e < ground && is_max; ++e) {
      if (!has(s, e) && independent(s | bit(e))) is_max = false;
    }
    if (is_max) maximal.push_back(s);
  }
}

}  // namespace lemma_detail

// Exhaustive checks of the pricing lemmas on a unit-valued matroid market:
// seller monotonicity, buyer monotonicity, rank bound, price-sum bound (SBB
// and extended), and monotonicity of the WBB prices.
inline LemmaReport lemma_suite(const Instance& inst,
                               const ExpectationEngine& engine,
                               const LemmaOptions& opt = {}) {
  using lemma_detail::set_str;
  if (!inst.is_matroid() || !inst.unit_valued()) {
    throw ContractViolation("lemma suite needs a unit-valued matroid market");
  }
  if (!engine.is_exact(inst)) {
    throw CapExceeded("lemma suite needs an enumerable profile space");
  }
  const size_t n = inst.n(), k = inst.k();
  if (n + k > 16) throw CapExceeded("lemma suite above 16 agents");
  const Matroid& mat = inst.matroid();
  MatroidSbbPricer sbb(inst, engine);
  MatroidWbbPricer wbb(inst, engine);
  const ExtendedMatroid& ext = wbb.extended();
  const auto& rows = sbb.table().rows();

  // Valid SBB states (A, r): A independent, |A| <= r <= k.
  struct State {
    Mask a;
    size_t r;
  };
  std::vector<State> states;
  for (size_t r = 0; r <= k; ++r) {
    for (Mask a = 0; a < (Mask{1} << n); ++a) {
      if (size_of(a) <= r && mat.is_independent(a)) states.push_back({a, r});
    }
  }
  auto state_str = [&](Mask a, size_t r) {
    return "A=" + set_str(a) + " r=" + std::to_string(r);
  };

  LemmaReport report;

  // Seller monotonicity: p_ij(X, r) <= p_ij(X', r') for X c X', r' <= r.
  LemmaCheck l1{"seller-monotonicity"};
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < k; ++j) {
      for (const State& s : states) {
        Price lo = sbb.trade_price(i, j, s.a, s.r);
        for (const State& t : states) {
          if ((s.a & ~t.a) || t.r > s.r) continue;
          ++l1.checks;
          Price hi = sbb.trade_price(i, j, t.a, t.r);
          if (!(lo <= hi)) {
            l1.fail("i=" + std::to_string(i) + " j=" + std::to_string(j) +
                    " " + state_str(s.a, s.r) + " -> " + state_str(t.a, t.r) +
                    ": " + lo.str() + " > " + hi.str());
          }
        }
      }
    }
  }
  report.lemmas.push_back(l1);

  // Buyer monotonicity on covering steps: add a buyer to A, lower r, or drop
  // a seller from the available set.
  LemmaCheck l2{"buyer-monotonicity"};
  auto min_price = [&](size_t i, Mask sellers, Mask a, size_t r) {
    Price best = Price::blocked();
    for (size_t j = 0; j < k; ++j) {
      if (has(sellers, j)) best = std::min(best, sbb.trade_price(i, j, a, r));
    }
    return best;
  };
  for (size_t i = 0; i < n; ++i) {
    for (const State& s : states) {
      for (Mask t = 0; t < (Mask{1} << k); ++t) {
        Price base = min_price(i, t, s.a, s.r);
        auto check = [&](Mask t2, Mask a2, size_t r2, const char* step) {
          ++l2.checks;
          Price next = min_price(i, t2, a2, r2);
          if (!(base <= next)) {
            l2.fail("i=" + std::to_string(i) + " " + step + " from " +
                    state_str(s.a, s.r) + " T=" + set_str(t) + ": " +
                    base.str() + " > " + next.str());
          }
        };
        for (size_t e = 0; e < n; ++e) {
          Mask a2 = s.a | bit(e);
          if (!has(s.a, e) && size_of(a2) <= s.r && mat.is_independent(a2)) {
            check(t, a2, s.r, "add buyer");
          }
        }
        if (s.r > size_of(s.a)) check(t, s.a, s.r - 1, "lower r");
        for (size_t j = 0; j < k; ++j) {
          if (has(t, j)) check(t & ~bit(j), s.a, s.r, "drop seller");
        }
      }
    }
  }
  report.lemmas.push_back(l2);

  // Rank bound: p_i(A, r, v) >= OPT(A, r) - OPT(A, r - 1), pointwise.
  LemmaCheck l3{"rank-bound"};
  for (const auto& row : rows) {
    for (const State& s : states) {
      if (s.r == 0 || size_of(s.a) > s.r - 1) continue;
      Rational base = opt_buyers(mat, row.buyers, s.a, s.r).weight;
      Rational drop = base - opt_buyers(mat, row.buyers, s.a, s.r - 1).weight;
      for (size_t i = 0; i < n; ++i) {
        Price p = buyer_threshold_realized(mat, row.buyers, i, s.a, s.r);
        if (p.is_blocked()) continue;
        ++l3.checks;
        if (p.value() < drop) {
          l3.fail("i=" + std::to_string(i) + " " + state_str(s.a, s.r) +
                  ": p=" + p.str() + " < " + to_string(drop));
        }
      }
    }
  }
  report.lemmas.push_back(l3);

  // Price-sum bound. Realized prices are nonnegative, so checking V with
  // A u V maximal covers every V.
  LemmaCheck l4{"price-sum-bound"};
  std::uint64_t work = 0;
  auto charge_work = [&](std::uint64_t units) {
    work += units;
    if (work > opt.state_cap) {
      throw CapExceeded("lemma suite above " + std::to_string(opt.state_cap) +
                        " state checks");
    }
  };
  for (size_t r = 0; r <= k; ++r) {
    std::vector<Mask> all, maximal;
    MatroidView view{&mat, 0, r};
    lemma_detail::independent_sets(
        n, [&](Mask s) { return view.is_independent(s); }, all, maximal);
    for (size_t row_id = 0; row_id < rows.size(); ++row_id) {
      const auto& row = rows[row_id];
      std::vector<Rational> g(Mask{1} << n, 0);
      for (Mask a : all) {
        g[a] = opt_buyers_ordered(mat, row.buyer_order, row.buyers, a, r).weight;
      }
      for (Mask b : maximal) {
        charge_work(Mask{1} << size_of(b));
        for (Mask a = b;; a = (a - 1) & b) {
          Rational sum = 0;
          for (Mask v = b & ~a; v; v &= v - 1) {
            auto i = static_cast<size_t>(std::countr_zero(v));
            Rational p = g[a] - g[a | bit(i)];
            if (opt.perturb) {
              p *= lemma_detail::perturbation(opt.seed, row_id, a, i + 64 * r);
            }
            sum += p;
          }
          ++l4.checks;
          if (sum > g[a]) {
            l4.fail("sbb profile " + std::to_string(row_id) + " " +
                    state_str(a, r) + " V=" + set_str(b & ~a) + ": " +
                    to_string(sum) + " > " + to_string(g[a]));
          }
          if (a == 0) break;
        }
      }
    }
  }
  {
    std::vector<Mask> all, maximal;
    lemma_detail::independent_sets(
        ext.size(), [&](Mask s) { return ext.is_independent(s); }, all,
        maximal);
    for (size_t row_id = 0; row_id < rows.size(); ++row_id) {
      const auto& row = rows[row_id];
      std::vector<Rational> f(Mask{1} << ext.size(), 0);
      for (Mask x : all) {
        f[x] = opt_all_agents_ordered(ext, row.all_order, row.all, x).weight;
      }
      for (Mask b : maximal) {
        charge_work(Mask{1} << size_of(b));
        for (Mask a = b;; a = (a - 1) & b) {
          Rational sum = 0;
          for (Mask v = b & ~a; v; v &= v - 1) {
            auto e = static_cast<size_t>(std::countr_zero(v));
            Rational p = f[a] - f[a | bit(e)];
            if (opt.perturb) {
              p *= lemma_detail::perturbation(opt.seed + 1, row_id, a, e);
            }
            sum += p;
          }
          ++l4.checks;
          if (sum > f[a]) {
            l4.fail("extended profile " + std::to_string(row_id) + " A'=" +
                    set_str(a) + " V=" + set_str(b & ~a) + ": " +
                    to_string(sum) + " > " + to_string(f[a]));
          }
          if (a == 0) break;
        }
      }
    }
  }
  report.lemmas.push_back(l4);

  // WBB monotonicity on covering steps X -> X u {e}, both independent.
  LemmaCheck l5{"wbb-monotonicity"};
  std::vector<AgentId> agents;
  for (size_t i = 0; i < n; ++i) agents.push_back(buyer(i));
  for (size_t j = 0; j < k; ++j) agents.push_back(seller(j));
  for (Mask x = 0; x < (Mask{1} << ext.size()); ++x) {
    if (!ext.is_independent(x)) continue;
    for (size_t e = 0; e < ext.size(); ++e) {
      Mask y = x | bit(e);
      if (has(x, e) || !ext.is_independent(y)) continue;
      for (AgentId a : agents) {
        ++l5.checks;
        Price px = wbb.price(a, x), py = wbb.price(a, y);
        if (!(px <= py)) {
          l5.fail(to_string(a) + " X=" + set_str(x) + " Y=" + set_str(y) +
                  ": " + px.str() + " > " + py.str());
        }
      }
    }
  }
  report.lemmas.push_back(l5);
  return report;
}

struct TelescopingCheck {
  bool pass = true;
  Rational charged;   // sum of prices charged when agents joined A'
  Rational expected;  // F(empty)/2 - F(A')/2
};

// Sum of charged prices equals half the drop of F along A'.
inline TelescopingCheck telescoping_check(MatroidWbbPricer& pricer,
                                          const MatroidWbbAuction& run) {
  TelescopingCheck c;
  c.charged = 0;
  for (const auto& o : run.charged()) c.charged += o.price;
  c.expected =
      (pricer.expected_opt(0) - pricer.expected_opt(run.charging_set())) / 2;
  c.pass = c.charged == c.expected;
  return c;
}

}  // namespace tsm

#endif  // TSM_HARNESS_LEMMAS_HPP_
