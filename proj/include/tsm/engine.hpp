// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_ENGINE_HPP_
#define TSM_ENGINE_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tsm/core.hpp"
#include "tsm/errors.hpp"
#include "tsm/rational.hpp"

namespace tsm {

struct EngineConfig {
  enum class Mode { kAuto, kExact, kMonteCarlo };

  Mode mode = Mode::kAuto;
  std::uint64_t exact_cap = 1'000'000;
  std::uint64_t samples = 4096;
  std::uint64_t seed = 1;
};

struct Estimate {
  Rational mean = 0;
  double std_error = 0;
  std::uint64_t samples = 0;
  bool exact = true;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Number of joint profiles, saturated at limit + 1.
inline std::uint64_t profile_space_size(const Instance& inst,
                                        std::uint64_t limit) {
  std::uint64_t size = 1;
  for (const auto* group : {&inst.buyers, &inst.sellers}) {
    for (const auto& a : *group) {
      size *= a.distribution.size();
      if (size > limit) return limit + 1;
    }
  }
  return size;
}

// Calls f(profile, probability) for every joint profile, odometer order with
// buyer 0 varying fastest.
template <typename F>
void for_each_profile(const Instance& inst, F&& f) {
  std::vector<const Agent*> agents;
  for (const auto& b : inst.buyers) agents.push_back(&b);
  for (const auto& s : inst.sellers) agents.push_back(&s);
  const size_t total = agents.size();
  const size_t n = inst.n();

  ValuationProfile profile;
  for (const auto& b : inst.buyers) {
    profile.buyers.push_back(b.distribution.atoms()[0].value);
  }
  for (const auto& s : inst.sellers) {
    profile.sellers.push_back(s.distribution.atoms()[0].value);
  }
  std::vector<size_t> digit(total, 0);
  // suffix[p] = product of probabilities of agents p..total-1.
  std::vector<Rational> suffix(total + 1, 1);
  for (size_t p = total; p-- > 0;) {
    suffix[p] = suffix[p + 1] * agents[p]->distribution.atoms()[0].probability;
  }
  auto slot = [&](size_t p) -> Valuation& {
    return p < n ? profile.buyers[p] : profile.sellers[p - n];
  };
  while (true) {
    f(static_cast<const ValuationProfile&>(profile), suffix[0]);
    size_t p = 0;
    while (p < total && ++digit[p] == agents[p]->distribution.size()) {
      digit[p] = 0;
      slot(p) = agents[p]->distribution.atoms()[0].value;
      ++p;
    }
    if (p == total) break;
    slot(p) = agents[p]->distribution.atoms()[digit[p]].value;
    for (size_t q = p + 1; q-- > 0;) {
      suffix[q] =
          suffix[q + 1] * agents[q]->distribution.atoms()[digit[q]].probability;
    }
  }
}

// Exact expectation by enumeration or seeded Monte Carlo over i.i.d. draws.
class ExpectationEngine {
 public:
  ExpectationEngine() = default;
  explicit ExpectationEngine(EngineConfig config) : config_(config) {}

  const EngineConfig& config() const { return config_; }

  static ExpectationEngine exact(std::uint64_t cap = 1'000'000) {
    EngineConfig c;
    c.mode = EngineConfig::Mode::kExact;
    c.exact_cap = cap;
    return ExpectationEngine(c);
  }

  static ExpectationEngine monte_carlo(std::uint64_t samples,
                                       std::uint64_t seed) {
    EngineConfig c;
    c.mode = EngineConfig::Mode::kMonteCarlo;
    c.samples = samples;
    c.seed = seed;
    return ExpectationEngine(c);
  }

  // Whether expectations on this instance are computed exactly.
  bool is_exact(const Instance& inst) const {
    if (config_.mode == EngineConfig::Mode::kMonteCarlo) return false;
    bool fits = profile_space_size(inst, config_.exact_cap) <= config_.exact_cap;
    if (config_.mode == EngineConfig::Mode::kExact && !fits) {
      throw CapExceeded("profile space exceeds exact cap of " +
                        std::to_string(config_.exact_cap));
    }
    return fits;
  }

  // Deterministic sample i of the Monte Carlo stream.
  ValuationProfile sample(const Instance& inst, std::uint64_t i) const {
    std::mt19937_64 rng(splitmix64(config_.seed + i));
    return sample_profile(inst, rng);
  }

  // f(profile, weight) over the enumeration or the sample set; weights sum
  // to one.
  template <typename F>
  void for_each_weighted(const Instance& inst, F&& f) const {
    if (is_exact(inst)) {
      for_each_profile(inst, f);
      return;
    }
    const Rational w(1, config_.samples);
    for (std::uint64_t i = 0; i < config_.samples; ++i) {
      f(static_cast<const ValuationProfile&>(sample(inst, i)), w);
    }
  }

  // E[f(v)] for a rational-valued f.
  template <typename F>
  Estimate expect(const Instance& inst, F&& f) const {
    Estimate e;
    if (is_exact(inst)) {
      for_each_profile(inst, [&](const ValuationProfile& p, const Rational& w) {
        e.mean += w * f(p);
        ++e.samples;
      });
      e.exact = true;
      return e;
    }
    e.exact = false;
    e.samples = config_.samples;
    Rational sum = 0;
    double s1 = 0, s2 = 0;
    for (std::uint64_t i = 0; i < config_.samples; ++i) {
      Rational x = f(static_cast<const ValuationProfile&>(sample(inst, i)));
      sum += x;
      double d = to_double(x);
      s1 += d;
      s2 += d * d;
    }
    const double count = static_cast<double>(config_.samples);
    e.mean = sum / Rational(config_.samples);
    if (config_.samples > 1) {
      double var = (s2 - s1 * s1 / count) / (count - 1);
      e.std_error = std::sqrt(std::max(var, 0.0) / count);
    }
    return e;
  }

 private:
  EngineConfig config_;
};

}  // namespace tsm

#endif  // TSM_ENGINE_HPP_
