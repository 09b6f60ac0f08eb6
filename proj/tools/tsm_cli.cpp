// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

// tsm: run, verify and inspect two-sided market mechanisms.
//
// Exit codes: 0 ok, 1 verification failed, 2 bad input, 3 mechanism does not
// fit the market, 4 size cap exceeded.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tsm/harness/verify.hpp"
#include "tsm/io/instance_format.hpp"
#include "tsm/io/report.hpp"
#include "tsm/mechanisms/mechanism.hpp"

namespace {

enum Exit { kOk = 0, kFailed = 1, kBadInput = 2, kIncompatible = 3, kCap = 4 };

struct Common {
  std::string instance;
  std::string mechanism;
  std::string mutant;
  std::string mode = "auto";
  std::optional<std::uint64_t> exact_cap, samples, seed;
};

std::optional<std::uint64_t> env_number(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  try {
    size_t used = 0;
    std::uint64_t x = std::stoull(v, &used);
    if (used == std::string(v).size()) return x;
  } catch (const std::exception&) {
  }
  throw tsm::InputError(std::string("environment variable ") + name +
                        " is not a number");
}

// Flags override TSM_EXACT_CAP, TSM_SAMPLES and TSM_SEED.
tsm::EngineConfig engine_config(const Common& c) {
  tsm::EngineConfig cfg;
  if (auto v = env_number("TSM_EXACT_CAP")) cfg.exact_cap = *v;
  if (auto v = env_number("TSM_SAMPLES")) cfg.samples = *v;
  if (auto v = env_number("TSM_SEED")) cfg.seed = *v;
  if (c.exact_cap) cfg.exact_cap = *c.exact_cap;
  if (c.samples) cfg.samples = *c.samples;
  if (c.seed) cfg.seed = *c.seed;
  if (c.mode == "exact") cfg.mode = tsm::EngineConfig::Mode::kExact;
  if (c.mode == "mc") cfg.mode = tsm::EngineConfig::Mode::kMonteCarlo;
  if (cfg.samples == 0) throw tsm::InputError("sample count must be positive");
  return cfg;
}

tsm::MechanismKind mechanism_kind(const Common& c) {
  if (!c.mutant.empty()) {
    auto k = tsm::parse_mechanism("mutant-" + c.mutant);
    if (!k) throw tsm::InputError("unknown mutant '" + c.mutant + "'");
    return *k;
  }
  auto k = tsm::parse_mechanism(c.mechanism);
  if (!k || tsm::info(*k).mutant) {
    std::string names;
    for (const auto& m : tsm::mechanism_catalog()) {
      if (!m.mutant) names += std::string(names.empty() ? "" : ", ") + std::string(m.name);
    }
    throw tsm::InputError("unknown mechanism '" + c.mechanism +
                          "' (expected one of: " + names + ")");
  }
  return *k;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--instance", c.instance, "Market file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--mechanism", c.mechanism, "Mechanism name")->required();
  cmd->add_option("--mode", c.mode, "Expectation engine mode")
      ->check(CLI::IsMember({"auto", "exact", "mc"}));
  cmd->add_option("--exact-cap", c.exact_cap,
                  "Largest profile space enumerated exactly");
  cmd->add_option("--samples", c.samples, "Monte Carlo sample count");
  cmd->add_option("--seed", c.seed, "Monte Carlo seed");
  cmd->add_option("--mutant", c.mutant)->group("");
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw tsm::InputError("cannot write " + path);
  out << text;
}

int cmd_run(const Common& c, const std::string& order, const std::string& out,
            const std::string& format, size_t max_trials) {
  tsm::Instance inst = tsm::load_instance(c.instance);
  tsm::ExpectationEngine engine(engine_config(c));
  tsm::Mechanism mech(mechanism_kind(c), inst, engine);
  auto policy = tsm::OrderPolicy::parse(order, inst);
  auto rep = tsm::build_run_report(mech, policy, c.instance, max_trials);
  if (format == "csv") {
    write_out(out, tsm::run_report_csv(rep));
  } else {
    write_out(out, tsm::run_report_json(inst, rep).dump(2) + "\n");
  }
  return kOk;
}

int cmd_verify(const Common& c, tsm::VerifySelection sel,
               const std::string& out) {
  tsm::Instance inst = tsm::load_instance(c.instance);
  tsm::ExpectationEngine engine(engine_config(c));
  tsm::Mechanism mech(mechanism_kind(c), inst, engine);
  auto suites = tsm::verify(mech, sel);
  bool pass = true;
  tsm::Json list = tsm::Json::array();
  for (const auto& s : suites) {
    pass = pass && s.pass;
    tsm::Json j{{"suite", s.name},
                {"status", !s.ran ? "skipped" : (s.pass ? "pass" : "fail")},
                {"checks", s.checks},
                {"failures", s.failures}};
    if (!s.note.empty()) j["note"] = s.note;
    list.push_back(j);
  }
  tsm::Json doc{{"schema", tsm::kVerifyReportSchema},
                {"instance", c.instance},
                {"mechanism", std::string(mech.name())},
                {"pass", pass},
                {"suites", list}};
  write_out(out, doc.dump(2) + "\n");
  return pass ? kOk : kFailed;
}

int cmd_prices(const Common& c, const std::string& format) {
  tsm::Instance inst = tsm::load_instance(c.instance);
  tsm::ExpectationEngine engine(engine_config(c));
  tsm::Mechanism mech(mechanism_kind(c), inst, engine);
  auto rows = mech.prices();
  if (format == "json") {
    tsm::Json list = tsm::Json::array();
    for (const auto& r : rows) {
      tsm::Json j{{"agent", r.agent}, {"state", r.state}};
      if (r.price.is_blocked()) {
        j["price"] = "blocked";
      } else {
        j["price"] = tsm::rational_json(r.price.value());
      }
      list.push_back(j);
    }
    std::cout << tsm::Json{{"mechanism", std::string(mech.name())},
                           {"prices", list}}
                     .dump(2)
              << "\n";
    return kOk;
  }
  size_t wa = 5, ws = 5;
  for (const auto& r : rows) {
    wa = std::max(wa, r.agent.size());
    ws = std::max(ws, r.state.size());
  }
  auto pad = [](const std::string& s, size_t w) {
    return s + std::string(w - s.size() + 2, ' ');
  };
  std::cout << pad("agent", wa) << pad("state", ws) << "price\n";
  for (const auto& r : rows) {
    std::string p = r.price.str();
    if (!r.price.is_blocked() && denominator(r.price.value()) != 1) {
      p += " (" + tsm::to_decimal(r.price.value()) + ")";
    }
    std::cout << pad(r.agent, wa) << pad(r.state, ws) << p << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-sided market mechanisms: run, verify, prices"};
  app.require_subcommand(1);

  Common run_c, verify_c, prices_c;
  std::string order = "adversarial", out, format = "json";
  size_t max_trials = 64;
  auto* run = app.add_subcommand("run", "Run a mechanism and report welfare");
  add_common(run, run_c);
  run->add_option("--order", order,
                  "index, index-highest, reverse, random[:SEED], exhaustive, "
                  "greedy, adversarial, sequence:A,B,..");
  run->add_option("--out", out, "Report path (default stdout)");
  run->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
  run->add_option("--max-trials", max_trials, "Trials listed in the report");

  tsm::VerifySelection sel;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "Check budget, DSIC, IR, lemmas");
  add_common(verify, verify_c);
  verify->add_flag("--budget", sel.budget, "Budget-balance audits");
  verify->add_flag("--dsic", sel.dsic, "Deviation probes");
  verify->add_flag("--ir", sel.ir, "Individual rationality");
  verify->add_flag("--lemmas", sel.lemmas, "Pricing lemma checks");
  verify->add_option("--out", verify_out, "Report path (default stdout)");

  std::string prices_format = "text";
  auto* prices = app.add_subcommand("prices", "Print posted prices");
  add_common(prices, prices_c);
  prices->add_option("--format", prices_format)
      ->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) return cmd_run(run_c, order, out, format, max_trials);
    if (*verify) return cmd_verify(verify_c, sel, verify_out);
    return cmd_prices(prices_c, prices_format);
  } catch (const tsm::IncompatibleMechanism& e) {
    std::cerr << "tsm: " << e.what() << "\n";
    return kIncompatible;
  } catch (const tsm::CapExceeded& e) {
    std::cerr << "tsm: " << e.what() << "\n";
    return kCap;
  } catch (const tsm::InputError& e) {
    std::cerr << "tsm: " << e.what() << "\n";
    return kBadInput;
  } catch (const tsm::ContractViolation& e) {
    std::cerr << "tsm: " << e.what() << "\n";
    return kIncompatible;
  }
}
