// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: `slowop <verb> [--config FILE] [--key value ...]`.
// Precedence is defaults, then the config file, then explicit flags.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "slowop/error.hpp"
#include "slowop/expcli.hpp"

namespace ex = slowop::expcli;

int main(int argc, char** argv) {
  CLI::App app{"Slowest-operator experiments for the mixed-field Ising chain"};
  app.set_version_flag("--version", ex::tool_version());
  app.require_subcommand(1);

  struct Verb {
    CLI::App* cmd = nullptr;
    std::map<std::string, std::string> values;
    std::string config;
    bool no_cache = false;
    bool quiet = false;
  };
  const std::vector<std::string> verbs = {"find", "sweep-overlap", "sweep-scaling", "evolve",
                                          "otoc", "entropy",       "transition",    "verify"};
  std::map<std::string, Verb> parsed;
  for (const std::string& v : verbs) {
    Verb& vb = parsed[v];
    vb.cmd = app.add_subcommand(v, "Run the " + v + " experiment");
    vb.cmd->set_help_flag("--help", "Print this help message and exit");
    vb.cmd->add_option("--config", vb.config, "key=value config file")->check(CLI::ExistingFile);
    vb.cmd->add_flag("--no-cache", vb.no_cache, "Ignore and do not populate the result cache");
    vb.cmd->add_flag("-q,--quiet", vb.quiet, "No per-point progress lines");
    for (const std::string& key : ex::config_keys()) {
      if (key == "experiment") continue;
      vb.cmd->add_option_function<std::string>(
          "--" + key, [&vb, key](const std::string& s) { vb.values[key] = s; }, "config key " + key);
    }
    vb.cmd->add_option_function<std::string>(
        "--mpo-fixture", [&vb](const std::string& s) { vb.values["mpo_fixture"] = s; }, "alias of --mpo_fixture");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ex::kExitInvalidConfig;
  }

  for (const std::string& v : verbs) {
    Verb& vb = parsed[v];
    if (!vb.cmd->parsed()) continue;
    ex::ExperimentConfig cfg;
    try {
      cfg.experiment = ex::parse_verb(v);
      if (!vb.config.empty()) {
        std::ifstream is(vb.config);
        std::stringstream ss;
        ss << is.rdbuf();
        cfg.merge_text(ss.str());
        cfg.experiment = ex::parse_verb(v);
      }
      for (const auto& [k, val] : vb.values) cfg.set(k, val);
    } catch (const std::exception& e) {
      std::cerr << "slowop: invalid config: " << e.what() << "\n";
      return ex::kExitInvalidConfig;
    }
    ex::RunOptions opt;
    if (!vb.no_cache) opt.cache_dir = ex::default_cache_dir();
    if (!vb.quiet) opt.log = &std::cerr;
    try {
      const ex::RunOutcome out = ex::run(cfg, opt);
      (out.exit_code == ex::kExitOk ? std::cout : std::cerr) << out.report << (out.report.ends_with('\n') ? "" : "\n");
      return out.exit_code;
    } catch (const slowop::UsageError& e) {
      std::cerr << "slowop: " << e.what() << "\n";
      return ex::kExitInvalidConfig;
    } catch (const std::exception& e) {
      std::cerr << "slowop: " << e.what() << "\n";
      return ex::kExitNumerical;
    }
  }
  return ex::kExitInvalidConfig;
}
