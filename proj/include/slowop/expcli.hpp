// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Batch experiment runner behind the `slowop` command-line tool. Grid sweeps
// run on a worker pool and their CSV/JSON outputs are cached by config hash.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slowop/exact_solver.hpp"
#include "slowop/probes.hpp"

namespace slowop::expcli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitNumerical = 3;

enum class Experiment { find, overlap_sweep, scaling_sweep, evolve, otoc, entropy, transition, verify };
enum class Backend { exact, dmrg };

/// CLI verb spelling: find, sweep-overlap, sweep-scaling, evolve, otoc,
/// entropy, transition, verify.
std::string verb_name(Experiment e);
Experiment parse_verb(const std::string& s);
std::string backend_name(Backend b);

const std::string& tool_version();

struct ExperimentConfig {
  Experiment experiment = Experiment::find;
  Definition definition = Definition::local;
  Backend backend = Backend::exact;
  std::vector<double> g{1.05};
  std::vector<double> h{0.1};
  std::vector<int> N{6};
  /// Empty: a per-verb default derived from N.
  std::vector<int> L;

  // Dynamics.
  std::vector<double> t;  // empty: 0:10:0.1
  std::string method = "exact";  // evolve: exact | stochastic
  int K = 50;
  std::uint64_t seed = 12345;
  std::optional<double> e_bar = 1000.0;  // nullopt: auto
  std::vector<char> axes{'x', 'y', 'z'};
  std::vector<int> offsets{0};

  // DMRG schedule.
  int max_D = 256;
  std::optional<double> inner_tol;
  std::optional<double> outer_tol;
  int max_sweeps = 100;

  // Probes and analysis.
  std::vector<ProbeTag> probes{ProbeTag::diffusion_mode, ProbeTag::energy_flux, ProbeTag::magnetization_x,
                               ProbeTag::magnetization_y, ProbeTag::magnetization_z};
  double threshold = 0.05;
  bool diffusion = false;  // scaling sweep: add the optimized diffusion mode

  // Runner (not part of the cache key).
  int workers = 0;  // 0: hardware concurrency
  std::string out = "slowop-out";
  std::string mpo_fixture;

  /// Sets one key from its textual value. Throws UsageError on unknown keys
  /// or malformed values.
  void set(const std::string& key, const std::string& value);
  /// Applies `key=value` lines; blank lines and `#` comments are skipped.
  void merge_text(const std::string& text);
  /// Grid sanity and solver caps. Throws UsageError or CapExceeded.
  void validate() const;
  /// Sorted key=value listing of every result-affecting setting.
  std::string canonical() const;
  /// 16 hex digits of FNV-1a over canonical(), the verb and the tool version.
  std::string hash() const;
};

/// Keys accepted by ExperimentConfig::set, in documentation order.
const std::vector<std::string>& config_keys();

/// `a:b:step` (inclusive), `a,b,c` or a single value.
std::vector<double> parse_real_list(const std::string& s);
std::vector<int> parse_int_list(const std::string& s);

struct RunOptions {
  /// Empty: no caching.
  std::filesystem::path cache_dir;
  std::ostream* log = nullptr;
};

struct RunOutcome {
  int exit_code = kExitOk;
  bool cache_hit = false;
  std::vector<std::filesystem::path> files;  // written under cfg.out
  std::string report;                          // verify report / summary text
};

/// SLOWOP_CACHE_DIR if set, else $XDG_CACHE_HOME/slowop or ~/.cache/slowop.
std::filesystem::path default_cache_dir();

/// Runs the experiment. Invalid configs yield exit 2 without output files;
/// failures at individual grid points are written to errors.csv and yield
/// exit 3 after the remaining points finish.
RunOutcome run(const ExperimentConfig& cfg, const RunOptions& opt = {});

struct VerifyCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

/// The oracle suite behind `verify`. The MPO check reads `mpo_fixture` when
/// set; every check records the tolerance it used.
std::vector<VerifyCheck> verify_checks(const ExperimentConfig& cfg);

}  // namespace slowop::expcli
