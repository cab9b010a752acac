// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#include "slowop/expcli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "slowop/dmrg.hpp"
#include "slowop/dynamics.hpp"
#include "slowop/error.hpp"
#include "slowop/op_mps.hpp"
#include "slowop/superop.hpp"

#ifndef SLOWOP_VERSION
#define SLOWOP_VERSION "0.0.0"
#endif

namespace slowop::expcli {

namespace fs = std::filesystem;

namespace {

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

std::string exact_num(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

double to_real(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + s + "'");
  }
  if (pos != s.size() || !std::isfinite(v)) throw UsageError("not a number: '" + s + "'");
  return v;
}

long long to_int(const std::string& s) {
  const double v = to_real(s);
  if (v != std::floor(v) || std::abs(v) > 9e15) throw UsageError("not an integer: '" + s + "'");
  return static_cast<long long>(v);
}

bool to_bool(const std::string& s) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw UsageError("not a boolean: '" + s + "'");
}

// Grid values are rounded to 12 decimals so 0.1-steps print cleanly.
double tidy(double x) { return std::round(x * 1e12) / 1e12; }

template <typename T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + f(v[i]);
  return s;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

// ---------------------------------------------------------------- names

std::string verb_name(Experiment e) {
  switch (e) {
    case Experiment::find: return "find";
    case Experiment::overlap_sweep: return "sweep-overlap";
    case Experiment::scaling_sweep: return "sweep-scaling";
    case Experiment::evolve: return "evolve";
    case Experiment::otoc: return "otoc";
    case Experiment::entropy: return "entropy";
    case Experiment::transition: return "transition";
    case Experiment::verify: return "verify";
  }
  return "";
}

Experiment parse_verb(const std::string& s) {
  for (Experiment e : {Experiment::find, Experiment::overlap_sweep, Experiment::scaling_sweep, Experiment::evolve,
                       Experiment::otoc, Experiment::entropy, Experiment::transition, Experiment::verify}) {
    if (verb_name(e) == s) return e;
  }
  if (s == "overlap_sweep") return Experiment::overlap_sweep;
  if (s == "scaling_sweep") return Experiment::scaling_sweep;
  throw UsageError("unknown experiment: " + s);
}

std::string backend_name(Backend b) { return b == Backend::exact ? "exact" : "dmrg"; }

const std::string& tool_version() {
  static const std::string v = SLOWOP_VERSION;
  return v;
}

// ---------------------------------------------------------------- lists

std::vector<double> parse_real_list(const std::string& s) {
  std::vector<double> out;
  for (const std::string& item : split(s, ',')) {
    if (item.empty()) throw UsageError("empty list entry in '" + s + "'");
    if (item.find(':') == std::string::npos) {
      out.push_back(to_real(item));
      continue;
    }
    const auto parts = split(item, ':');
    if (parts.size() != 3) throw UsageError("range must be start:stop:step, got '" + item + "'");
    const double a = to_real(parts[0]), b = to_real(parts[1]), step = to_real(parts[2]);
    if (!(step > 0) || b < a) throw UsageError("range needs step > 0 and stop >= start: '" + item + "'");
    const auto n = static_cast<long long>(std::floor((b - a) / step + 1e-9));
    if (n > 1000000) throw UsageError("range too long: '" + item + "'");
    for (long long i = 0; i <= n; ++i) out.push_back(tidy(a + static_cast<double>(i) * step));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_real_list(s)) {
    if (v != std::floor(v) || std::abs(v) > 1e9) throw UsageError("not an integer list: '" + s + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

// ---------------------------------------------------------------- config

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "experiment", "definition", "backend", "g",         "h",         "N",          "L",
      "t",          "method",     "K",       "seed",      "e_bar",     "axes",       "offsets",
      "max_D",      "inner_tol",  "outer_tol", "max_sweeps", "probes",  "threshold",  "diffusion",
      "workers",    "out",        "mpo_fixture"};
  return keys;
}

void ExperimentConfig::set(const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in), value = trim(value_in);
  if (key == "experiment") {
    experiment = parse_verb(value);
  } else if (key == "definition") {
    definition = parse_definition(value);
  } else if (key == "backend") {
    if (value == "exact") backend = Backend::exact;
    else if (value == "dmrg") backend = Backend::dmrg;
    else throw UsageError("backend must be exact or dmrg");
  } else if (key == "g") {
    g = parse_real_list(value);
  } else if (key == "h") {
    h = parse_real_list(value);
  } else if (key == "N") {
    N = parse_int_list(value);
  } else if (key == "L") {
    L = value.empty() ? std::vector<int>{} : parse_int_list(value);
  } else if (key == "t") {
    t = parse_real_list(value);
  } else if (key == "method") {
    if (value != "exact" && value != "stochastic") throw UsageError("method must be exact or stochastic");
    method = value;
  } else if (key == "K") {
    K = static_cast<int>(to_int(value));
  } else if (key == "seed") {
    const long long s = to_int(value);
    if (s < 0) throw UsageError("seed must be non-negative");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "e_bar") {
    if (value == "auto") e_bar.reset();
    else e_bar = to_real(value);
  } else if (key == "axes") {
    axes.clear();
    for (const std::string& a : split(value, ',')) {
      if (a.size() != 1 || std::string("xyzXYZ").find(a[0]) == std::string::npos) {
        throw UsageError("axes must be a list of x, y, z");
      }
      axes.push_back(static_cast<char>(std::tolower(a[0])));
    }
  } else if (key == "offsets") {
    offsets = parse_int_list(value);
  } else if (key == "max_D") {
    max_D = static_cast<int>(to_int(value));
  } else if (key == "inner_tol") {
    inner_tol = to_real(value);
  } else if (key == "outer_tol") {
    outer_tol = to_real(value);
  } else if (key == "max_sweeps") {
    max_sweeps = static_cast<int>(to_int(value));
  } else if (key == "probes") {
    probes.clear();
    for (const std::string& p : split(value, ',')) probes.push_back(parse_probe(p));
  } else if (key == "threshold") {
    threshold = to_real(value);
  } else if (key == "diffusion") {
    diffusion = to_bool(value);
  } else if (key == "workers") {
    workers = static_cast<int>(to_int(value));
  } else if (key == "out") {
    out = value;
  } else if (key == "mpo_fixture") {
    mpo_fixture = value;
  } else {
    throw UsageError("unknown config key: " + key);
  }
}

void ExperimentConfig::merge_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
    try {
      set(s.substr(0, eq), s.substr(eq + 1));
    } catch (const UsageError& e) {
      throw UsageError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

namespace {

bool is_dynamics(Experiment e) { return e == Experiment::evolve || e == Experiment::otoc; }

int default_L(const ExperimentConfig& c, int N) {
  switch (c.experiment) {
    case Experiment::evolve: return c.definition == Definition::local ? std::max(N + 2, 2 * N) : 2 * N + 1;
    case Experiment::otoc: return 2 * N - 1 > N ? 2 * N - 1 : N + 1;
    default: return 2 * N + 3;
  }
}

std::vector<int> L_values(const ExperimentConfig& c, int N) {
  return c.L.empty() ? std::vector<int>{default_L(c, N)} : c.L;
}

std::vector<double> time_values(const ExperimentConfig& c) {
  return c.t.empty() ? parse_real_list("0:10:0.1") : c.t;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (experiment == Experiment::verify) {
    if (g.empty() || h.empty()) throw UsageError("verify needs g and h");
    return;
  }
  if (g.empty() || h.empty() || N.empty()) throw UsageError("parameter grids must be non-empty");
  const ExactCaps caps;
  const DynamicsCaps dcaps;
  for (int n : N) {
    if (n < 1) throw UsageError("N must be >= 1");
    if (backend == Backend::dmrg && n < 2) throw UsageError("the dmrg backend needs N >= 2");
    if (backend == Backend::exact) {
      const int cap = definition == Definition::local ? caps.local_max_n : caps.ti_max_n;
      if (n > cap) {
        throw CapExceeded("exact backend supports N <= " + std::to_string(cap) + " for this definition");
      }
    }
    if (is_dynamics(experiment)) {
      if (backend == Backend::dmrg && n > 10) throw CapExceeded("dynamics from dmrg results needs N <= 10");
      const int cap = experiment == Experiment::evolve && method == "stochastic" ? dcaps.stochastic_max_L
                                                                                : dcaps.exact_max_L;
      for (int l : L_values(*this, n)) {
        if (l > cap) throw CapExceeded("L=" + std::to_string(l) + " exceeds the dynamics cap " + std::to_string(cap));
        const int min_l = definition == Definition::local ? n : 2 * n - 1;
        if (l < min_l) throw UsageError("L=" + std::to_string(l) + " is too short for N=" + std::to_string(n));
      }
    }
  }
  for (int l : L) {
    if (l < 1) throw UsageError("L must be >= 1");
  }
  const auto ts = time_values(*this);
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (ts[i] < ts[i - 1]) throw UsageError("times must be non-decreasing");
  }
  if (K < 1) throw UsageError("K must be >= 1");
  if (e_bar && !(*e_bar > 0)) throw UsageError("e_bar must be positive or auto");
  if (axes.empty()) throw UsageError("axes must be non-empty");
  if (offsets.empty()) throw UsageError("offsets must be non-empty");
  if (max_D < 1) throw UsageError("max_D must be positive");
  if (max_sweeps < 1) throw UsageError("max_sweeps must be positive");
  if ((inner_tol && !(*inner_tol > 0)) || (outer_tol && !(*outer_tol > 0))) {
    throw UsageError("tolerances must be positive");
  }
  if (probes.empty()) throw UsageError("probes must be non-empty");
  if (!(threshold > 0)) throw UsageError("threshold must be positive");
  if (workers < 0) throw UsageError("workers must be >= 0");
}

std::string ExperimentConfig::canonical() const {
  std::map<std::string, std::string> kv;
  kv["experiment"] = verb_name(experiment);
  kv["definition"] = definition_name(definition);
  kv["backend"] = backend_name(backend);
  kv["g"] = join<double>(g, exact_num);
  kv["h"] = join<double>(h, exact_num);
  kv["N"] = join<int>(N, [](const int& n) { return std::to_string(n); });
  kv["L"] = join<int>(L, [](const int& n) { return std::to_string(n); });
  kv["t"] = join<double>(time_values(*this), exact_num);
  kv["method"] = method;
  kv["K"] = std::to_string(K);
  kv["seed"] = std::to_string(seed);
  kv["e_bar"] = e_bar ? exact_num(*e_bar) : "auto";
  kv["axes"] = join<char>(axes, [](const char& c) { return std::string(1, c); });
  kv["offsets"] = join<int>(offsets, [](const int& n) { return std::to_string(n); });
  kv["max_D"] = std::to_string(max_D);
  kv["inner_tol"] = inner_tol ? exact_num(*inner_tol) : "default";
  kv["outer_tol"] = outer_tol ? exact_num(*outer_tol) : "default";
  kv["max_sweeps"] = std::to_string(max_sweeps);
  kv["probes"] = join<ProbeTag>(probes, probe_name);
  kv["threshold"] = exact_num(threshold);
  kv["diffusion"] = diffusion ? "1" : "0";
  std::string s;
  for (const auto& [k, v] : kv) s += k + "=" + v + "\n";
  return s;
}

std::string ExperimentConfig::hash() const {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0')
     << fnv1a(canonical() + "verb=" + verb_name(experiment) + "\nversion=" + tool_version() + "\n");
  return os.str();
}

fs::path default_cache_dir() {
  if (const char* d = std::getenv("SLOWOP_CACHE_DIR"); d && *d) return d;
  if (const char* x = std::getenv("XDG_CACHE_HOME"); x && *x) return fs::path(x) / "slowop";
  if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "slowop";
  return fs::temp_directory_path() / "slowop-cache";
}

// ---------------------------------------------------------------- solving

namespace {

struct Solved {
  SlowestResult result;
  std::optional<OperatorMPS> mps;
  std::string dmrg_log;
};

// Moves the trailing wall-clock column of a sweep log into comment lines.
std::string deterministic_log(const std::string& csv) {
  std::istringstream is(csv);
  std::string line, body, comments;
  int row = 0;
  while (std::getline(is, line)) {
    const auto cut = line.rfind(',');
    if (line.empty() || line[0] == '#' || cut == std::string::npos) {
      body += line + "\n";
      continue;
    }
    if (row > 0) comments += "# wall_seconds[" + std::to_string(row - 1) + "]=" + line.substr(cut + 1) + "\n";
    body += line.substr(0, cut) + "\n";
    ++row;
  }
  return comments + body;
}

SweepSchedule schedule_for(const ExperimentConfig& c) {
  SweepSchedule s = c.definition == Definition::local ? SweepSchedule::local_default(c.max_D)
                                                      : SweepSchedule::ti_default(c.max_D);
  if (s.bond_dims.empty()) s.bond_dims = {c.max_D};
  if (c.inner_tol) s.inner_tol = *c.inner_tol;
  if (c.outer_tol) s.outer_tol = *c.outer_tol;
  s.max_sweeps = c.max_sweeps;
  s.validate();
  return s;
}

Solved solve_point(const ExperimentConfig& c, const IsingParams& p, int N) {
  Solved s;
  if (c.backend == Backend::exact) {
    s.result = solve(c.definition == Definition::local ? local_form(p, N) : ti_form(p, N), c.seed);
    return s;
  }
  const EffectiveForm form =
      c.definition == Definition::local ? build_local_effective(p, N) : build_ti_effective(p, N);
  DmrgResult d = minimize(form, schedule_for(c), c.seed);
  s.result = std::move(d.result);
  s.dmrg_log = deterministic_log(d.log_csv());
  s.mps = std::move(d.mps);
  return s;
}

// The slowest operator on an L-site ring with unit ntr-norm.
PauliSum ring_operator(const SlowestResult& r, int L) {
  if (r.vector.size() == 0) throw UsageError("result has no explicit operator vector");
  PauliSum O = materialize(r, L);
  O *= cplx(1.0 / O.norm());
  return O;
}

struct Point {
  double g = 0.0, h = 0.0;
  int N = 0, L = 0;
  std::string describe() const {
    std::string s = "g=" + num(g) + " h=" + num(h) + " N=" + std::to_string(N);
    if (L) s += " L=" + std::to_string(L);
    return s;
  }
};

struct PointOutput {
  std::vector<std::string> rows;                 // main-table rows
  std::vector<std::string> rows2;                // secondary table rows
  std::map<std::string, std::string> files;     // extra files
  std::optional<double> lambda;
  std::optional<OverlapPoint> mag;
  bool degenerate = false;
  std::string error;
  double seconds = 0.0;
};

std::vector<Point> ghN_points(const ExperimentConfig& c) {
  std::vector<Point> pts;
  for (double g : c.g)
    for (double h : c.h)
      for (int N : c.N) pts.push_back({g, h, N, 0});
  return pts;
}

std::vector<Point> ghNL_points(const ExperimentConfig& c) {
  std::vector<Point> pts;
  for (double g : c.g)
    for (double h : c.h)
      for (int N : c.N)
        for (int L : L_values(c, N)) pts.push_back({g, h, N, L});
  return pts;
}

std::vector<PointOutput> run_points(const ExperimentConfig& c, const std::vector<Point>& pts,
                                    const std::function<void(const Point&, std::size_t, PointOutput&)>& fn,
                                    std::ostream* log) {
  std::vector<PointOutput> out(pts.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < pts.size(); i = next++) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        fn(pts[i], i, out[i]);
      } catch (const std::exception& e) {
        out[i] = PointOutput{};
        out[i].error = e.what();
      }
      out[i].seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (log) {
        std::lock_guard<std::mutex> lk(log_mu);
        *log << "[" << (i + 1) << "/" << pts.size() << "] " << pts[i].describe()
             << (out[i].error.empty() ? " ok" : " FAILED: " + out[i].error) << " (" << std::fixed
             << std::setprecision(2) << out[i].seconds << " s)" << std::defaultfloat << "\n";
      }
    }
  };
  int n = c.workers > 0 ? c.workers : static_cast<int>(std::thread::hardware_concurrency());
  n = std::max(1, std::min<int>(n, static_cast<int>(pts.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

// Table with provenance columns and per-point timing comments.
std::string table(const ExperimentConfig& c, const std::string& header, const std::vector<PointOutput>& pts,
                  bool secondary) {
  std::ostringstream os;
  os << "# tool_version=" << tool_version() << "\n# config_hash=" << c.hash() << "\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    os << "# wall_seconds[" << i << "]=" << std::fixed << std::setprecision(3) << pts[i].seconds
       << std::defaultfloat << "\n";
  }
  os << header << ",config_hash,tool_version\n";
  for (const auto& p : pts) {
    for (const auto& r : secondary ? p.rows2 : p.rows) os << r << ',' << c.hash() << ',' << tool_version() << '\n';
  }
  return os.str();
}

std::string errors_table(const std::vector<Point>& pts, const std::vector<PointOutput>& outs) {
  std::ostringstream os;
  os << "index,point,error\n";
  for (std::size_t i = 0; i < outs.size(); ++i) {
    if (outs[i].error.empty()) continue;
    std::string msg = outs[i].error;
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::replace(msg.begin(), msg.end(), '"', '\'');
    os << i << ",\"" << pts[i].describe() << "\",\"" << msg << "\"\n";
  }
  return os.str();
}

ChebyshevConfig cheb_config(const ExperimentConfig& c) {
  ChebyshevConfig cc;
  if (c.e_bar) cc.e_bar = *c.e_bar;
  else cc.auto_e_bar = true;
  return cc;
}

using Files = std::map<std::string, std::string>;

// ---------------------------------------------------------------- verbs

Files run_find(const ExperimentConfig& c, std::ostream* log, bool& failed) {
  const auto pts = ghN_points(c);
  const auto outs = run_points(c, pts, [&](const Point& p, std::size_t i, PointOutput& o) {
    const Solved s = solve_point(c, {p.g, p.h}, p.N);
    const auto& r = s.result;
    o.rows.push_back(definition_name(c.definition) + "," + backend_name(c.backend) + "," + num(p.g) + "," +
                     num(p.h) + "," + std::to_string(p.N) + "," + exact_num(r.lambda) + "," +
                     (r.gap ? exact_num(*r.gap) : std::string("")) + "," + (r.degenerate ? "1" : "0"));
    o.files["result_" + std::to_string(i) + ".json"] = r.to_json() + "\n";
    if (s.mps) {
      o.files["mps_" + std::to_string(i) + ".json"] = s.mps->to_json() + "\n";
      o.files["dmrg_log_" + std::to_string(i) + ".csv"] = s.dmrg_log;
    }
  }, log);
  Files f;
  f["find.csv"] = table(c, "definition,backend,g,h,N,lambda,gap,degenerate", outs, false);
  for (const auto& o : outs) f.insert(o.files.begin(), o.files.end());
  failed = std::any_of(outs.begin(), outs.end(), [](const PointOutput& o) { return !o.error.empty(); });
  if (failed) f["errors.csv"] = errors_table(pts, outs);
  return f;
}

// Overlaps of the slowest operator at one point with the given probes.
std::vector<std::pair<ProbeTag, double>> probe_overlaps(const ExperimentConfig& c, const SlowestResult& r,
                                                        const std::vector<ProbeTag>& probes) {
  std::vector<std::pair<ProbeTag, double>> out;
  const IsingParams& p = r.params;
  if (c.definition == Definition::local) {
    const PauliSum O = r.vector.to_sum();
    for (ProbeTag t : probes) out.push_back({t, overlap(O, window_probe(t, p, r.N))});
  } else {
    const int L = 2 * r.N + 3;
    const PauliSum O = ring_operator(r, L);
    for (ProbeTag t : probes) out.push_back({t, overlap(O, ti_probe(t, p, r.N, L))});
  }
  return out;
}

std::string variant_of(const ExperimentConfig& c) {
  return variant_name(c.definition == Definition::local ? ProbeVariant::local_window
                                                        : ProbeVariant::translation_invariant);
}

Files run_overlap(const ExperimentConfig& c, std::ostream* log, bool& failed) {
  const auto pts = ghN_points(c);
  const auto outs = run_points(c, pts, [&](const Point& p, std::size_t, PointOutput& o) {
    const Solved s = solve_point(c, {p.g, p.h}, p.N);
    for (const auto& [tag, v] : probe_overlaps(c, s.result, c.probes)) {
      o.rows.push_back(num(p.g) + "," + num(p.h) + "," + std::to_string(p.N) + "," + probe_name(tag) + "," +
                       variant_of(c) + "," + exact_num(v));
    }
  }, log);
  Files f;
  f["overlaps.csv"] = table(c, "g,h,N,probe,variant,value", outs, false);
  failed = std::any_of(outs.begin(), outs.end(), [](const PointOutput& o) { return !o.error.empty(); });
  if (failed) f["errors.csv"] = errors_table(pts, outs);
  return f;
}

Files run_scaling(const ExperimentConfig& c, std::ostream* log, bool& failed) {
  const auto pts = ghN_points(c);
  std::vector<double> diff_lambda(pts.size(), 0.0);
  const auto outs = run_points(c, pts, [&](const Point& p, std::size_t i, PointOutput& o) {
    const Solved s = solve_point(c, {p.g, p.h}, p.N);
    o.lambda = s.result.lambda;
    o.rows.push_back(definition_name(c.definition) + "," + backend_name(c.backend) + "," + num(p.g) + "," +
                     num(p.h) + "," + std::to_string(p.N) + "," + exact_num(s.result.lambda));
    if (c.diffusion && p.N >= 2) {
      diff_lambda[i] = optimized_diffusion_mode({p.g, p.h}, p.N).lambda;
      o.rows.push_back("optimized_diffusion,generalized_eig," + num(p.g) + "," + num(p.h) + "," +
                       std::to_string(p.N) + "," + exact_num(diff_lambda[i]));
    }
  }, log);
  // Slopes per (g, h) over the N grid.
  std::ostringstream sl;
  sl << "# tool_version=" << tool_version() << "\n# config_hash=" << c.hash() << "\n";
  sl << "definition,g,h,N_low,N_high,slope,config_hash,tool_version\n";
  auto emit = [&](const std::string& def, double g, double h, const std::map<int, double>& lam) {
    std::map<int, double> pos;
    for (const auto& [n, l] : lam) {
      if (l > 0) pos[n] = l;
      else sl << "# skipped " << def << " g=" << num(g) << " h=" << num(h) << " N=" << n << ": lambda <= 0\n";
    }
    for (const auto& r : instant_slopes(pos)) {
      sl << def << ',' << num(g) << ',' << num(h) << ',' << r.N_low << ',' << r.N_high << ',' << exact_num(r.slope)
         << ',' << c.hash() << ',' << tool_version() << '\n';
    }
  };
  for (double g : c.g) {
    for (double h : c.h) {
      std::map<int, double> lam, dl;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].g != g || pts[i].h != h || !outs[i].lambda) continue;
        lam[pts[i].N] = *outs[i].lambda;
        if (c.diffusion && pts[i].N >= 2) dl[pts[i].N] = diff_lambda[i];
      }
      emit(definition_name(c.definition), g, h, lam);
      if (c.diffusion) emit("optimized_diffusion", g, h, dl);
    }
  }
  Files f;
  f["lambdas.csv"] = table(c, "definition,backend,g,h,N,lambda", outs, false);
  f["slopes.csv"] = sl.str();
  failed = std::any_of(outs.begin(), outs.end(), [](const PointOutput& o) { return !o.error.empty(); });
  if (failed) f["errors.csv"] = errors_table(pts, outs);
  return f;
}

Files run_evolve(const ExperimentConfig& c, std::ostream* log, bool& failed) {
  const auto pts = ghNL_points(c);
  const auto times = time_values(c);
  const auto outs = run_points(c, pts, [&](const Point& p, std::size_t i, PointOutput& o) {
    const IsingParams ip{p.g, p.h};
    const Solved s = solve_point(c, ip, p.N);
    const PauliSum O = ring_operator(s.result, p.L);
    const double lam = evaluate_lambda(O, ip, p.L);
    TimeSeries ts = c.method == "exact" ? exact_correlator(O, ip, times)
                                        : two_point_correlator(O, ip, times, c.K, c.seed, cheb_config(c));
    ts.meta["N"] = std::to_string(p.N);
    ts.meta["definition"] = definition_name(c.definition);
    ts.meta["method"] = c.method;
    const std::string name = "evolve_" + std::to_string(i) + ".csv";
    const std::string env = "envelope_" + std::to_string(i) + ".csv";
    o.files[name] = ts.to_csv();
    o.files[env] = gaussian_envelope(lam, times).to_csv();
    o.rows.push_back(std::to_string(i) + "," + num(p.g) + "," + num(p.h) + "," + std::to_string(p.N) + "," +
                     std::to_string(p.L) + "," + exact_num(lam) + "," + c.method + "," + name + "," + env);
  }, log);
  Files f;
  f["evolve.csv"] = table(c, "index,g,h,N,L,lambda,method,file,envelope_file", outs, false);
  for (const auto& o : outs) f.insert(o.files.begin(), o.files.end());
  failed = std::any_of(outs.begin(), outs.end(), [](const PointOutput& o) { return !o.error.empty(); });
  if (failed) f["errors.csv"] = errors_table(pts, outs);
  return f;
}

Files run_otoc(const ExperimentConfig& c, std::ostream* log, bool& failed) {
  const auto pts = ghNL_points(c);
  const auto times = time_values(c);
  const auto outs = run_points(c, pts, [&](const Point& p, std::size_t i, PointOutput& o) {
    const IsingParams ip{p.g, p.h};
    const Solved s = solve_point(c, ip, p.N);
    const PauliSum O = ring_operator(s.result, p.L);
    const EigenSystem es = eigensystem(ip, p.L);
    const std::vector<int> offs = c.definition == Definition::local ? c.offsets : std::vector<int>{0};
    for (char axis : c.axes) {
      for (int off : offs) {
        const std::vector<int> sites =
            c.definition == Definition::local ? otoc_center_sites(p.N, p.L, off) : std::vector<int>{0};
        TimeSeries ts = otoc(O, axis, sites, es, times);
        ts.meta["g"] = num(p.g);
        ts.meta["h"] = num(p.h);
        ts.meta["N"] = std::to_string(p.N);
        ts.meta["offset"] = std::to_string(off);
        const std::string name =
            "otoc_" + std::to_string(i) + "_" + std::string(1, axis) + "_" + std::to_string(off) + ".csv";
        o.files[name] = ts.to_csv();
        o.rows.push_back(std::to_string(i) + "," + num(p.g) + "," + num(p.h) + "," + std::to_string(p.N) + "," +
                         std::to_string(p.L) + "," + std::string(1, axis) + "," + std::to_string(off) + "," +
                         ts.meta["sites"] + "," + name);
      }
    }
  }, log);
  Files f;
  f["otoc.csv"] = table(c, "index,g,h,N,L,axis,offset,sites,file", outs, false);
  for (const auto& o : outs) f.insert(o.files.begin(), o.files.end());
  failed = std::any_of(outs.begin(), outs.end(), [](const PointOutput& o) { return !o.error.empty(); });
  if (failed) f["errors.csv"] = errors_table(pts, outs);
  return f;
}

Files run_entropy(const ExperimentConfig& c, std::ostream* log, bool& failed) {
  const auto pts = ghN_points(c);
  const auto outs = run_points(c, pts, [&](const Point& p, std::size_t, PointOutput& o) {
    const Solved s = solve_point(c, {p.g, p.h}, p.N);
    const Gauge gauge = c.definition == Definition::local ? Gauge::local : Gauge::ti_first_site;
    const OperatorMPS m = s.mps ? *s.mps : OperatorMPS::from_vector(s.result.vector, c.max_D, gauge);
    const EntropyProfile e = entropy_profile(m);
    for (std::size_t k = 0; k < e.cuts.size(); ++k) {
      o.rows.push_back(num(p.g) + "," + num(p.h) + "," + std::to_string(p.N) + "," + std::to_string(e.cuts[k]) +
                       "," + exact_num(e.entropy[k]) + "," + exact_num(e.max_bound[k]) + "," +
                       exact_num(e.log_d));
    }
  }, log);
  Files f;
  f["entropy.csv"] = table(c, "g,h,N,cut,entropy,max_bound,log_D", outs, false);
  failed = std::any_of(outs.begin(), outs.end(), [](const PointOutput& o) { return !o.error.empty(); });
  if (failed) f["errors.csv"] = errors_table(pts, outs);
  return f;
}

Files run_transition(const ExperimentConfig& c, std::ostream* log, bool& failed) {
  const auto pts = ghN_points(c);
  const auto outs = run_points(c, pts, [&](const Point& p, std::size_t, PointOutput& o) {
    const Solved s = solve_point(c, {p.g, p.h}, p.N);
    const auto ov = probe_overlaps(c, s.result, {ProbeTag::magnetization_x, ProbeTag::magnetization_z});
    o.mag = OverlapPoint{ov[0].second, ov[1].second};
    o.degenerate = s.result.degenerate;
    for (const auto& [tag, v] : ov) {
      o.rows.push_back(num(p.g) + "," + num(p.h) + "," + std::to_string(p.N) + "," + probe_name(tag) + "," +
                       variant_of(c) + "," + exact_num(v));
    }
  }, log);
  std::ostringstream tr;
  tr << "# tool_version=" << tool_version() << "\n# config_hash=" << c.hash() << "\n";
  tr << "N,g,threshold,h_star,h_grid,config_hash,tool_version\n";
  for (double g : c.g) {
    for (int N : c.N) {
      std::map<double, OverlapPoint> m;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].g != g || pts[i].N != N || !outs[i].mag) continue;
        m[pts[i].h] = *outs[i].mag;
        if (outs[i].degenerate) {
          tr << "# degenerate minimum at h=" << num(pts[i].h) << "; overlaps there depend on the solver\n";
        }
      }
      const auto t = detect_transition(m, c.threshold);
      tr << N << ',' << num(g) << ',' << num(c.threshold) << ',' << (t ? exact_num(t->h_star) : "none") << ','
         << (t ? num(t->h_grid) : "none") << ',' << c.hash() << ',' << tool_version() << '\n';
    }
  }
  Files f;
  f["overlaps.csv"] = table(c, "g,h,N,probe,variant,value", outs, false);
  f["transition.csv"] = tr.str();
  failed = std::any_of(outs.begin(), outs.end(), [](const PointOutput& o) { return !o.error.empty(); });
  if (failed) f["errors.csv"] = errors_table(pts, outs);
  return f;
}

void write_files(const fs::path& dir, const Files& files) {
  fs::create_directories(dir);
  for (const auto& [name, content] : files) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw UsageError("cannot write " + (dir / name).string());
    os << content;
  }
}

std::string manifest(const ExperimentConfig& c, const Files& files, int exit_code) {
  nlohmann::json j;
  j["tool_version"] = tool_version();
  j["config_hash"] = c.hash();
  j["verb"] = verb_name(c.experiment);
  j["config"] = c.canonical();
  j["exit_code"] = exit_code;
  j["files"] = nlohmann::json::array();
  for (const auto& [name, _] : files) j["files"].push_back(name);
  return j.dump(1) + "\n";
}

}  // namespace

// ---------------------------------------------------------------- verify

std::vector<VerifyCheck> verify_checks(const ExperimentConfig& c) {
  const IsingParams p{c.g.front(), c.h.front()};
  std::vector<VerifyCheck> out;
  auto add = [&](std::string name, double value, double tol, std::string detail) {
    out.push_back({std::move(name), value, tol, std::isfinite(value) && value <= tol, std::move(detail)});
  };

  {
    HamiltonianMPO mpo;
    std::string src = "built-in";
    if (!c.mpo_fixture.empty()) {
      std::ifstream is(c.mpo_fixture);
      if (!is) throw UsageError("cannot read MPO fixture " + c.mpo_fixture);
      std::stringstream ss;
      ss << is.rdbuf();
      mpo = HamiltonianMPO::from_json(ss.str());
      src = c.mpo_fixture;
    } else {
      mpo = hamiltonian_mpo(p, 6);
    }
    const int n = mpo.size();
    if (n > 10) throw UsageError("MPO fixture too long for the dense check");
    const Eigen::MatrixXcd a = to_dense(mpo.contract());
    const Eigen::MatrixXcd b = to_dense(build_h_loc(p, n));
    add("mpo_vs_dense", (a - b).norm() / std::sqrt(double(a.rows())), 1e-12,
        "source=" + src + " N=" + std::to_string(n));
  }
  {
    const int W = 3;
    const SuperMPO a = superop::commutator(p, W);
    const PauliSum H = build_h_loc(p, W);
    const int dim = 1 << (2 * W);
    Eigen::MatrixXd ref(dim, dim);
    for (int b = 0; b < dim; ++b) {
      PauliSum pb(W);
      pb.add(PauliString(W, static_cast<std::uint64_t>(b)), 1.0);
      const PauliSum cmt = cplx(0, -1) * commutator(H, pb);
      for (int r = 0; r < dim; ++r) ref(r, b) = cmt.coeff(PauliString(W, static_cast<std::uint64_t>(r))).real();
    }
    add("superop_vs_dense", (a.to_dense() - ref).norm(), 1e-12, "W=3");
  }
  {
    const int N = 5;
    const double ex = solve(local_form(p, N)).lambda;
    const double dm = minimize(build_local_effective(p, N), SweepSchedule::local_default(256), c.seed).result.lambda;
    add("dmrg_vs_exact_local", std::abs(dm - ex) / std::max(ex, 1e-300), 1e-4,
        "N=5 exact=" + exact_num(ex) + " dmrg=" + exact_num(dm));
  }
  {
    const int N = 4;
    const double ex = solve(ti_form(p, N)).lambda;
    SweepSchedule s = SweepSchedule::ti_default(256);
    s.inner_tol = 1e-6;
    const double dm = minimize(build_ti_effective(p, N), s, c.seed).result.lambda;
    const double rel = std::abs(dm - ex) / std::max(std::abs(ex), 1e-10);
    add("dmrg_vs_exact_ti", rel, 1e-4, "N=4 exact=" + exact_num(ex) + " dmrg=" + exact_num(dm));
  }
  {
    const int L = 8;
    const PauliSum h = build_hamiltonian(p, L, true);
    const StateOperator H(h);
    StateVector psi = StateVector::Zero(1 << L);
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> gauss;
    for (auto& x : psi) x = cplx(gauss(rng), gauss(rng));
    psi.normalize();
    const EigenSystem es = eigensystem(p, L);
    const double t = 3.0;
    const Eigen::VectorXcd ph = (es.energies * t).unaryExpr([](double e) { return std::exp(cplx(0, -e)); });
    const Eigen::MatrixXcd V = es.vectors.cast<cplx>();
    const StateVector ref = V * ph.asDiagonal() * (V.adjoint() * psi);
    add("chebyshev_vs_eig", (chebyshev_evolve(psi, H, t, cheb_config(c)) - ref).norm(), 1e-8, "L=8 t=3");
  }
  {
    const int L = 8;
    PauliSum O = embed(build_h_loc(p, 3), L, 0, true);
    O *= cplx(1.0 / O.norm());
    const auto times = parse_real_list("0:4:0.5");
    const TimeSeries ex = exact_correlator(O, p, times);
    const TimeSeries st = two_point_correlator(O, p, times, 50, c.seed, cheb_config(c));
    double dev = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) dev = std::max(dev, std::abs(ex.values[i] - st.values[i]));
    add("stochastic_vs_exact", dev, 5e-2, "L=8 K=50 t=0:4:0.5");
  }
  {
    const int N = 4;
    const SlowestResult r = solve(local_form(p, N));
    double lo = 1e300, hi = -1e300;
    for (int L : {N + 2, N + 4, N + 6}) {
      const double v = evaluate_lambda(materialize(r, L), p, L);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    add("lambda_L_independence", hi - lo, 1e-10, "N=4 L=6,8,10");
  }
  return out;
}

// ---------------------------------------------------------------- run

RunOutcome run(const ExperimentConfig& cfg, const RunOptions& opt) {
  RunOutcome res;
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    res.exit_code = kExitInvalidConfig;
    res.report = std::string("invalid config: ") + e.what();
    return res;
  }

  if (cfg.experiment == Experiment::verify) {
    std::ostringstream os;
    bool ok = true;
    try {
      for (const auto& ch : verify_checks(cfg)) {
        os << (ch.passed ? "PASS " : "FAIL ") << ch.name << " value=" << std::setprecision(6) << ch.value
           << " tol=" << ch.tolerance << " (" << ch.detail << ")\n";
        ok = ok && ch.passed;
      }
    } catch (const UsageError& e) {
      res.exit_code = kExitInvalidConfig;
      res.report = os.str() + "invalid config: " + e.what();
      return res;
    }
    res.report = os.str();
    res.exit_code = ok ? kExitOk : kExitVerifyFailed;
    return res;
  }

  const fs::path out_dir(cfg.out);
  const fs::path entry = opt.cache_dir.empty() ? fs::path() : opt.cache_dir / cfg.hash();
  if (!entry.empty() && fs::exists(entry / "manifest.json")) {
    fs::create_directories(out_dir);
    for (const auto& de : fs::directory_iterator(entry)) {
      fs::copy_file(de.path(), out_dir / de.path().filename(), fs::copy_options::overwrite_existing);
      res.files.push_back(out_dir / de.path().filename());
    }
    res.cache_hit = true;
    res.report = "cache hit " + cfg.hash();
    return res;
  }

  bool failed = false;
  Files files;
  switch (cfg.experiment) {
    case Experiment::find: files = run_find(cfg, opt.log, failed); break;
    case Experiment::overlap_sweep: files = run_overlap(cfg, opt.log, failed); break;
    case Experiment::scaling_sweep: files = run_scaling(cfg, opt.log, failed); break;
    case Experiment::evolve: files = run_evolve(cfg, opt.log, failed); break;
    case Experiment::otoc: files = run_otoc(cfg, opt.log, failed); break;
    case Experiment::entropy: files = run_entropy(cfg, opt.log, failed); break;
    case Experiment::transition: files = run_transition(cfg, opt.log, failed); break;
    case Experiment::verify: break;
  }
  res.exit_code = failed ? kExitNumerical : kExitOk;
  files["manifest.json"] = manifest(cfg, files, res.exit_code);
  write_files(out_dir, files);
  for (const auto& [name, _] : files) res.files.push_back(out_dir / name);
  if (!failed && !entry.empty()) {
    const fs::path tmp = opt.cache_dir / (cfg.hash() + ".tmp");
    std::error_code ec;
    fs::remove_all(tmp, ec);
    write_files(tmp, files);
    fs::rename(tmp, entry, ec);
    if (ec) fs::remove_all(tmp, ec);
  }
  res.report = std::to_string(files.size()) + " files written to " + out_dir.string();
  return res;
}

}  // namespace slowop::expcli
