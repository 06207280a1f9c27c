#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eville/errors.hpp"
#include "eville/rng.hpp"

namespace eville::cli {

/// Every knob of one invocation. Fields irrelevant to `command` are ignored
/// but still validated when present.
struct JobConfig {
  std::string command;  // see kCommands
  std::string family;
  std::string process;
  std::vector<std::string> rules;
  std::uint64_t horizon = 1000;
  std::uint64_t paths = 10000;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;
  std::string out;  // empty: stdout
  std::string format = "csv";
  std::optional<double> eps;
  std::optional<double> gamma;
  std::optional<double> K;
  std::optional<std::uint64_t> k;
  std::vector<double> alpha{0.05};
  std::vector<double> levels{5.0, 20.0};
  std::optional<std::uint64_t> n_max;
  std::string schedule;
  std::optional<std::uint64_t> m;
  std::optional<std::uint64_t> n;
  std::uint64_t i = 1;
  std::uint64_t trunc = 60;
  std::uint64_t tail_samples = 1000000;

  friend bool operator==(const JobConfig&, const JobConfig&) = default;
};

inline const std::set<std::string> kCommands{
    "simulate",       "bound-l1",      "bound-l1-auto", "bound-mean-k",     "verify-ville",
    "verify-eprocess", "mu-star",      "slln-schedule", "slln-run",         "oracle-two-coin",
    "oracle-binary-pn"};

namespace detail {
template <class T>
void put_optional(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}
}  // namespace detail

inline nlohmann::json to_json(const JobConfig& c) {
  nlohmann::json j{{"command", c.command},   {"family", c.family},   {"process", c.process},
                   {"rules", c.rules},       {"horizon", c.horizon}, {"paths", c.paths},
                   {"seed", c.seed},         {"threads", c.threads}, {"out", c.out},
                   {"format", c.format},     {"alpha", c.alpha},     {"levels", c.levels},
                   {"schedule", c.schedule}, {"i", c.i},             {"trunc", c.trunc},
                   {"tail_samples", c.tail_samples}};
  detail::put_optional(j, "eps", c.eps);
  detail::put_optional(j, "gamma", c.gamma);
  detail::put_optional(j, "K", c.K);
  detail::put_optional(j, "k", c.k);
  detail::put_optional(j, "n_max", c.n_max);
  detail::put_optional(j, "m", c.m);
  detail::put_optional(j, "n", c.n);
  return j;
}

/// Parses a config object; unknown keys and wrong types are input errors.
inline JobConfig from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("config: expected a JSON object");
  JobConfig c;
  auto get = [&](const std::string& key, auto& field) {
    try {
      using T = std::remove_reference_t<decltype(field)>;
      field = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError("config: bad value for '" + key + "': " + e.what());
    }
  };
  auto get_optional = [&](const std::string& key, auto& field) {
    if (j.at(key).is_null()) return;
    try {
      using T = typename std::remove_reference_t<decltype(field)>::value_type;
      field = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError("config: bad value for '" + key + "': " + e.what());
    }
  };
  const std::map<std::string, std::function<void(const std::string&)>> fields{
      {"command", [&](const std::string& k) { get(k, c.command); }},
      {"family", [&](const std::string& k) { get(k, c.family); }},
      {"process", [&](const std::string& k) { get(k, c.process); }},
      {"rules", [&](const std::string& k) { get(k, c.rules); }},
      {"horizon", [&](const std::string& k) { get(k, c.horizon); }},
      {"paths", [&](const std::string& k) { get(k, c.paths); }},
      {"seed", [&](const std::string& k) { get(k, c.seed); }},
      {"threads", [&](const std::string& k) { get(k, c.threads); }},
      {"out", [&](const std::string& k) { get(k, c.out); }},
      {"format", [&](const std::string& k) { get(k, c.format); }},
      {"alpha", [&](const std::string& k) { get(k, c.alpha); }},
      {"levels", [&](const std::string& k) { get(k, c.levels); }},
      {"schedule", [&](const std::string& k) { get(k, c.schedule); }},
      {"i", [&](const std::string& k) { get(k, c.i); }},
      {"trunc", [&](const std::string& k) { get(k, c.trunc); }},
      {"tail_samples", [&](const std::string& k) { get(k, c.tail_samples); }},
      {"eps", [&](const std::string& k) { get_optional(k, c.eps); }},
      {"gamma", [&](const std::string& k) { get_optional(k, c.gamma); }},
      {"K", [&](const std::string& k) { get_optional(k, c.K); }},
      {"k", [&](const std::string& k) { get_optional(k, c.k); }},
      {"n_max", [&](const std::string& k) { get_optional(k, c.n_max); }},
      {"m", [&](const std::string& k) { get_optional(k, c.m); }},
      {"n", [&](const std::string& k) { get_optional(k, c.n); }},
  };
  for (const auto& [key, value] : j.items()) {
    auto it = fields.find(key);
    if (it == fields.end()) throw InputError("config: unknown key '" + key + "'");
    it->second(key);
  }
  return c;
}

inline JobConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot read '" + path + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("config: '" + path + "' is not valid JSON: " + e.what());
  }
}

/// Field-level checks that need no spec parsing.
inline void validate(const JobConfig& c) {
  if (!kCommands.count(c.command)) throw InputError("unknown command '" + c.command + "'");
  if (c.format != "csv" && c.format != "jsonl") throw InputError("format must be csv or jsonl");
  if (c.horizon < 1) throw InputError("--horizon must be >= 1");
  auto positive = [](const std::optional<double>& v, const char* flag) {
    if (v && (!(*v > 0.0) || !std::isfinite(*v))) {
      throw InputError(std::string(flag) + " must be positive and finite");
    }
  };
  positive(c.eps, "--eps");
  positive(c.gamma, "--gamma");
  if (c.K && (!(*c.K >= 1.0) || !std::isfinite(*c.K))) throw InputError("--K must be >= 1");
  if (c.k && *c.k < 1) throw InputError("--k must be >= 1");
  for (double a : c.alpha) {
    if (!(a > 0.0 && a < 1.0)) throw InputError("--alpha values must lie in (0, 1)");
  }
  if (c.alpha.empty()) throw InputError("--alpha needs at least one value");
  for (double l : c.levels) {
    if (!(l > 0.0) || !std::isfinite(l)) throw InputError("--levels must be positive");
  }
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw InputError(c.command + ": missing " + what);
  };
  const std::string& cmd = c.command;
  const bool mc = cmd == "simulate" || cmd == "verify-ville" || cmd == "verify-eprocess" ||
                  cmd == "mu-star" || cmd == "slln-run";
  if (mc && c.paths < 100) throw InputError("--paths must be >= 100");
  if (cmd.starts_with("bound") || mc || cmd == "slln-schedule") need(!c.family.empty(), "--family");
  if (cmd == "bound-l1") need(c.eps && c.gamma && c.K, "--eps, --gamma and --K");
  if (cmd == "bound-l1-auto") need(c.eps && c.gamma, "--eps and --gamma");
  if (cmd == "bound-mean-k") need(c.eps && c.k, "--eps and --k");
  if (cmd == "verify-ville" || cmd == "verify-eprocess") need(!c.process.empty(), "--process");
  if (cmd == "simulate" || cmd == "mu-star") need(!c.rules.empty(), "--rule");
  if (cmd == "mu-star" && c.rules.size() != 1) throw InputError("mu-star takes exactly one --rule");
  if (cmd == "slln-schedule") need(c.n_max.has_value(), "--n-max");
  if (cmd == "slln-schedule" && *c.n_max < 1) throw InputError("--n-max must be >= 1");
  if (cmd == "slln-run") need(!c.schedule.empty(), "--schedule");
  if (cmd == "oracle-two-coin") {
    need(c.n.has_value(), "--n");
    if (*c.n < 1) throw InputError("--n must be >= 1");
    if (c.i != 1 && c.i != 2) throw InputError("--i must be 1 or 2");
    if (c.trunc < *c.n + 1) throw InputError("--trunc must be >= n + 1");
    if (c.trunc > 1000) throw InputError("--trunc must be <= 1000");
  }
  if (cmd == "oracle-binary-pn") {
    need(c.m && c.n, "--m and --n");
    if (*c.m < 1) throw InputError("--m must be >= 1");
  }
}

/// Outcome of argument parsing: either a config to run, or an exit status
/// (help text printed, or a usage error already reported).
struct ParseResult {
  std::optional<JobConfig> config;
  int status = 0;
};

namespace detail {

/// Registers one flag on `app`, bound to a scratch config; `copy` moves the
/// value into the merged config when the flag was given.
struct FlagBinding {
  CLI::Option* option;
  std::function<void(JobConfig&, const JobConfig&)> copy;
};

template <class T>
struct Unwrap {
  using type = T;
};
template <class T>
struct Unwrap<std::optional<T>> {
  using type = T;
};

/// Rewrites an integral value written in exponent form ("1e9") as digits;
/// anything else passes through for CLI11 to judge.
inline std::string integral_digits(std::string v) {
  if (v.find_first_of("eE.") == std::string::npos) return v;
  try {
    const double d = std::stod(v);
    if (d >= 0.0 && d < 1.8e19 && d == std::floor(d)) return std::to_string(static_cast<std::uint64_t>(d));
  } catch (const std::exception&) {
  }
  return v;
}

template <class T>
void bind_flag(CLI::App* app, std::vector<FlagBinding>& out, JobConfig& scratch, const std::string& name,
          T JobConfig::*field, const std::string& help) {
  auto* opt = app->add_option(name, scratch.*field, help);
  if constexpr (std::is_same_v<T, std::vector<double>>) opt->delimiter(',');
  if constexpr (std::is_integral_v<typename Unwrap<T>::type>) opt->transform(integral_digits);
  out.push_back({opt, [field](JobConfig& dst, const JobConfig& src) { dst.*field = src.*field; }});
}

}  // namespace detail

/// Parses argv. `--config FILE` supplies a base config; explicit flags win.
inline ParseResult parse_args(int argc, const char* const* argv, std::ostream& err) {
  CLI::App app{"Monte Carlo and exact checks for composite e-processes", "eville"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "eville 0.1.0");

  JobConfig scratch;
  std::string config_path;
  bool json = false;
  struct Leaf {
    CLI::App* app;
    std::string command;
    std::vector<detail::FlagBinding> flags;
    CLI::Option* json_flag = nullptr;
    CLI::Option* config_flag = nullptr;
  };
  std::vector<Leaf> leaves;

  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& command,
                  const std::string& help) -> Leaf& {
    Leaf l;
    l.app = parent->add_subcommand(name, help);
    l.command = command;
    using detail::bind_flag;
    bind_flag(l.app, l.flags, scratch, "--out", &JobConfig::out, "Output file (default: stdout)");
    bind_flag(l.app, l.flags, scratch, "--seed", &JobConfig::seed, "Root seed (default 271828)");
    bind_flag(l.app, l.flags, scratch, "--threads", &JobConfig::threads, "Worker threads (0 = all cores)");
    l.json_flag = l.app->add_flag("--json", json, "Write JSON Lines instead of CSV");
    l.config_flag = l.app->add_option("--config", config_path, "JSON config file; flags override it");
    leaves.push_back(std::move(l));
    return leaves.back();
  };
  auto mc_flags = [&](Leaf& l) {
    using detail::bind_flag;
    bind_flag(l.app, l.flags, scratch, "--family", &JobConfig::family, "Family spec");
    bind_flag(l.app, l.flags, scratch, "--horizon", &JobConfig::horizon, "Horizon T");
    bind_flag(l.app, l.flags, scratch, "--paths", &JobConfig::paths, "Number of replicate paths");
  };
  using detail::bind_flag;

  {
    auto& l = leaf(&app, "simulate", "simulate", "Estimate P(tau <= T) per family member");
    mc_flags(l);
    bind_flag(l.app, l.flags, scratch, "--rule", &JobConfig::rules, "Rule spec (repeatable)");
  }
  auto* bound = app.add_subcommand("bound", "Closed-form line-crossing bounds");
  bound->require_subcommand(1);
  {
    auto& l = leaf(bound, "l1", "bound-l1", "L1 line-crossing bound at truncation K");
    bind_flag(l.app, l.flags, scratch, "--family", &JobConfig::family, "Family spec (for r(K))");
    bind_flag(l.app, l.flags, scratch, "--eps", &JobConfig::eps, "epsilon > 0");
    bind_flag(l.app, l.flags, scratch, "--gamma", &JobConfig::gamma, "gamma > 0");
    bind_flag(l.app, l.flags, scratch, "--K", &JobConfig::K, "truncation level K >= 1");
    bind_flag(l.app, l.flags, scratch, "--tail-samples", &JobConfig::tail_samples, "MC draws for r(K) without closed form");
  }
  {
    auto& l = leaf(bound, "l1-auto", "bound-l1-auto", "L1 bound with K = gamma^(1/3)");
    bind_flag(l.app, l.flags, scratch, "--family", &JobConfig::family, "Family spec");
    bind_flag(l.app, l.flags, scratch, "--eps", &JobConfig::eps, "epsilon > 0");
    bind_flag(l.app, l.flags, scratch, "--gamma", &JobConfig::gamma, "gamma > 0");
    bind_flag(l.app, l.flags, scratch, "--tail-samples", &JobConfig::tail_samples, "MC draws for r without closed form");
  }
  {
    auto& l = leaf(bound, "mean-k", "bound-mean-k", "Bound on P(|S_k|/k > eps)");
    bind_flag(l.app, l.flags, scratch, "--family", &JobConfig::family, "Family spec");
    bind_flag(l.app, l.flags, scratch, "--eps", &JobConfig::eps, "epsilon > 0");
    bind_flag(l.app, l.flags, scratch, "--k", &JobConfig::k, "sample size k >= 1");
    bind_flag(l.app, l.flags, scratch, "--tail-samples", &JobConfig::tail_samples, "MC draws for r without closed form");
  }
  auto* verify = app.add_subcommand("verify", "Monte Carlo verification suites");
  verify->require_subcommand(1);
  {
    auto& l = leaf(verify, "ville", "verify-ville", "Frequency of sup_t E_t >= 1/alpha");
    mc_flags(l);
    bind_flag(l.app, l.flags, scratch, "--process", &JobConfig::process, "Process spec");
    bind_flag(l.app, l.flags, scratch, "--alpha", &JobConfig::alpha, "Levels alpha (comma list)");
  }
  {
    auto& l = leaf(verify, "eprocess", "verify-eprocess", "Stopped means E[E_{tau ^ T}]");
    mc_flags(l);
    bind_flag(l.app, l.flags, scratch, "--process", &JobConfig::process, "Process spec");
    bind_flag(l.app, l.flags, scratch, "--rule", &JobConfig::rules, "Rule spec (repeatable; default: standard set)");
    bind_flag(l.app, l.flags, scratch, "--levels", &JobConfig::levels, "Level rules of the standard set");
  }
  {
    auto& l = leaf(&app, "mu-star", "mu-star", "Grid-supremum of P(tau <= T)");
    mc_flags(l);
    bind_flag(l.app, l.flags, scratch, "--rule", &JobConfig::rules, "Rule spec");
  }
  auto* slln = app.add_subcommand("slln", "Composite SLLN detector");
  slln->require_subcommand(1);
  {
    auto& l = leaf(slln, "schedule", "slln-schedule", "Certified k_n schedule");
    bind_flag(l.app, l.flags, scratch, "--family", &JobConfig::family, "Family spec (closed-form tails)");
    bind_flag(l.app, l.flags, scratch, "--n-max", &JobConfig::n_max, "Largest n");
  }
  {
    auto& l = leaf(slln, "run", "slln-run", "Terminal witness values per path");
    mc_flags(l);
    bind_flag(l.app, l.flags, scratch, "--schedule", &JobConfig::schedule, "Schedule CSV (header n,k_n)");
  }
  auto* oracle = app.add_subcommand("oracle", "Exact probabilities");
  oracle->require_subcommand(1);
  {
    auto& l = leaf(oracle, "two-coin", "oracle-two-coin", "P_i(tau_n <= trunc) under the two-coin law");
    bind_flag(l.app, l.flags, scratch, "--n", &JobConfig::n, "number of ones n >= 1");
    bind_flag(l.app, l.flags, scratch, "--trunc", &JobConfig::trunc, "truncation time");
    bind_flag(l.app, l.flags, scratch, "--i", &JobConfig::i, "law index 1 or 2");
  }
  {
    auto& l = leaf(oracle, "binary-pn", "oracle-binary-pn", "P_n(first m symbols are zero)");
    bind_flag(l.app, l.flags, scratch, "--m", &JobConfig::m, "m >= 1");
    bind_flag(l.app, l.flags, scratch, "--n", &JobConfig::n, "position parameter n >= 0");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::ostringstream out;
    app.exit(e, out, err);
    std::cout << out.str();
    return {std::nullopt, 0};
  } catch (const CLI::CallForAllHelp& e) {
    std::ostringstream out;
    app.exit(e, out, err);
    std::cout << out.str();
    return {std::nullopt, 0};
  } catch (const CLI::CallForVersion& e) {
    std::cout << e.what() << '\n';
    return {std::nullopt, 0};
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return {std::nullopt, 2};
  }

  for (auto& l : leaves) {
    if (!l.app->parsed()) continue;
    try {
      JobConfig merged = config_path.empty() ? JobConfig{} : load_config_file(config_path);
      if (!merged.command.empty() && merged.command != l.command) {
        throw InputError("config file command '" + merged.command + "' conflicts with '" + l.command + "'");
      }
      merged.command = l.command;
      for (const auto& f : l.flags) {
        if (f.option->count() > 0) f.copy(merged, scratch);
      }
      if (json) merged.format = "jsonl";
      validate(merged);
      return {merged, 0};
    } catch (const InputError& e) {
      err << "usage error: " << e.what() << '\n';
      return {std::nullopt, 2};
    }
  }
  err << "usage error: no command\n";
  return {std::nullopt, 2};
}

}  // namespace eville::cli
