#pragma once

// Spec strings for families, processes and rules.
//
//   name[:arg,arg,...]      positional arguments
//   name[:key=v,v,key=v]    keyed arguments; bare values extend the previous key
//
// A key given several values builds a grid (families) where that makes sense.
// Integer lists also accept ranges "lo..hi".

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eville/errors.hpp"
#include "eville/evidence.hpp"
#include "eville/families.hpp"
#include "eville/paths.hpp"
#include "eville/slln.hpp"

namespace eville::cli {

struct Spec {
  std::string name;
  std::vector<std::string> positional;
  std::map<std::string, std::vector<std::string>> keyed;
  std::string text;
};

inline Spec parse_spec(std::string_view text) {
  Spec s;
  s.text = std::string(text);
  const auto colon = text.find(':');
  s.name = std::string(text.substr(0, colon));
  if (s.name.empty()) throw InputError("empty spec");
  if (colon == std::string_view::npos) return s;
  std::string_view rest = text.substr(colon + 1);
  if (rest.empty()) throw InputError("spec '" + s.text + "': nothing after ':'");
  std::string current;
  while (true) {
    const auto comma = rest.find(',');
    std::string_view tok = rest.substr(0, comma);
    if (tok.empty()) throw InputError("spec '" + s.text + "': empty argument");
    const auto eq = tok.find('=');
    if (eq != std::string_view::npos) {
      current = std::string(tok.substr(0, eq));
      auto value = tok.substr(eq + 1);
      if (current.empty() || value.empty()) throw InputError("spec '" + s.text + "': bad key=value");
      if (s.keyed.count(current)) throw InputError("spec '" + s.text + "': repeated key '" + current + "'");
      s.keyed[current].emplace_back(value);
    } else if (!current.empty()) {
      s.keyed[current].emplace_back(tok);
    } else {
      s.positional.emplace_back(tok);
    }
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  if (!s.positional.empty() && !s.keyed.empty()) {
    throw InputError("spec '" + s.text + "': mixes positional and keyed arguments");
  }
  return s;
}

namespace detail {

inline double to_double(const std::string& v, const Spec& s) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out)) {
    throw InputError("spec '" + s.text + "': '" + v + "' is not a finite number");
  }
  return out;
}

inline std::uint64_t to_uint(const std::string& v, const Spec& s) {
  // Accept integral values written in exponent form (1e4) too.
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec == std::errc() && p == end) return out;
  const double d = to_double(v, s);
  if (d < 0.0 || d != std::floor(d) || d >= 1.8e19) {
    throw InputError("spec '" + s.text + "': '" + v + "' is not a nonnegative integer");
  }
  return static_cast<std::uint64_t>(d);
}

/// Values for `key`, or the positional list at `position` when unkeyed.
inline std::vector<std::string> raw(const Spec& s, const std::string& key, std::size_t position,
                                    bool last_positional_takes_rest = false) {
  if (auto it = s.keyed.find(key); it != s.keyed.end()) return it->second;
  if (position < s.positional.size()) {
    if (last_positional_takes_rest) {
      return {s.positional.begin() + static_cast<std::ptrdiff_t>(position), s.positional.end()};
    }
    return {s.positional[position]};
  }
  return {};
}

inline void allow_keys(const Spec& s, std::initializer_list<const char*> keys, std::size_t max_positional) {
  for (const auto& [k, v] : s.keyed) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) throw InputError("spec '" + s.text + "': unknown key '" + k + "'");
  }
  if (s.positional.size() > max_positional) {
    throw InputError("spec '" + s.text + "': too many arguments");
  }
}

inline std::vector<double> reals(const Spec& s, const std::string& key, std::size_t pos,
                                 std::optional<double> fallback, bool rest = false) {
  auto vals = raw(s, key, pos, rest);
  if (vals.empty()) {
    if (!fallback) throw InputError("spec '" + s.text + "': missing '" + key + "'");
    return {*fallback};
  }
  std::vector<double> out;
  for (const auto& v : vals) out.push_back(to_double(v, s));
  return out;
}

inline double real(const Spec& s, const std::string& key, std::size_t pos, std::optional<double> fallback) {
  auto v = reals(s, key, pos, fallback);
  if (v.size() != 1) throw InputError("spec '" + s.text + "': '" + key + "' takes one value");
  return v[0];
}

inline std::vector<std::uint64_t> uints(const Spec& s, const std::string& key, std::size_t pos,
                                        std::optional<std::uint64_t> fallback, bool rest = false) {
  auto vals = raw(s, key, pos, rest);
  if (vals.empty()) {
    if (!fallback) throw InputError("spec '" + s.text + "': missing '" + key + "'");
    return {*fallback};
  }
  std::vector<std::uint64_t> out;
  for (const auto& v : vals) {
    if (auto dots = v.find(".."); dots != std::string::npos) {
      const auto lo = to_uint(v.substr(0, dots), s);
      const auto hi = to_uint(v.substr(dots + 2), s);
      if (hi < lo || hi - lo > 100000) throw InputError("spec '" + s.text + "': bad range '" + v + "'");
      for (auto x = lo; x <= hi; ++x) out.push_back(x);
    } else {
      out.push_back(to_uint(v, s));
    }
  }
  return out;
}

inline std::uint64_t uint(const Spec& s, const std::string& key, std::size_t pos,
                          std::optional<std::uint64_t> fallback) {
  auto v = uints(s, key, pos, fallback);
  if (v.size() != 1) throw InputError("spec '" + s.text + "': '" + key + "' takes one value");
  return v[0];
}

inline void no_args(const Spec& s) {
  if (!s.positional.empty() || !s.keyed.empty()) {
    throw InputError("spec '" + s.text + "': '" + s.name + "' takes no arguments");
  }
}

}  // namespace detail

/// gaussian[:mu=..,sigma=..], rademacher, cauchy, truncated-cauchy:a=.., binary-pn:n=..,
/// two-coin:i=.., alternating-drift:d=... Lists become grids.
inline DistributionFamily parse_family(std::string_view text) {
  using namespace detail;
  const Spec s = parse_spec(text);
  std::vector<FamilyMember> members;
  if (s.name == "gaussian") {
    allow_keys(s, {"mu", "sigma"}, 2);
    for (double mu : reals(s, "mu", 0, 0.0)) {
      for (double sigma : reals(s, "sigma", 1, 1.0)) members.push_back(gaussian_iid(mu, sigma));
    }
  } else if (s.name == "rademacher") {
    no_args(s);
    members.push_back(rademacher_iid());
  } else if (s.name == "cauchy") {
    no_args(s);
    members.push_back(cauchy_iid());
  } else if (s.name == "truncated-cauchy" || s.name == "truncated-cauchy-grid") {
    allow_keys(s, {"a"}, 64);
    return truncated_cauchy_family(reals(s, "a", 0, std::nullopt, true));
  } else if (s.name == "binary-pn") {
    allow_keys(s, {"n"}, 64);
    for (auto n : uints(s, "n", 0, std::nullopt, true)) members.push_back(binary_pn(n));
  } else if (s.name == "two-coin") {
    allow_keys(s, {"i"}, 2);
    for (auto i : uints(s, "i", 0, std::nullopt, true)) members.push_back(two_coin(static_cast<int>(i)));
  } else if (s.name == "alternating-drift") {
    allow_keys(s, {"d"}, 64);
    for (double d : reals(s, "d", 0, std::nullopt, true)) members.push_back(alternating_drift(d));
  } else {
    throw InputError("unknown family '" + s.name + "'");
  }
  std::string label = members.size() == 1 ? members.front().label : s.text;
  return DistributionFamily(std::move(label), std::move(members));
}

/// tau rules need k_n lists; `witness:k=k1,k2,...` pairs them with n = 1, 2, ...
inline std::vector<ScheduleEntry> witness_entries(const Spec& s) {
  std::vector<ScheduleEntry> entries;
  std::uint64_t n = 1;
  for (auto k : detail::uints(s, "k", 0, std::nullopt, true)) entries.push_back({n++, k});
  return entries;
}

inline StoppingRule parse_rule(std::string_view text, const EvidenceProcess* process = nullptr);

/// L:lambda=.., normal-mixture, one-sided-exact, one-sided-paper,
/// constant:value=.., one-jump:c=..,at=.. (jump at a fixed time) or
/// one-jump:c=..,rule=<rule name> for argument-free rules, witness:k=...
inline EvidenceProcess parse_process(std::string_view text) {
  using namespace detail;
  const Spec s = parse_spec(text);
  if (s.name == "L") {
    allow_keys(s, {"lambda"}, 1);
    return likelihood_process(real(s, "lambda", 0, std::nullopt));
  }
  if (s.name == "normal-mixture") {
    no_args(s);
    return normal_mixture();
  }
  if (s.name == "one-sided-exact") {
    no_args(s);
    return one_sided_mixture_exact();
  }
  if (s.name == "one-sided-paper") {
    no_args(s);
    return one_sided_mixture_paper();
  }
  if (s.name == "constant") {
    allow_keys(s, {"value"}, 1);
    return constant_process(real(s, "value", 0, std::nullopt));
  }
  if (s.name == "one-jump") {
    allow_keys(s, {"c", "at", "rule"}, 2);
    const double c = real(s, "c", 0, std::nullopt);
    if (auto it = s.keyed.find("rule"); it != s.keyed.end()) {
      if (s.keyed.count("at")) throw InputError("spec '" + s.text + "': give either 'at' or 'rule'");
      if (it->second.size() != 1) throw InputError("spec '" + s.text + "': 'rule' takes one value");
      return one_jump(parse_rule(it->second[0]), c);
    }
    return one_jump(rules::fixed_time(uint(s, "at", 1, std::nullopt)), c);
  }
  if (s.name == "witness") {
    allow_keys(s, {"k"}, 64);
    return slln_witness(make_schedule(witness_entries(s), nullptr)).process;
  }
  throw InputError("unknown process '" + s.name + "'");
}

/// first-one, hit:value=.., zeros:m=.., ones:n=.., mean-exceeds:c=..,tmin=..,
/// fixed:t=.., line:alpha=..,beta=.., scaled-sup:gamma=..,eps=.., tau:k=..,n=..,
/// level:a=.. (needs a process), never, always.
inline StoppingRule parse_rule(std::string_view text, const EvidenceProcess* process) {
  using namespace detail;
  const Spec s = parse_spec(text);
  if (s.name == "first-one") {
    no_args(s);
    return rules::first_one();
  }
  if (s.name == "never") {
    no_args(s);
    return rules::never();
  }
  if (s.name == "always") {
    no_args(s);
    return rules::fixed_time(1);
  }
  if (s.name == "hit") {
    allow_keys(s, {"value"}, 1);
    return rules::equals(real(s, "value", 0, std::nullopt));
  }
  if (s.name == "zeros") {
    allow_keys(s, {"m"}, 1);
    return rules::leading_zeros(uint(s, "m", 0, std::nullopt));
  }
  if (s.name == "ones") {
    allow_keys(s, {"n"}, 1);
    return rules::count_ones(uint(s, "n", 0, std::nullopt));
  }
  if (s.name == "mean-exceeds") {
    allow_keys(s, {"c", "tmin"}, 2);
    return rules::mean_exceeds(real(s, "c", 0, std::nullopt), uint(s, "tmin", 1, 1));
  }
  if (s.name == "fixed") {
    allow_keys(s, {"t"}, 1);
    return rules::fixed_time(uint(s, "t", 0, std::nullopt));
  }
  if (s.name == "line") {
    allow_keys(s, {"alpha", "beta"}, 2);
    return rules::line_crossing(real(s, "alpha", 0, std::nullopt), real(s, "beta", 1, std::nullopt));
  }
  if (s.name == "scaled-sup") {
    allow_keys(s, {"gamma", "eps"}, 2);
    return rules::scaled_sup_exceeds(real(s, "gamma", 0, std::nullopt), real(s, "eps", 1, std::nullopt));
  }
  if (s.name == "tau") {
    allow_keys(s, {"k", "n"}, 2);
    return tau_kn(uint(s, "k", 0, std::nullopt), uint(s, "n", 1, std::nullopt));
  }
  if (s.name == "level") {
    allow_keys(s, {"a"}, 1);
    if (!process) throw InputError("rule '" + s.text + "' needs a process");
    return level_rule(*process, real(s, "a", 0, std::nullopt));
  }
  throw InputError("unknown rule '" + s.name + "'");
}

}  // namespace eville::cli
