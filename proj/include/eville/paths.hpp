#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eville/errors.hpp"
#include "eville/format.hpp"
#include "eville/process.hpp"

namespace eville {

/// A finite observation prefix x_1..x_T with running sums.
///
/// Indexing is 1-based in time: `x(t)`, `sum(t)` and `mean(t)` refer to x_t,
/// S_t = x_1 + ... + x_t and S_t / t. Running sums use plain left-to-right
/// double addition, the same arithmetic every online monitor uses, so the
/// two agree bit for bit.
class SamplePath {
 public:
  explicit SamplePath(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw InputError("SamplePath: horizon must be positive");
    sums_.resize(values_.size());
    double s = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        throw InputError("SamplePath: non-finite value at t=" + std::to_string(i + 1));
      }
      s += values_[i];
      sums_[i] = s;
    }
  }

  std::size_t horizon() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<const double> prefix(std::size_t t) const {
    return std::span<const double>(values_).first(t);
  }
  double x(std::size_t t) const { return values_.at(t - 1); }
  double sum(std::size_t t) const { return t == 0 ? 0.0 : sums_.at(t - 1); }
  double mean(std::size_t t) const { return sum(t) / static_cast<double>(t); }

 private:
  std::vector<double> values_;
  std::vector<double> sums_;
};

/// Either a time 1 <= t <= T, or "not hit by the horizon" (tau > T).
///
/// NOT-HIT only says the rule did not fire within the observed prefix; any
/// probability built from it underestimates P(tau < infinity).
class HitTime {
 public:
  static HitTime at(std::size_t t) { return HitTime(t); }
  static HitTime not_hit() { return HitTime(kNever); }

  bool hit() const { return t_ != kNever; }
  /// Hit time; only meaningful when `hit()`.
  std::size_t value() const { return t_; }
  bool hit_by(std::size_t t) const { return t_ <= t; }

  /// NOT-HIT orders as +infinity.
  friend auto operator<=>(const HitTime&, const HitTime&) = default;

 private:
  static constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();
  explicit HitTime(std::size_t t) : t_(t) {}
  std::size_t t_;
};

enum class Decision { kContinue, kStop };

/// An adapted stop/continue procedure.
///
/// `monitor()` returns a fresh online evaluator for one path. Calling it with
/// x_t returns whether the stop condition holds at time t given x_1..x_t;
/// the hit time is the first t at which it does. Monitors may keep being fed
/// after the first STOP (combinators rely on that).
class StoppingRule {
 public:
  using Monitor = std::function<bool(double)>;
  using Factory = std::function<Monitor()>;

  StoppingRule(std::string description, Factory factory)
      : description_(std::move(description)), factory_(std::move(factory)) {}

  const std::string& description() const { return description_; }
  Monitor monitor() const { return factory_(); }

  /// STOP/CONTINUE at t = prefix.size() >= 1.
  Decision decide(std::span<const double> prefix) const {
    if (prefix.empty()) throw InputError("decide: empty prefix");
    auto m = monitor();
    bool stop = false;
    for (double x : prefix) stop = m(x);
    return stop ? Decision::kStop : Decision::kContinue;
  }

 private:
  std::string description_;
  Factory factory_;
};

/// First t <= T at which `rule` stops on `path`.
inline HitTime hit_time(const StoppingRule& rule, std::span<const double> values) {
  auto m = rule.monitor();
  for (std::size_t t = 1; t <= values.size(); ++t) {
    if (m(values[t - 1])) return HitTime::at(t);
  }
  return HitTime::not_hit();
}

inline HitTime hit_time(const StoppingRule& rule, const SamplePath& path) {
  return hit_time(rule, path.values());
}

/// Stops as soon as any constituent stops: hit time is the minimum.
inline StoppingRule min_rule(std::vector<StoppingRule> rules) {
  if (rules.empty()) throw InputError("min_rule: empty rule list");
  std::string label = "min(";
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (i) label += ';';
    label += rules[i].description();
  }
  label += ')';
  auto shared = std::make_shared<const std::vector<StoppingRule>>(std::move(rules));
  return StoppingRule(std::move(label), [shared] {
    std::vector<StoppingRule::Monitor> monitors;
    monitors.reserve(shared->size());
    for (const auto& r : *shared) monitors.push_back(r.monitor());
    return StoppingRule::Monitor([monitors = std::move(monitors)](double x) mutable {
      bool stop = false;
      for (auto& m : monitors) stop = m(x) || stop;  // every monitor sees every x
      return stop;
    });
  });
}

/// Stops at the first t >= 1 with E_t >= level, compared as log E_t >= log level.
inline StoppingRule level_rule(EvidenceProcess process, double level) {
  if (!(level > 0.0) || !std::isfinite(level)) {
    throw InputError("level_rule: level must be positive and finite");
  }
  const double log_level = std::log(level);
  std::string label = "level(" + process.label() + ">=" + format_number(level) + ")";
  return StoppingRule(std::move(label), [process = std::move(process), log_level] {
    return StoppingRule::Monitor(
        [tr = process.tracker(), log_level](double x) mutable { return tr(x) >= log_level; });
  });
}

namespace rules {

/// Stops whenever x_t == value.
inline StoppingRule equals(double value) {
  return StoppingRule("equals(" + format_number(value) + ")", [value] {
    return StoppingRule::Monitor([value](double x) { return x == value; });
  });
}

/// Stops at the first one (binary sequences).
inline StoppingRule first_one() {
  auto r = equals(1.0);
  return StoppingRule("first-one", [r] { return r.monitor(); });
}

/// Stops at time m iff x_1 = ... = x_m = 0.
inline StoppingRule leading_zeros(std::size_t m) {
  if (m == 0) throw InputError("leading_zeros: m must be >= 1");
  return StoppingRule("zeros(m=" + std::to_string(m) + ")", [m] {
    return StoppingRule::Monitor([m, t = std::size_t{0}, all_zero = true](double x) mutable {
      ++t;
      all_zero = all_zero && x == 0.0;
      return t == m && all_zero;
    });
  });
}

/// Stops once n ones have been observed.
inline StoppingRule count_ones(std::size_t n) {
  if (n == 0) throw InputError("count_ones: n must be >= 1");
  return StoppingRule("ones(n=" + std::to_string(n) + ")", [n] {
    return StoppingRule::Monitor([n, ones = std::size_t{0}](double x) mutable {
      if (x == 1.0) ++ones;
      return ones >= n;
    });
  });
}

/// Stops at the fixed time t.
inline StoppingRule fixed_time(std::size_t t_stop) {
  if (t_stop == 0) throw InputError("fixed_time: t must be >= 1");
  return StoppingRule("fixed(t=" + std::to_string(t_stop) + ")", [t_stop] {
    return StoppingRule::Monitor([t_stop, t = std::size_t{0}](double) mutable {
      return ++t >= t_stop;
    });
  });
}

inline StoppingRule never() {
  return StoppingRule("never", [] { return StoppingRule::Monitor([](double) { return false; }); });
}

/// First t >= t_min with |mean_t| > c.
inline StoppingRule mean_exceeds(double c, std::size_t t_min) {
  return StoppingRule(
      "mean-exceeds(c=" + format_number(c) + ",tmin=" + std::to_string(t_min) + ")", [c, t_min] {
        return StoppingRule::Monitor([c, t_min, t = std::size_t{0}, s = 0.0](double x) mutable {
          ++t;
          s += x;
          return t >= t_min && std::abs(s / static_cast<double>(t)) > c;
        });
      });
}

/// First t with S_t > beta + alpha * t (one-sided line crossing).
inline StoppingRule line_crossing(double alpha, double beta) {
  return StoppingRule(
      "line(alpha=" + format_number(alpha) + ",beta=" + format_number(beta) + ")",
      [alpha, beta] {
        return StoppingRule::Monitor([alpha, beta, t = std::size_t{0}, s = 0.0](double x) mutable {
          ++t;
          s += x;
          return s > beta + alpha * static_cast<double>(t);
        });
      });
}

/// First t with |S_t| / (gamma + t) > threshold.
inline StoppingRule scaled_sup_exceeds(double gamma, double threshold) {
  return StoppingRule(
      "scaled-sup(gamma=" + format_number(gamma) + ",eps=" + format_number(threshold) + ")",
      [gamma, threshold] {
        return StoppingRule::Monitor(
            [gamma, threshold, t = std::size_t{0}, s = 0.0](double x) mutable {
              ++t;
              s += x;
              return std::abs(s) / (gamma + static_cast<double>(t)) > threshold;
            });
      });
}

}  // namespace rules

}  // namespace eville
