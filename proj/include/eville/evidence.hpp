#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eville/errors.hpp"
#include "eville/format.hpp"
#include "eville/numeric.hpp"
#include "eville/paths.hpp"
#include "eville/process.hpp"

namespace eville {

/// Positive mixture weights with partial sums at most 1 (+1e-12 slack).
class MixtureWeights {
 public:
  explicit MixtureWeights(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw InputError("MixtureWeights: no weights");
    double partial = 0.0;
    for (double w : weights_) {
      if (!(w > 0.0) || !std::isfinite(w)) throw InputError("MixtureWeights: weights must be > 0");
      partial += w;
      if (partial > 1.0 + 1e-12) throw InputError("MixtureWeights: partial sums exceed 1");
    }
  }

  /// w_n = 6 / (pi^2 n^2) for n = 1..n_terms.
  static MixtureWeights basel(std::size_t n_terms) {
    if (n_terms < 1) throw InputError("MixtureWeights::basel: n_terms must be >= 1");
    std::vector<double> w(n_terms);
    for (std::size_t n = 1; n <= n_terms; ++n) {
      const double nd = static_cast<double>(n);
      w[n - 1] = 6.0 / (std::numbers::pi * std::numbers::pi * nd * nd);
    }
    return MixtureWeights(std::move(w));
  }

  const std::vector<double>& values() const { return weights_; }
  std::size_t size() const { return weights_.size(); }
  double total() const {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
  }

 private:
  std::vector<double> weights_;
};

namespace detail {

/// Tracks (t, S_t) and maps them to a log-value.
template <class LogValue>
EvidenceProcess sum_process(std::string label, LogValue f) {
  const double initial = f(0.0, 0.0);
  return EvidenceProcess(std::move(label), initial, [f] {
    return EvidenceProcess::Tracker([f, t = 0.0, s = 0.0](double x) mutable {
      t += 1.0;
      s += x;
      return f(t, s);
    });
  });
}

}  // namespace detail

/// L_t(lambda) = exp(lambda S_t - lambda^2 t / 2).
inline EvidenceProcess likelihood_process(double lambda) {
  if (!std::isfinite(lambda)) throw InputError("likelihood_process: lambda must be finite");
  return detail::sum_process("L(lambda=" + format_number(lambda) + ")",
                             [lambda](double t, double s) {
                               return lambda * s - 0.5 * lambda * lambda * t;
                             });
}

/// Standard-normal mixture of L_t(lambda) over lambda:
///   log M_t = S_t^2 / (2(t+1)) - log(t+1) / 2.
inline EvidenceProcess normal_mixture() {
  return detail::sum_process("normal-mixture", [](double t, double s) {
    return s * s / (2.0 * (t + 1.0)) - 0.5 * std::log1p(t);
  });
}

/// The one-sided closed form exactly as printed in the source:
///   N_t = 2 exp(2 S_t^2 / (t+1)) / sqrt(t+1) * Phi(2 S_t / sqrt(t+1)).
/// It exceeds the exact one-sided mixture whenever S_t >= 0, and E[N_1] is
/// infinite under N(0,1), so it is not treated as an e-process anywhere here.
inline EvidenceProcess one_sided_mixture_paper() {
  return detail::sum_process("one-sided-paper", [](double t, double s) {
    const double root = std::sqrt(t + 1.0);
    return std::numbers::ln2 + 2.0 * s * s / (t + 1.0) - 0.5 * std::log1p(t) +
           log_normal_cdf(2.0 * s / root);
  });
}

/// 2 * integral_0^inf L_t(lambda) phi(lambda) dlambda in closed form:
///   2 exp(S_t^2 / (2(t+1))) / sqrt(t+1) * Phi(S_t / sqrt(t+1)).
inline EvidenceProcess one_sided_mixture_exact() {
  return detail::sum_process("one-sided-exact", [](double t, double s) {
    const double root = std::sqrt(t + 1.0);
    return std::numbers::ln2 + s * s / (2.0 * (t + 1.0)) - 0.5 * std::log1p(t) +
           log_normal_cdf(s / root);
  });
}

/// E_t = value for all t.
inline EvidenceProcess constant_process(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw InputError("constant_process: value >= 0");
  const double lv = std::log(value);
  return EvidenceProcess("constant(" + format_number(value) + ")", lv, [lv] {
    return EvidenceProcess::Tracker([lv](double) { return lv; });
  });
}

/// Deterministic schedule: E_0 = initial, E_t = values[t-1], then held at
/// the last entry.
inline EvidenceProcess sequence_process(std::vector<double> values, double initial = 1.0) {
  if (values.empty()) throw InputError("sequence_process: no values");
  std::vector<double> logs;
  logs.reserve(values.size());
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("sequence_process: values >= 0");
    logs.push_back(std::log(v));
  }
  auto shared = std::make_shared<const std::vector<double>>(std::move(logs));
  return EvidenceProcess("sequence", std::log(initial), [shared] {
    return EvidenceProcess::Tracker([shared, t = std::size_t{0}](double) mutable {
      if (t < shared->size()) ++t;
      return (*shared)[t - 1];
    });
  });
}

/// E_t = (1/c) 1{tau <= t}, tau the hit time of `rule`.
inline EvidenceProcess one_jump(StoppingRule rule, double c) {
  if (!(c > 0.0 && c <= 1.0)) throw InputError("one_jump: c must lie in (0, 1]");
  const double jump = -std::log(c);
  std::string label = "one-jump(c=" + format_number(c) + "," + rule.description() + ")";
  return EvidenceProcess(
      std::move(label), kNegInf,
      [rule = std::move(rule), jump] {
        return EvidenceProcess::Tracker(
            [m = rule.monitor(), jump, fired = false](double x) mutable {
              fired = m(x) || fired;
              return fired ? jump : kNegInf;
            });
      },
      /*nondecreasing=*/true);
}

/// E_t = sum_n 1{tau_n <= t}. It is an e-process only when the caller can
/// vouch that sup_P P(tau_n < inf) <= 2^{-n}; that is not checked here.
inline EvidenceProcess indicator_witness(std::vector<StoppingRule> rules,
                                         std::string label = "witness") {
  if (rules.empty()) throw InputError("indicator_witness: empty rule list");
  auto shared = std::make_shared<const std::vector<StoppingRule>>(std::move(rules));
  return EvidenceProcess(
      std::move(label), kNegInf,
      [shared] {
        std::vector<StoppingRule::Monitor> monitors;
        monitors.reserve(shared->size());
        for (const auto& r : *shared) monitors.push_back(r.monitor());
        return EvidenceProcess::Tracker(
            [monitors = std::move(monitors), fired = std::vector<bool>(shared->size(), false),
             count = std::size_t{0}](double x) mutable {
              for (std::size_t i = 0; i < monitors.size(); ++i) {
                if (fired[i]) continue;
                if (monitors[i](x)) {
                  fired[i] = true;
                  ++count;
                }
              }
              return count == 0 ? kNegInf : std::log(static_cast<double>(count));
            });
      },
      /*nondecreasing=*/true);
}

/// sum_n w_n E^n_t, accumulated with log-sum-exp.
inline EvidenceProcess mix(std::vector<EvidenceProcess> processes, const MixtureWeights& weights) {
  if (processes.size() != weights.size()) {
    throw InputError("mix: " + std::to_string(processes.size()) + " processes but " +
                     std::to_string(weights.size()) + " weights");
  }
  std::vector<double> log_w;
  std::vector<double> init;
  bool nondecreasing = true;
  std::string label = "mix(";
  for (std::size_t i = 0; i < processes.size(); ++i) {
    log_w.push_back(std::log(weights.values()[i]));
    init.push_back(log_w.back() + processes[i].log_initial());
    nondecreasing = nondecreasing && processes[i].nondecreasing();
    if (i) label += ';';
    label += processes[i].label();
  }
  label += ')';
  auto shared = std::make_shared<const std::vector<EvidenceProcess>>(std::move(processes));
  return EvidenceProcess(
      std::move(label), log_sum_exp(init),
      [shared, log_w] {
        std::vector<EvidenceProcess::Tracker> trackers;
        for (const auto& p : *shared) trackers.push_back(p.tracker());
        return EvidenceProcess::Tracker(
            [trackers = std::move(trackers), log_w, buf = std::vector<double>(log_w.size())](
                double x) mutable {
              for (std::size_t i = 0; i < trackers.size(); ++i) buf[i] = log_w[i] + trackers[i](x);
              return log_sum_exp(buf);
            });
      },
      nondecreasing);
}

/// E'_t = E_{tau ^ t} with tau the first t >= 1 where E_t >= level.
inline EvidenceProcess stop_at_level(EvidenceProcess process, double level) {
  if (!(level > 0.0) || !std::isfinite(level)) throw InputError("stop_at_level: level must be > 0");
  const double log_level = std::log(level);
  std::string label = "stopped(" + process.label() + ",level=" + format_number(level) + ")";
  const double initial = process.log_initial();
  const bool nondecreasing = process.nondecreasing();
  return EvidenceProcess(
      std::move(label), initial,
      [process = std::move(process), log_level] {
        return EvidenceProcess::Tracker(
            [tr = process.tracker(), log_level, frozen = std::optional<double>{}](double x) mutable {
              const double v = tr(x);
              if (frozen) return *frozen;
              if (v >= log_level) frozen = v;
              return v;
            });
      },
      nondecreasing);
}

/// sum_{n <= n_terms} 6/(pi^2 n^2) E^{(n)}_t, where E^{(n)} is `process`
/// stopped at level 2^n. Once sup_s E_s >= 2^{n_terms} the value is at least
/// (6/pi^2) sum_{n <= n_terms} 2^n / n^2. Dropping the n > n_terms terms keeps
/// the e-process property.
inline EvidenceProcess lift_sup_to_lim(EvidenceProcess process, std::size_t n_terms) {
  if (n_terms < 1) throw InputError("lift_sup_to_lim: n_terms must be >= 1");
  const auto weights = MixtureWeights::basel(n_terms);
  std::vector<double> log_w;
  std::vector<double> log_level;
  for (std::size_t n = 1; n <= n_terms; ++n) {
    log_w.push_back(std::log(weights.values()[n - 1]));
    log_level.push_back(static_cast<double>(n) * std::numbers::ln2);
  }
  const double initial = process.log_initial() + std::log(weights.total());
  std::string label = "lift(" + process.label() + ",n=" + std::to_string(n_terms) + ")";
  return EvidenceProcess(std::move(label), initial, [process = std::move(process), log_w, log_level] {
    return EvidenceProcess::Tracker(
        [tr = process.tracker(), log_w, log_level,
         frozen = std::vector<std::optional<double>>(log_w.size()),
         buf = std::vector<double>(log_w.size())](double x) mutable {
          const double v = tr(x);
          for (std::size_t i = 0; i < log_w.size(); ++i) {
            if (!frozen[i] && v >= log_level[i]) frozen[i] = v;
            buf[i] = log_w[i] + frozen[i].value_or(v);
          }
          return log_sum_exp(buf);
        });
  });
}

}  // namespace eville
