#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <new>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "eville/errors.hpp"
#include "eville/estimate.hpp"
#include "eville/families.hpp"
#include "eville/numeric.hpp"
#include "eville/paths.hpp"
#include "eville/process.hpp"
#include "eville/rng.hpp"

namespace eville {

/// Shared knobs of every Monte Carlo job. `workers` = 0 uses every hardware
/// thread; it never changes results.
struct McConfig {
  std::size_t horizon = 1000;
  std::size_t n_paths = 10000;
  std::uint64_t seed = kDefaultSeed;
  unsigned workers = 0;
};

/// Runs `per_replicate(Engine, index)` for index = 0..n_paths-1, each on its
/// own substream(seed, index), and returns the results in index order.
/// Replicates are claimed in chunks by worker threads; since every result
/// lands in its own slot, the output is the same for any worker count.
/// Any exception in a worker discards all results and surfaces as JobError.
template <class Result, class Fn>
std::vector<Result> run_replicates(std::size_t n_paths, std::uint64_t seed, unsigned workers,
                                   Fn&& per_replicate) {
  if (n_paths == 0) throw InputError("run_replicates: n_paths must be >= 1");
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_paths));

  std::vector<Result> results(n_paths);
  constexpr std::size_t kChunk = 64;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&] {
    try {
      for (;;) {
        const std::size_t begin = next.fetch_add(kChunk);
        if (begin >= n_paths || failed.load()) return;
        const std::size_t end = std::min(n_paths, begin + kChunk);
        for (std::size_t i = begin; i < end; ++i) results[i] = per_replicate(substream(seed, i), i);
      }
    } catch (...) {
      failed = true;
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) {
    try {
      std::rethrow_exception(error);
    } catch (const InputError&) {
      throw;
    } catch (const std::bad_alloc&) {
      throw JobError("Monte Carlo job ran out of memory; partial results discarded");
    } catch (const std::exception& e) {
      throw JobError(std::string("Monte Carlo job failed: ") + e.what());
    }
  }
  return results;
}

/// Binomial estimate from 0/1 outcomes.
inline McEstimate frequency_estimate(std::span<const std::uint8_t> hits, const McConfig& cfg) {
  std::size_t count = 0;
  for (auto h : hits) count += h ? 1 : 0;
  const double n = static_cast<double>(hits.size());
  const double p = static_cast<double>(count) / n;
  return {p, std::sqrt(p * (1.0 - p) / n), hits.size(), cfg.horizon, cfg.seed,
          EstimateKind::kCrossingFreq};
}

/// Sample mean with sd/sqrt(n) error, both via compensated two-pass sums in
/// index order.
inline McEstimate mean_estimate(std::span<const double> values, const McConfig& cfg) {
  const double n = static_cast<double>(values.size());
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  const double mean = sum.value() / n;
  CompensatedSum sq;
  for (double v : values) sq.add((v - mean) * (v - mean));
  const double var = values.size() > 1 ? sq.value() / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n), values.size(), cfg.horizon, cfg.seed,
          EstimateKind::kStoppedMean};
}

struct VerificationRow {
  std::string family;
  std::string subject;  // process or rule label
  McEstimate estimate;
  std::optional<double> bound;
  bool violated = false;
};

/// violated <=> value > bound + 3 SE. A smoke test: the 3-SE rule does not
/// control the meta-level error rate across a grid.
inline bool violates(const McEstimate& e, double bound) {
  return e.value > bound + 3.0 * e.std_error;
}

struct VerificationReport {
  std::vector<VerificationRow> rows;
  std::vector<std::string> notes;
  McConfig config;

  bool any_violation() const {
    return std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.violated; });
  }
};

namespace detail {
inline void require_paths(const McConfig& cfg) {
  if (cfg.n_paths < 100) throw InputError("Monte Carlo estimates need n_paths >= 100");
  if (cfg.horizon == 0) throw InputError("horizon must be >= 1");
}
}  // namespace detail

/// Frequency of {hit_time(rule) <= T} under `member`: a horizon-truncated,
/// hence downward-biased, estimate of P(tau < infinity).
inline McEstimate estimate_stop_prob(const FamilyMember& member, const StoppingRule& rule,
                                     const McConfig& cfg) {
  detail::require_paths(cfg);
  auto hits = run_replicates<std::uint8_t>(cfg.n_paths, cfg.seed, cfg.workers,
                                           [&](Engine rng, std::size_t) -> std::uint8_t {
                                             auto xs = member.stream(std::move(rng));
                                             auto m = rule.monitor();
                                             for (std::size_t t = 1; t <= cfg.horizon; ++t) {
                                               if (m(xs())) return 1;
                                             }
                                             return 0;
                                           });
  return frequency_estimate(hits, cfg);
}

/// Per-member estimates of P(tau <= T) and their maximum over the grid.
/// The maximum is a lower bound on the grid's sup_P P(tau < infinity); on its
/// own it neither upper- nor lower-bounds the inverse-capital measure of an
/// event covered by tau. Members share substreams (common random numbers).
inline VerificationReport mu_star_grid_bound(const DistributionFamily& family,
                                             const StoppingRule& rule, const McConfig& cfg) {
  VerificationReport report;
  report.config = cfg;
  std::optional<VerificationRow> best;
  for (const auto& m : family.members()) {
    VerificationRow row{m.label, rule.description(), estimate_stop_prob(m, rule, cfg), {}, false};
    if (!best || row.estimate.value > best->estimate.value) best = row;
    report.rows.push_back(std::move(row));
  }
  if (family.size() > 1) {
    best->family = "grid-sup(" + family.label() + ")";
    report.rows.push_back(*best);
  }
  report.notes.push_back("grid-supremum of P(tau <= T) over " + family.label() +
                         "; horizon-truncated lower bound on sup P(tau < inf) over the grid");
  return report;
}

/// Frequency of {sup_{t <= T} E_t >= 1/alpha} for each alpha, from one set
/// of paths. Ville's inequality bounds each by alpha.
inline VerificationReport ville_check(const EvidenceProcess& process, const FamilyMember& member,
                                      const std::vector<double>& alphas, const McConfig& cfg) {
  detail::require_paths(cfg);
  if (alphas.empty()) throw InputError("ville_check: no alpha");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw InputError("ville_check: alpha must lie in (0, 1)");
  }
  const double top = -std::log(*std::min_element(alphas.begin(), alphas.end()));
  auto sups = run_replicates<double>(cfg.n_paths, cfg.seed, cfg.workers,
                                     [&](Engine rng, std::size_t) {
                                       auto xs = member.stream(std::move(rng));
                                       auto tr = process.tracker();
                                       double best = process.log_initial();
                                       for (std::size_t t = 1; t <= cfg.horizon && best < top; ++t) {
                                         best = std::max(best, tr(xs()));
                                       }
                                       return best;
                                     });
  VerificationReport report;
  report.config = cfg;
  for (double a : alphas) {
    const double level = -std::log(a);
    std::vector<std::uint8_t> hits(sups.size());
    for (std::size_t i = 0; i < sups.size(); ++i) hits[i] = sups[i] >= level;
    auto est = frequency_estimate(hits, cfg);
    report.rows.push_back({member.label, process.label() + " alpha=" + format_number(a), est, a,
                           violates(est, a)});
  }
  return report;
}

inline VerificationReport ville_check(const EvidenceProcess& process, const FamilyMember& member,
                                      double alpha, const McConfig& cfg) {
  return ville_check(process, member, std::vector<double>{alpha}, cfg);
}

/// Fixed times {1, floor(T/10), T} plus level rules of `process`.
inline std::vector<StoppingRule> standard_eprocess_rules(const EvidenceProcess& process,
                                                         std::size_t horizon,
                                                         const std::vector<double>& levels = {5.0, 20.0}) {
  std::vector<StoppingRule> out{rules::fixed_time(1),
                                rules::fixed_time(std::max<std::size_t>(1, horizon / 10)),
                                rules::fixed_time(horizon)};
  for (double a : levels) out.push_back(level_rule(process, a));
  return out;
}

/// For each member and rule, the mean of E_{tau ^ T}; violated when it
/// exceeds 1 + 3 SE. Every rule sees the same path within a replicate.
/// For nondecreasing processes E_T only lower-bounds E_infinity, so the
/// report adds the terminal mean and a caveat note.
inline VerificationReport eprocess_check(const EvidenceProcess& process,
                                         const std::vector<StoppingRule>& rule_list,
                                         const DistributionFamily& family, const McConfig& cfg) {
  detail::require_paths(cfg);
  if (rule_list.empty()) throw InputError("eprocess_check: no rules");
  const std::size_t n_rules = rule_list.size();
  const bool terminal_row = process.nondecreasing();
  const std::size_t width = n_rules + (terminal_row ? 1 : 0);

  VerificationReport report;
  report.config = cfg;
  for (const auto& member : family.members()) {
    auto stopped = run_replicates<std::vector<double>>(
        cfg.n_paths, cfg.seed, cfg.workers, [&](Engine rng, std::size_t) {
          auto xs = member.stream(std::move(rng));
          auto tr = process.tracker();
          std::vector<StoppingRule::Monitor> monitors;
          monitors.reserve(n_rules);
          for (const auto& r : rule_list) monitors.push_back(r.monitor());
          std::vector<double> value(width, 0.0);
          std::vector<bool> done(n_rules, false);
          std::size_t open = n_rules;
          double v = process.log_initial();
          for (std::size_t t = 1; t <= cfg.horizon && (open > 0 || terminal_row); ++t) {
            const double x = xs();
            v = tr(x);
            for (std::size_t j = 0; j < n_rules; ++j) {
              if (done[j]) continue;
              if (monitors[j](x)) {
                done[j] = true;
                value[j] = std::exp(v);
                --open;
              }
            }
          }
          for (std::size_t j = 0; j < n_rules; ++j) {
            if (!done[j]) value[j] = std::exp(v);
          }
          if (terminal_row) value[n_rules] = std::exp(v);
          return value;
        });
    std::vector<double> column(cfg.n_paths);
    for (std::size_t j = 0; j < width; ++j) {
      for (std::size_t i = 0; i < cfg.n_paths; ++i) column[i] = stopped[i][j];
      auto est = mean_estimate(column, cfg);
      const std::string subject =
          process.label() + " @ " +
          (j < n_rules ? rule_list[j].description() : "terminal(t=" + std::to_string(cfg.horizon) + ")");
      report.rows.push_back({member.label, subject, est, 1.0, violates(est, 1.0)});
    }
  }
  if (terminal_row) {
    report.notes.push_back("process is nondecreasing: E_{tau^T} lower-bounds E_tau for unbounded tau; "
                           "terminal-value mean reported as a caveat, not a proof of validity");
  }
  return report;
}

// Bulk kernels for Rademacher walks. Both consume engine words exactly as
// rademacher_iid() does (bit = 1 means +1, LSB first), so for a given seed
// they see the same paths as the generic harness, and agree with it path by
// path. They skip whole 64-step words when the walk provably cannot reach
// the boundary within the word.

/// Frequency of {exists t <= T: S_t > beta + alpha t}.
inline McEstimate rademacher_line_crossing(double alpha, double beta, const McConfig& cfg) {
  detail::require_paths(cfg);
  const std::size_t horizon = cfg.horizon;
  auto hits = run_replicates<std::uint8_t>(
      cfg.n_paths, cfg.seed, cfg.workers, [&](Engine rng, std::size_t) -> std::uint8_t {
        double s = 0.0;
        std::size_t t = 0;
        while (t < horizon) {
          const std::uint64_t w = rng();
          const std::size_t steps = std::min<std::size_t>(64, horizon - t);
          // Largest possible S_{t+j} - alpha (t+j) over j in 1..steps.
          const double reach = (alpha >= 1.0) ? (1.0 - alpha) : (1.0 - alpha) * static_cast<double>(steps);
          const double head = s - alpha * static_cast<double>(t) + reach;
          const double margin = 1e-9 * (std::abs(beta) + std::abs(s) + alpha * static_cast<double>(t + 64) + 64.0);
          if (steps == 64 && head < beta - margin) {
            s += 2.0 * std::popcount(w) - 64.0;
            t += 64;
            continue;
          }
          std::uint64_t bits = w;
          for (std::size_t j = 0; j < steps; ++j, bits >>= 1) {
            ++t;
            s += (bits & 1u) ? 1.0 : -1.0;
            if (s > beta + alpha * static_cast<double>(t)) return 1;
          }
        }
        return 0;
      });
  return frequency_estimate(hits, cfg);
}

/// Frequencies of {sup_{t <= T} |S_t| / (gamma + t) > eps_j} for each eps_j,
/// from one set of paths.
inline std::vector<McEstimate> rademacher_scaled_sup_crossing(double gamma,
                                                              const std::vector<double>& thresholds,
                                                              const McConfig& cfg) {
  detail::require_paths(cfg);
  if (thresholds.empty()) throw InputError("rademacher_scaled_sup_crossing: no thresholds");
  std::vector<double> sorted = thresholds;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t horizon = cfg.horizon;
  const std::size_t m = sorted.size();
  // Per replicate: how many of the sorted thresholds were exceeded (a prefix).
  auto crossed = run_replicates<std::uint32_t>(
      cfg.n_paths, cfg.seed, cfg.workers, [&](Engine rng, std::size_t) -> std::uint32_t {
        double s = 0.0;
        std::size_t t = 0;
        std::size_t hit = 0;  // sorted[0..hit) crossed
        auto check = [&] {
          const double ratio = std::abs(s) / (gamma + static_cast<double>(t));
          while (hit < m && ratio > sorted[hit]) ++hit;
        };
        while (t < horizon && hit < m) {
          const std::uint64_t w = rng();
          const std::size_t steps = std::min<std::size_t>(64, horizon - t);
          const double bound = (std::abs(s) + 64.0) / (gamma + static_cast<double>(t + 1));
          if (steps == 64 && bound < sorted[hit] * (1.0 - 1e-9)) {
            s += 2.0 * std::popcount(w) - 64.0;
            t += 64;
            continue;
          }
          std::uint64_t bits = w;
          for (std::size_t j = 0; j < steps; ++j, bits >>= 1) {
            ++t;
            s += (bits & 1u) ? 1.0 : -1.0;
            check();
          }
        }
        return static_cast<std::uint32_t>(hit);
      });
  std::vector<McEstimate> out;
  for (double thr : thresholds) {
    const std::size_t rank = static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), thr) - sorted.begin());
    std::vector<std::uint8_t> hits(crossed.size());
    for (std::size_t i = 0; i < crossed.size(); ++i) hits[i] = crossed[i] > rank;
    out.push_back(frequency_estimate(hits, cfg));
  }
  return out;
}

}  // namespace eville
