#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "eville/errors.hpp"
#include "eville/evidence.hpp"
#include "eville/families.hpp"
#include "eville/paths.hpp"

namespace eville {

/// First global time k + t (t >= 1) with |mean_{k+t} - mean_k| > 1/n.
/// The t = 0 term of the defining infimum is always 0, so starting at t = 1
/// changes nothing.
inline StoppingRule tau_kn(std::uint64_t k, std::uint64_t n) {
  if (k < 1 || n < 1) throw InputError("tau_kn: k and n must be >= 1");
  const double tol = 1.0 / static_cast<double>(n);
  return StoppingRule("tau(k=" + std::to_string(k) + ",n=" + std::to_string(n) + ")", [k, tol] {
    return StoppingRule::Monitor(
        [k, tol, t = std::uint64_t{0}, s = 0.0, anchor = 0.0](double x) mutable {
          ++t;
          s += x;
          const double mean = s / static_cast<double>(t);
          if (t == k) anchor = mean;
          return t > k && std::abs(mean - anchor) > tol;
        });
  });
}

struct ScheduleEntry {
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

/// (n, k_n) pairs. `certified` means every entry satisfies
///   (4352 n^2 + 4) (k_n^{-1/3} + sup_grid r(k_n^{1/3})) <= 2^{-n}
/// over the grid named by `family_label`, and k_n is strictly increasing.
struct KSchedule {
  std::vector<ScheduleEntry> entries;
  bool certified = false;
  std::string family_label;
};

/// The constant 4352 n^2 + 4 of the false-alarm bound for tau_{k,n}.
inline std::uint64_t slln_constant(std::uint64_t n) { return 4352 * n * n + 4; }

namespace detail {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

/// Largest double q with q^3 <= k.
inline double cbrt_floor(std::uint64_t k) {
  const cpp_int target(k);
  auto cube_le = [&](double q) {
    const cpp_rational r(q);
    return r * r * r <= cpp_rational(target);
  };
  double q = std::cbrt(static_cast<double>(k));
  while (!cube_le(q)) q = std::nextafter(q, 0.0);
  for (;;) {
    const double up = std::nextafter(q, std::numeric_limits<double>::infinity());
    if (!cube_le(up)) break;
    q = up;
  }
  return q;
}

/// Upper bound on a computed double: r exactly 0 stays 0, otherwise nudged
/// up four ulps to cover the evaluation error of the closed form.
inline double round_up(double r) {
  for (int i = 0; i < 4 && r > 0.0; ++i) r = std::nextafter(r, std::numeric_limits<double>::infinity());
  return r;
}

}  // namespace detail

/// Checks the certification display for one entry with every inexact
/// quantity replaced by an upper bound: r is taken at the largest double
/// K <= k^{1/3} and rounded up; the k^{-1/3} term is handled exactly via
///   c (k^{-1/3} + r) <= 2^{-n}  <=>  c r < 2^{-n}  and  k (2^{-n} - c r)^3 >= c^3.
inline bool schedule_display_holds(std::uint64_t n, std::uint64_t k, const DistributionFamily& family) {
  using detail::cpp_int;
  using detail::cpp_rational;
  if (n < 1 || k < 1) throw InputError("schedule_display_holds: n and k must be >= 1");
  const double r_up = detail::round_up(grid_sup_tail(family, detail::cbrt_floor(k)));
  const cpp_rational c(cpp_int(slln_constant(n)));
  const cpp_rational target(cpp_int(1), cpp_int(1) << static_cast<unsigned>(n));
  const cpp_rational slack = target - c * cpp_rational(r_up);
  if (slack <= 0) return false;
  return cpp_rational(cpp_int(k)) * slack * slack * slack >= c * c * c;
}

/// Smallest k_n satisfying the display for n = 1..n_max. Certified by
/// construction; throws UncertifiableError when a member lacks a closed-form
/// tail, and InputError when k_n would not fit in 64 bits.
inline KSchedule k_schedule(const DistributionFamily& family, std::uint64_t n_max) {
  using detail::cpp_int;
  if (n_max < 1) throw InputError("k_schedule: n_max must be >= 1");
  grid_sup_tail(family, 1.0);  // fail early on MC-only tails
  const cpp_int k_limit(std::numeric_limits<std::uint64_t>::max());
  KSchedule out;
  out.certified = true;
  out.family_label = family.label();
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    // With r = 0 the display is k >= (c 2^n)^3, a lower bound on k_n.
    const cpp_int root = cpp_int(slln_constant(n)) << static_cast<unsigned>(n);
    const cpp_int seed = root * root * root;
    if (seed > k_limit) throw InputError("k_schedule: k_" + std::to_string(n) + " exceeds 64 bits");
    std::uint64_t lo = static_cast<std::uint64_t>(seed);  // candidate
    auto holds = [&](std::uint64_t k) { return schedule_display_holds(n, k, family); };
    std::uint64_t k_n = lo;
    if (!holds(lo)) {
      std::uint64_t bad = lo;
      std::uint64_t hi = lo;
      do {
        if (hi > std::numeric_limits<std::uint64_t>::max() / 2) {
          throw InputError("k_schedule: k_" + std::to_string(n) + " exceeds 64 bits");
        }
        bad = hi;
        hi *= 2;
      } while (!holds(hi));
      while (hi - bad > 1) {
        const std::uint64_t mid = bad + (hi - bad) / 2;
        (holds(mid) ? hi : bad) = mid;
      }
      k_n = hi;
    }
    if (!out.entries.empty() && k_n <= out.entries.back().k) out.certified = false;
    out.entries.push_back({n, k_n});
  }
  return out;
}

/// Wraps caller-supplied entries, certifying them against `family` when
/// every member has a closed-form tail; otherwise the flag is false.
inline KSchedule make_schedule(std::vector<ScheduleEntry> entries, const DistributionFamily* family) {
  if (entries.empty()) throw InputError("schedule: no entries");
  for (const auto& e : entries) {
    if (e.n < 1 || e.k < 1) throw InputError("schedule: n and k_n must be >= 1");
  }
  KSchedule out;
  out.entries = std::move(entries);
  out.family_label = family ? family->label() : "none";
  if (!family) return out;
  try {
    bool ok = true;
    for (std::size_t i = 0; i < out.entries.size() && ok; ++i) {
      ok = schedule_display_holds(out.entries[i].n, out.entries[i].k, *family) &&
           (i == 0 || out.entries[i].k > out.entries[i - 1].k);
    }
    out.certified = ok;
  } catch (const UncertifiableError&) {
    out.certified = false;
  }
  return out;
}

struct SllnWitness {
  EvidenceProcess process;
  bool certified;
};

/// E_t = sum_n 1{tau_{k_n, n} <= t}. The e-process guarantee only holds
/// when the schedule is certified; the flag travels with the process.
inline SllnWitness slln_witness(const KSchedule& schedule) {
  if (schedule.entries.empty()) throw InputError("slln_witness: empty schedule");
  std::vector<StoppingRule> rules;
  for (const auto& e : schedule.entries) rules.push_back(tau_kn(e.k, e.n));
  std::string label = schedule.certified ? "slln-witness[certified]" : "slln-witness[uncertified]";
  return {indicator_witness(std::move(rules), std::move(label)), schedule.certified};
}

/// max - min of the running mean over t_burnin <= t <= T. A finite-horizon
/// diagnostic only. `t_burnin` = 0 selects max(1, T/10).
inline double divergence_gap(const SamplePath& path, std::size_t t_burnin = 0) {
  const std::size_t horizon = path.horizon();
  if (t_burnin == 0) t_burnin = std::max<std::size_t>(1, horizon / 10);
  if (horizon < 2 * t_burnin) throw InputError("divergence_gap: horizon shorter than 2 * burn-in");
  double lo = path.mean(t_burnin);
  double hi = lo;
  for (std::size_t t = t_burnin + 1; t <= horizon; ++t) {
    lo = std::min(lo, path.mean(t));
    hi = std::max(hi, path.mean(t));
  }
  return hi - lo;
}

}  // namespace eville
