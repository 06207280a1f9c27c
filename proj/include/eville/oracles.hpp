#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "eville/errors.hpp"
#include "eville/estimate.hpp"

namespace eville {

/// An exactly computed probability with a rigorous truncation allowance.
struct ExactProbability {
  double value = 0.0;
  double error_bound = 0.0;
  std::string method;
};

/// P_n(stop) for "stop at time m iff the first m symbols are zero" under the
/// binary law P_n: the all-zeros atom always stops, the other atom stops iff
/// its one comes after time m.
inline ExactProbability binary_pn_stop_prob(std::size_t m, std::size_t n) {
  if (m < 1) throw InputError("binary_pn_stop_prob: m must be >= 1");
  return {n >= m ? 1.0 : 0.5, 0.0, "atoms"};
}

/// P_n(first-one rule stops) = 1/2: only the atom carrying a one stops.
inline ExactProbability binary_first_one_prob(std::size_t /*n*/) {
  return {0.5, 0.0, "atoms"};
}

/// P(at least `need` successes) for independent Bernoulli(p_j), by dynamic
/// programming over the success count with an absorbing state at `need`.
inline double at_least_successes(const std::vector<double>& p, std::size_t need) {
  if (need == 0) return 1.0;
  std::vector<double> dist(need, 0.0);  // dist[j] = P(count == j), j < need
  dist[0] = 1.0;
  double absorbed = 0.0;
  for (double pj : p) {
    absorbed += dist[need - 1] * pj;
    for (std::size_t j = need - 1; j > 0; --j) dist[j] = dist[j] * (1.0 - pj) + dist[j - 1] * pj;
    dist[0] *= 1.0 - pj;
  }
  return absorbed;
}

/// P_i(tau_n <= t_trunc), tau_n the time of the n-th one under the two-coin
/// law P_i. The fair branch fires almost surely; on the decaying branch the
/// flips t = 2..t_trunc are Bernoulli(2^{-t}). Under P_2 the decaying branch
/// starts with X_1 = 1, so it needs only n - 1 further ones. The remaining
/// flips succeed with total probability sum_{t > t_trunc} 2^{-t} = 2^{-t_trunc},
/// which bounds the truncation effect.
inline ExactProbability two_coin_tau_n_prob(int i, std::size_t n, std::size_t t_trunc) {
  if (i != 1 && i != 2) throw InputError("two_coin_tau_n_prob: i must be 1 or 2");
  if (n < 1) throw InputError("two_coin_tau_n_prob: n must be >= 1");
  if (t_trunc < n + 1) throw InputError("two_coin_tau_n_prob: t_trunc must be >= n + 1");
  std::vector<double> p;
  for (std::size_t t = 2; t <= t_trunc; ++t) p.push_back(std::ldexp(1.0, -static_cast<int>(t)));
  const std::size_t need = i == 1 ? n : n - 1;
  const double decaying = at_least_successes(p, need);
  return {0.5 + 0.5 * decaying, std::ldexp(1.0, -static_cast<int>(t_trunc)), "dp"};
}

struct CrosscheckReport {
  bool pass = false;
  double difference = 0.0;  // |exact - estimate|
  double allowance = 0.0;   // error_bound + 3 SE
};

/// Pass iff |exact - estimate| <= exact.error_bound + 3 SE.
inline CrosscheckReport mc_crosscheck(const ExactProbability& exact, const McEstimate& estimate) {
  CrosscheckReport r;
  r.difference = std::abs(exact.value - estimate.value);
  r.allowance = exact.error_bound + 3.0 * estimate.std_error;
  r.pass = r.difference <= r.allowance;
  return r;
}

}  // namespace eville
