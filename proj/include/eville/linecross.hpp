#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "eville/errors.hpp"
#include "eville/families.hpp"
#include "eville/format.hpp"

namespace eville {

/// Right-hand side of a line-crossing bound plus the inputs it came from.
/// For the fixed-k mean bound `gamma` holds k and `threshold` the event level eps.
struct BoundReport {
  double bound_value = 0.0;
  double epsilon = 0.0;
  double gamma = 0.0;
  double k_cut = 0.0;   // truncation level K
  double r_of_k = 0.0;  // r(K)
  double threshold = 0.0;
  bool vacuous = false;
};

namespace detail {
inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InputError(std::string(what) + " must be positive and finite");
  }
}
inline BoundReport finish(BoundReport r) {
  r.vacuous = r.bound_value >= 1.0;
  return r;
}
}  // namespace detail

/// Dubins-Savage: P(exists t: sum Y_s > beta + alpha K^2 t) <= 1 / (1 + alpha beta)
/// for centered increments with variance at most K^2.
inline double dubins_savage_bound(double alpha, double beta) {
  detail::require_positive(alpha, "alpha");
  detail::require_positive(beta, "beta");
  return 1.0 / (1.0 + alpha * beta);
}

/// L1 line-crossing bound for i.i.d. centered increments:
///   P(sup_t |S_t| / (gamma + t) > eps + r(K)) <= 8K^2/(gamma eps^2) + (16/eps^2 + 2) r(K),
/// valid for K >= 1.
inline BoundReport l1_bound(double epsilon, double gamma, double k_cut, double r_of_k) {
  detail::require_positive(epsilon, "epsilon");
  detail::require_positive(gamma, "gamma");
  if (!(k_cut >= 1.0) || !std::isfinite(k_cut)) throw InputError("K must be >= 1");
  if (!(r_of_k >= 0.0) || !std::isfinite(r_of_k)) throw InputError("r(K) must be >= 0");
  const double e2 = epsilon * epsilon;
  BoundReport r;
  r.bound_value = 8.0 * k_cut * k_cut / (gamma * e2) + (16.0 / e2 + 2.0) * r_of_k;
  r.epsilon = epsilon;
  r.gamma = gamma;
  r.k_cut = k_cut;
  r.r_of_k = r_of_k;
  r.threshold = epsilon + r_of_k;
  return detail::finish(r);
}

/// The same bound with K = gamma^{1/3}, for the event threshold 2 eps:
///   8/eps^2 gamma^{-1/3} + (16/eps^2 + 2) r(gamma^{1/3}),
/// applicable when gamma^{1/3} >= 1 and r(gamma^{1/3}) <= eps.
inline BoundReport l1_bound_auto(double epsilon, double gamma, const TailFunction& r) {
  detail::require_positive(epsilon, "epsilon");
  detail::require_positive(gamma, "gamma");
  const double k_cut = std::cbrt(gamma);
  if (k_cut < 1.0) {
    throw RequiresLargerParameter("REQUIRES-LARGER-GAMMA",
                                  "gamma^(1/3) = " + format_number(k_cut) + " < 1");
  }
  const double rk = r(k_cut);
  if (rk > epsilon) {
    throw RequiresLargerParameter("REQUIRES-LARGER-GAMMA", "r(gamma^(1/3)) = " + format_number(rk) +
                                                               " > eps = " + format_number(epsilon));
  }
  const double e2 = epsilon * epsilon;
  BoundReport out;
  out.bound_value = 8.0 / e2 / k_cut + (16.0 / e2 + 2.0) * rk;
  out.epsilon = epsilon;
  out.gamma = gamma;
  out.k_cut = k_cut;
  out.r_of_k = rk;
  out.threshold = 2.0 * epsilon;
  return detail::finish(out);
}

/// P(|S_k| / k > eps) <= 128/eps^2 k^{-1/3} + (256/eps^2 + 2) r(k^{1/3}),
/// applicable when r(k^{1/3}) <= eps.
inline BoundReport fixed_k_mean_bound(double epsilon, std::uint64_t k, const TailFunction& r) {
  detail::require_positive(epsilon, "epsilon");
  if (k == 0) throw InputError("k must be >= 1");
  const double k_cut = std::cbrt(static_cast<double>(k));
  const double rk = r(k_cut);
  if (rk > epsilon) {
    throw RequiresLargerParameter("REQUIRES-LARGER-K", "r(k^(1/3)) = " + format_number(rk) +
                                                           " > eps = " + format_number(epsilon));
  }
  const double e2 = epsilon * epsilon;
  BoundReport out;
  out.bound_value = 128.0 / e2 / k_cut + (256.0 / e2 + 2.0) * rk;
  out.epsilon = epsilon;
  out.gamma = static_cast<double>(k);
  out.k_cut = k_cut;
  out.r_of_k = rk;
  out.threshold = epsilon;
  return detail::finish(out);
}

}  // namespace eville
