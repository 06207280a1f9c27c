#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

namespace eville {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without overflow; -inf acts as the additive zero.
inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

/// log(sum_i exp(x_i)); -inf for an empty span or all -inf terms.
inline double log_sum_exp(std::span<const double> xs) {
  double hi = kNegInf;
  for (double x : xs) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

/// Neumaier-compensated running sum. Adding the same values in the same
/// order always gives the same bits.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Standard Gaussian CDF, absolute error well below 1e-12.
inline double normal_cdf(double z) {
  const double u = z / std::numbers::sqrt2;
  return z < 0.0 ? 0.5 * std::erfc(-u) : 1.0 - 0.5 * std::erfc(u);
}

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// Below this point log_normal_cdf switches to the asymptotic expansion.
inline constexpr double kLogCdfAsymptoticSwitch = -8.0;

/// log Phi(z). For z <= -8 uses
///   log Phi(z) = -z^2/2 - log(-z) - log(2 pi)/2 + log(sum_k (-1)^k (2k-1)!! z^{-2k}),
/// truncated after 24 terms (first omitted term < 1e-14 relative at z = -8).
inline double log_normal_cdf(double z) {
  if (z <= kLogCdfAsymptoticSwitch) {
    const double inv_z2 = 1.0 / (z * z);
    double term = 1.0;
    double series = 1.0;
    for (int k = 1; k <= 24; ++k) {
      term *= -(2.0 * k - 1.0) * inv_z2;
      series += term;
    }
    return -0.5 * z * z - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) +
           std::log(series);
  }
  const double u = z / std::numbers::sqrt2;
  if (z < 0.0) return std::log(0.5 * std::erfc(-u));
  return std::log1p(-0.5 * std::erfc(u));
}

}  // namespace eville
