#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "eville/errors.hpp"
#include "eville/format.hpp"
#include "eville/numeric.hpp"
#include "eville/paths.hpp"
#include "eville/rng.hpp"

namespace eville {

enum class TailForm { kClosedForm, kMonteCarlo };

/// r(K) = E[|X_1 - E X_1| 1{|X_1 - E X_1| > K}], the centered tail function.
class TailFunction {
 public:
  TailFunction(std::function<double(double)> eval, TailForm form)
      : eval_(std::move(eval)), form_(form) {}
  double operator()(double k) const { return eval_(k); }
  TailForm form() const { return form_; }

 private:
  std::function<double(double)> eval_;
  TailForm form_;
};

/// One law P in the family. The sampler turns an engine (one substream)
/// into an online stream x_1, x_2, ...; the same engine always yields the
/// same stream.
struct FamilyMember {
  using Stream = std::function<double()>;
  using Sampler = std::function<Stream(Engine)>;

  std::string label;
  Sampler sampler;
  std::optional<double> mean;
  std::optional<double> sigma_sub_gaussian;
  std::optional<TailFunction> tail;

  Stream stream(Engine rng) const {
    if (!sampler) throw InputError("member '" + label + "' has no sampler");
    return sampler(std::move(rng));
  }

  SamplePath sample(std::size_t horizon, Engine rng) const {
    if (horizon == 0) throw InputError("sample: horizon must be positive");
    auto s = stream(std::move(rng));
    std::vector<double> xs(horizon);
    for (auto& x : xs) x = s();
    return SamplePath(std::move(xs));
  }
};

/// A finite grid standing in for the family; suprema over it are grid-suprema.
class DistributionFamily {
 public:
  DistributionFamily(std::string label, std::vector<FamilyMember> members)
      : label_(std::move(label)), members_(std::move(members)) {
    if (members_.empty()) throw InputError("family '" + label_ + "' is empty");
    std::set<std::string> seen;
    for (const auto& m : members_) {
      if (!seen.insert(m.label).second) {
        throw InputError("family '" + label_ + "': duplicate member label '" + m.label + "'");
      }
    }
  }

  const std::string& label() const { return label_; }
  const std::vector<FamilyMember>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }

 private:
  std::string label_;
  std::vector<FamilyMember> members_;
};

namespace detail {

/// Consumes 64-bit engine words one bit at a time, least significant first.
class BitSource {
 public:
  explicit BitSource(Engine rng) : rng_(std::move(rng)) {}
  bool next() {
    if (left_ == 0) {
      word_ = rng_();
      left_ = 64;
    }
    const bool b = word_ & 1u;
    word_ >>= 1;
    --left_;
    return b;
  }

 private:
  Engine rng_;
  std::uint64_t word_ = 0;
  int left_ = 0;
};

inline double cauchy_draw(Engine& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return std::tan(std::numbers::pi * (unif(rng) - 0.5));
}

}  // namespace detail

/// i.i.d. N(mu, sigma^2).
inline FamilyMember gaussian_iid(double mu, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu)) {
    throw InputError("gaussian_iid: need finite mu and sigma > 0");
  }
  FamilyMember m;
  m.label = "gaussian(mu=" + format_number(mu) + ",sigma=" + format_number(sigma) + ")";
  m.sampler = [mu, sigma](Engine rng) {
    return FamilyMember::Stream(
        [rng = std::move(rng), dist = std::normal_distribution<double>(mu, sigma)]() mutable {
          return dist(rng);
        });
  };
  m.mean = mu;
  m.sigma_sub_gaussian = sigma;
  // E|Z| 1{|Z| > K} = 2 sigma phi(K / sigma) for Z ~ N(0, sigma^2).
  m.tail = TailFunction([sigma](double k) { return 2.0 * sigma * normal_pdf(k / sigma); },
                        TailForm::kClosedForm);
  return m;
}

/// i.i.d. fair signs. Bits come from whole engine words, LSB first, which
/// the bulk random-walk kernels reproduce exactly.
inline FamilyMember rademacher_iid() {
  FamilyMember m;
  m.label = "rademacher";
  m.sampler = [](Engine rng) {
    return FamilyMember::Stream([bits = detail::BitSource(std::move(rng))]() mutable {
      return bits.next() ? 1.0 : -1.0;
    });
  };
  m.mean = 0.0;
  m.sigma_sub_gaussian = 1.0;
  m.tail = TailFunction([](double k) { return k < 1.0 ? 1.0 : 0.0; }, TailForm::kClosedForm);
  return m;
}

/// i.i.d. standard Cauchy via inverse CDF. No mean, no tail function.
inline FamilyMember cauchy_iid() {
  FamilyMember m;
  m.label = "cauchy";
  m.sampler = [](Engine rng) {
    return FamilyMember::Stream(
        [rng = std::move(rng)]() mutable { return detail::cauchy_draw(rng); });
  };
  return m;
}

/// Closed-form centered tail of the Cauchy law clamped to [-a, a].
inline double truncated_cauchy_tail(double a, double k) {
  if (k >= a) return 0.0;
  const double inner = std::log((1.0 + a * a) / (1.0 + k * k)) / std::numbers::pi;
  const double atoms = a * (1.0 - 2.0 / std::numbers::pi * std::atan(a));
  return inner + atoms;
}

/// Standard Cauchy clamped to [-a, a], atoms at +-a. Uses the same draws as
/// `cauchy_iid`, so the two paths coincide while all draws lie in (-a, a).
inline FamilyMember truncated_cauchy(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw InputError("truncated_cauchy: a must be > 0");
  FamilyMember m;
  m.label = "truncated-cauchy(a=" + format_number(a) + ")";
  m.sampler = [a](Engine rng) {
    return FamilyMember::Stream([rng = std::move(rng), a]() mutable {
      return std::clamp(detail::cauchy_draw(rng), -a, a);
    });
  };
  m.mean = 0.0;
  m.tail = TailFunction([a](double k) { return truncated_cauchy_tail(a, k); },
                        TailForm::kClosedForm);
  return m;
}

inline DistributionFamily truncated_cauchy_family(const std::vector<double>& a_grid) {
  if (a_grid.empty()) throw InputError("truncated_cauchy_family: empty grid");
  std::vector<FamilyMember> members;
  std::string label = "truncated-cauchy-grid(a=";
  for (std::size_t i = 0; i < a_grid.size(); ++i) {
    members.push_back(truncated_cauchy(a_grid[i]));
    if (i) label += ',';
    label += format_number(a_grid[i]);
  }
  return DistributionFamily(label + ")", std::move(members));
}

/// With probability 1/2 all zeros; otherwise n zeros, a one, then zeros.
inline FamilyMember binary_pn(std::size_t n) {
  FamilyMember m;
  m.label = "binary-pn(n=" + std::to_string(n) + ")";
  m.sampler = [n](Engine rng) {
    const bool with_one = std::bernoulli_distribution(0.5)(rng);
    return FamilyMember::Stream([n, with_one, t = std::size_t{0}]() mutable {
      ++t;
      return (with_one && t == n + 1) ? 1.0 : 0.0;
    });
  };
  return m;
}

/// Two-coin law P_i: X_1 fair; later flips independent with success 1/2 on
/// one branch and 2^{-t} on the other (P_1: fair iff X_1 = 1; P_2: fair iff X_1 = 0).
inline FamilyMember two_coin(int i) {
  if (i != 1 && i != 2) throw InputError("two_coin: i must be 1 or 2");
  FamilyMember m;
  m.label = "two-coin(i=" + std::to_string(i) + ")";
  m.sampler = [i](Engine rng) {
    return FamilyMember::Stream(
        [i, rng = std::move(rng), t = 0, fair = false]() mutable {
          std::uniform_real_distribution<double> unif(0.0, 1.0);
          ++t;
          if (t == 1) {
            const bool one = unif(rng) < 0.5;
            fair = (i == 1) == one;
            return one ? 1.0 : 0.0;
          }
          const double p = fair ? 0.5 : std::ldexp(1.0, -t);
          return unif(rng) < p ? 1.0 : 0.0;
        });
  };
  return m;
}

/// Gaussian noise around the predictable drift -d, +d, -d, +d, ...: running
/// sums of conditional means stay in {-d, 0}, so the law has nonpositive
/// running mean without having nonpositive means.
inline FamilyMember alternating_drift(double d) {
  if (!(d >= 0.0) || !std::isfinite(d)) throw InputError("alternating_drift: d must be >= 0");
  FamilyMember m;
  m.label = "alternating-drift(d=" + format_number(d) + ")";
  m.sampler = [d](Engine rng) {
    return FamilyMember::Stream([d, rng = std::move(rng), dist = std::normal_distribution<double>(),
                                 odd = false]() mutable {
      odd = !odd;
      return (odd ? -d : d) + dist(rng);
    });
  };
  m.sigma_sub_gaussian = 1.0;
  return m;
}

struct TailValue {
  double value;
  double std_error;
  TailForm form;
};

/// r(K) for one member: the closed form when declared, otherwise a Monte
/// Carlo estimate over `n_mc` independent first draws.
inline TailValue tail_r(const FamilyMember& member, double k, std::size_t n_mc,
                        std::uint64_t seed) {
  if (!(k >= 0.0)) throw InputError("tail_r: K must be >= 0");
  if (member.tail && member.tail->form() == TailForm::kClosedForm) {
    return {(*member.tail)(k), 0.0, TailForm::kClosedForm};
  }
  if (!member.sampler) throw InputError("tail_r: member '" + member.label + "' has no sampler");
  if (n_mc < 2) throw InputError("tail_r: need n_mc >= 2");
  const double center = member.mean.value_or(0.0);
  CompensatedSum sum;
  CompensatedSum sum_sq;
  for (std::size_t i = 0; i < n_mc; ++i) {
    const double z = std::abs(member.stream(substream(seed, i))() - center);
    const double v = z > k ? z : 0.0;
    sum.add(v);
    sum_sq.add(v * v);
  }
  const double n = static_cast<double>(n_mc);
  const double mean = sum.value() / n;
  const double var = std::max(0.0, (sum_sq.value() - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n), TailForm::kMonteCarlo};
}

/// max over members of the closed-form r(K); throws if any member lacks one.
inline double grid_sup_tail(const DistributionFamily& family, double k) {
  double best = 0.0;
  for (const auto& m : family.members()) {
    if (!m.tail || m.tail->form() != TailForm::kClosedForm) {
      throw UncertifiableError("member '" + m.label + "' has no closed-form tail function");
    }
    best = std::max(best, (*m.tail)(k));
  }
  return best;
}

}  // namespace eville
