#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "eville/families.hpp"
#include "eville/linecross.hpp"

namespace {

const eville::TailFunction kZeroTail([](double) { return 0.0; }, eville::TailForm::kClosedForm);

TEST(DubinsSavage, Examples) {
  EXPECT_EQ(eville::dubins_savage_bound(1.0, 1.0), 0.5);
  EXPECT_EQ(eville::dubins_savage_bound(3.0, 1.0), 0.25);
  EXPECT_NEAR(eville::dubins_savage_bound(1e-9, 1.0), 1.0, 1e-8);
  EXPECT_THROW(eville::dubins_savage_bound(0.0, 1.0), eville::InputError);
  EXPECT_THROW(eville::dubins_savage_bound(1.0, -2.0), eville::InputError);
}

TEST(L1Bound, Examples) {
  const auto a = eville::l1_bound(0.5, 1e6, 100.0, 0.0);
  EXPECT_NEAR(a.bound_value, 0.32, 1e-15);
  EXPECT_FALSE(a.vacuous);
  EXPECT_DOUBLE_EQ(a.threshold, 0.5);
  EXPECT_NEAR(eville::l1_bound(0.25, 1e4, 1.0, 0.0).bound_value, 0.0128, 1e-16);
  for (double k : {1.0, 3.0, 17.0}) {
    EXPECT_DOUBLE_EQ(eville::l1_bound(0.2, 500.0, k, 0.0).bound_value, 8.0 * k * k / (500.0 * 0.04));
  }
  const auto r = eville::l1_bound(0.5, 1e6, 2.0, 0.01);
  EXPECT_NEAR(r.bound_value, 32.0 / (1e6 * 0.25) + 66.0 * 0.01, 1e-14);
  EXPECT_DOUBLE_EQ(r.threshold, 0.51);
}

TEST(L1Bound, Preconditions) {
  EXPECT_THROW(eville::l1_bound(0.5, 1e6, 0.9, 0.0), eville::InputError);
  EXPECT_THROW(eville::l1_bound(0.0, 1e6, 1.0, 0.0), eville::InputError);
  EXPECT_THROW(eville::l1_bound(0.5, 0.0, 1.0, 0.0), eville::InputError);
  EXPECT_THROW(eville::l1_bound(0.5, 1.0, 1.0, -0.1), eville::InputError);
}

TEST(L1Bound, VacuousFlag) {
  EXPECT_TRUE(eville::l1_bound(0.1, 10.0, 1.0, 0.0).vacuous);
  EXPECT_TRUE(eville::l1_bound(0.5, 32.0, 1.0, 0.0).vacuous);  // exactly 1
}

TEST(L1Bound, MonotoneInGammaAndEpsilon) {
  const auto tail = *eville::gaussian_iid(0, 1).tail;
  const double k = 2.0;
  for (double eps : {0.05, 0.1, 0.3, 0.9}) {
    double prev = INFINITY;
    for (double gamma : {1.0, 10.0, 1e3, 1e5, 1e8}) {
      const double b = eville::l1_bound(eps, gamma, k, tail(k)).bound_value;
      EXPECT_LE(b, prev);
      prev = b;
    }
  }
  for (double gamma : {10.0, 1e4}) {
    double prev = INFINITY;
    for (double eps : {0.05, 0.1, 0.3, 0.9}) {
      const double b = eville::l1_bound(eps, gamma, k, tail(k)).bound_value;
      EXPECT_LE(b, prev);
      prev = b;
    }
  }
}

TEST(L1BoundAuto, Examples) {
  const auto rad = *eville::rademacher_iid().tail;
  const auto a = eville::l1_bound_auto(0.5, 1e6, rad);
  EXPECT_NEAR(a.bound_value, 0.32, 1e-14);
  EXPECT_DOUBLE_EQ(a.threshold, 1.0);
  EXPECT_NEAR(a.k_cut, 100.0, 1e-12);
  const auto tc = *eville::truncated_cauchy(10.0).tail;
  EXPECT_NEAR(eville::l1_bound_auto(0.5, 1e6, tc).bound_value, 0.32, 1e-14);
}

TEST(L1BoundAuto, RequiresLargerGamma) {
  try {
    eville::l1_bound_auto(0.5, 0.5, kZeroTail);
    FAIL() << "expected an error";
  } catch (const eville::RequiresLargerParameter& e) {
    EXPECT_EQ(e.code(), "REQUIRES-LARGER-GAMMA");
  }
  // Truncated Cauchy with a = 10: r(gamma^{1/3}) > eps until gamma^{1/3} >= 10.
  const auto tc = *eville::truncated_cauchy(10.0).tail;
  EXPECT_THROW(eville::l1_bound_auto(0.5, 8.0, tc), eville::RequiresLargerParameter);
}

TEST(FixedKMeanBound, Examples) {
  const auto rad = *eville::rademacher_iid().tail;
  EXPECT_NEAR(eville::fixed_k_mean_bound(0.5, 1000000000, rad).bound_value, 0.512, 1e-14);
  const auto b6 = eville::fixed_k_mean_bound(0.5, 1000000, rad);
  EXPECT_NEAR(b6.bound_value, 5.12, 1e-13);
  EXPECT_TRUE(b6.vacuous);
  const auto b1 = eville::fixed_k_mean_bound(1.0, 1, rad);
  EXPECT_NEAR(b1.bound_value, 128.0, 1e-12);  // r(1) = 0 for signs
  EXPECT_TRUE(b1.vacuous);
}

TEST(FixedKMeanBound, RequiresLargerK) {
  const auto g = *eville::gaussian_iid(0, 1).tail;
  try {
    eville::fixed_k_mean_bound(0.1, 8, g);  // r(2) = 0.108 > 0.1
    FAIL() << "expected an error";
  } catch (const eville::RequiresLargerParameter& e) {
    EXPECT_EQ(e.code(), "REQUIRES-LARGER-K");
  }
  EXPECT_NO_THROW(eville::fixed_k_mean_bound(0.1, 27, g));
  EXPECT_THROW(eville::fixed_k_mean_bound(0.1, 0, g), eville::InputError);
}

TEST(FixedKMeanBound, MonotoneInK) {
  const auto g = *eville::gaussian_iid(0, 1).tail;
  double prev = INFINITY;
  for (std::uint64_t k : {27ull, 1000ull, 100000ull, 10000000ull, 1000000000000ull}) {
    const double b = eville::fixed_k_mean_bound(0.1, k, g).bound_value;
    EXPECT_LE(b, prev);
    prev = b;
  }
}

TEST(ScaledRelation, MeanBoundedByTwiceScaledSup) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> d(0.3, 2.0);
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> s(201, 0.0);
    for (std::size_t t = 1; t < s.size(); ++t) s[t] = s[t - 1] + d(rng);
    for (std::size_t k : {1, 10, 100}) {
      double sup = 0.0;
      for (std::size_t t = 1; t < s.size(); ++t) {
        sup = std::max(sup, std::abs(s[t]) / static_cast<double>(k + t));
      }
      EXPECT_LE(std::abs(s[k]) / static_cast<double>(k), 2.0 * sup);
    }
  }
}

}  // namespace
