#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "eville/families.hpp"
#include "eville/slln.hpp"

namespace {

using eville::HitTime;
using eville::SamplePath;

/// +1 x 1, -1 x r, +1 x r^2, ... truncated to T.
std::vector<double> block_path(std::size_t ratio, std::size_t horizon) {
  std::vector<double> xs;
  double sign = 1.0;
  for (std::size_t len = 1; xs.size() < horizon; len *= ratio, sign = -sign) {
    for (std::size_t i = 0; i < len && xs.size() < horizon; ++i) xs.push_back(sign);
  }
  return xs;
}

/// First t > k with |mean_t - mean_k| > 1/n, from an explicit running-mean table.
HitTime tau_by_table(const std::vector<double>& xs, std::size_t k, std::size_t n) {
  std::vector<double> mean(xs.size() + 1, 0.0);
  double s = 0.0;
  for (std::size_t t = 1; t <= xs.size(); ++t) {
    s += xs[t - 1];
    mean[t] = s / static_cast<double>(t);
  }
  for (std::size_t t = k + 1; t <= xs.size(); ++t) {
    if (std::abs(mean[t] - mean[k]) > 1.0 / static_cast<double>(n)) return HitTime::at(t);
  }
  return HitTime::not_hit();
}

TEST(TauKn, Examples) {
  EXPECT_EQ(eville::hit_time(eville::tau_kn(1, 10), SamplePath({0.0, 1.0})), HitTime::at(2));
  EXPECT_EQ(eville::hit_time(eville::tau_kn(3, 1), SamplePath(std::vector<double>(500, 2.5))),
            HitTime::not_hit());
  // Mean 1 at k = 2; must fall below 0 to deviate by more than 1.
  const std::vector<double> down{1, 1, -1, -1, -1, -1, -1, -1};
  EXPECT_EQ(eville::hit_time(eville::tau_kn(2, 1), SamplePath(down)), HitTime::at(5));
  EXPECT_EQ(tau_by_table(down, 2, 1), HitTime::at(5));
  std::vector<double> periodic;
  for (int i = 0; i < 50; ++i) periodic.insert(periodic.end(), {1, 1, -1, -1});
  EXPECT_EQ(eville::hit_time(eville::tau_kn(2, 1), SamplePath(periodic)),
            tau_by_table(periodic, 2, 1));
}

TEST(TauKn, AgreesWithRunningMeanTable) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<double> xs(200);
    for (auto& x : xs) x = d(rng);
    for (std::size_t k : {1, 5, 40}) {
      for (std::size_t n : {1, 3, 10}) {
        EXPECT_EQ(eville::hit_time(eville::tau_kn(k, n), SamplePath(xs)), tau_by_table(xs, k, n));
      }
    }
  }
}

TEST(TauKn, NeverStopsAtOrBeforeK) {
  std::vector<double> xs{100, -100, 100, -100, 100};
  EXPECT_EQ(eville::hit_time(eville::tau_kn(4, 1), SamplePath(xs)), HitTime::at(5));
  EXPECT_THROW(eville::tau_kn(0, 1), eville::InputError);
}

// Independent inversion with r = 0: the display reads c 2^n <= k^{1/3}, so
// k_n = (c 2^n)^3 with c = 4352 n^2 + 4.
unsigned __int128 k_when_tail_vanishes(unsigned n) {
  const unsigned __int128 root = (4352u * n * n + 4u) << n;
  return root * root * root;
}

TEST(KSchedule, RademacherValues) {
  const auto s = eville::k_schedule(eville::DistributionFamily("rademacher", {eville::rademacher_iid()}), 3);
  ASSERT_EQ(s.entries.size(), 3u);
  EXPECT_TRUE(s.certified);
  EXPECT_EQ(s.family_label, "rademacher");
  EXPECT_EQ(s.entries[0].k, 661231600128ull);
  EXPECT_EQ(s.entries[0].k, 8712ull * 8712ull * 8712ull);
  EXPECT_EQ(s.entries[1].k, 69648ull * 69648ull * 69648ull);
  EXPECT_EQ(69648u, 4u * 17412u);
  for (unsigned n = 1; n <= 3; ++n) {
    EXPECT_EQ(s.entries[n - 1].n, n);
    EXPECT_EQ(s.entries[n - 1].k, static_cast<std::uint64_t>(k_when_tail_vanishes(n)));
    const double growth = std::pow(static_cast<double>(n), 6) * std::ldexp(1.0, 3 * n);
    EXPECT_GE(static_cast<double>(s.entries[n - 1].k) / growth, 1e6);
  }
}

TEST(KSchedule, BoundaryIsSharp) {
  const eville::DistributionFamily rad("rademacher", {eville::rademacher_iid()});
  for (std::uint64_t n = 1; n <= 3; ++n) {
    const auto k = static_cast<std::uint64_t>(k_when_tail_vanishes(static_cast<unsigned>(n)));
    EXPECT_TRUE(eville::schedule_display_holds(n, k, rad));
    EXPECT_FALSE(eville::schedule_display_holds(n, k - 1, rad));
  }
}

TEST(KSchedule, TailDrivenBoundary) {
  // r vanishes only once k^{1/3} reaches the largest clamp level.
  const auto grid = eville::truncated_cauchy_family({10.0, 50000.0});
  const auto s = eville::k_schedule(grid, 1);
  EXPECT_EQ(s.entries[0].k, 125000000000000ull);
  EXPECT_TRUE(s.certified);
}

TEST(KSchedule, Errors) {
  const eville::DistributionFamily rad("rademacher", {eville::rademacher_iid()});
  EXPECT_THROW(eville::k_schedule(rad, 5), eville::InputError);  // exceeds 64 bits
  EXPECT_NO_THROW(eville::k_schedule(rad, 4));
  const eville::DistributionFamily cauchy("cauchy", {eville::cauchy_iid()});
  EXPECT_THROW(eville::k_schedule(cauchy, 1), eville::UncertifiableError);
}

TEST(MakeSchedule, CertifiesOnlyValidEntries) {
  const eville::DistributionFamily rad("rademacher", {eville::rademacher_iid()});
  const auto good = eville::make_schedule({{1, 661231600128ull}}, &rad);
  EXPECT_TRUE(good.certified);
  const auto bad = eville::make_schedule({{1, 661231600127ull}}, &rad);
  EXPECT_FALSE(bad.certified);
  const auto toy = eville::make_schedule({{1, 1}, {2, 2}, {3, 4}}, nullptr);
  EXPECT_FALSE(toy.certified);
  const eville::DistributionFamily cauchy("cauchy", {eville::cauchy_iid()});
  EXPECT_FALSE(eville::make_schedule({{1, 661231600128ull}}, &cauchy).certified);
  EXPECT_THROW(eville::make_schedule({}, nullptr), eville::InputError);
}

const std::vector<eville::ScheduleEntry> kToy{{1, 1}, {2, 2}, {3, 4}};

TEST(Witness, ToyScheduleOnBlockPaths) {
  const auto w = eville::slln_witness(eville::make_schedule(kToy, nullptr));
  EXPECT_FALSE(w.certified);
  // Doubling blocks: after t = 2 the running mean stays within [-3/7, 1/3],
  // so the n = 2 rule (anchor X_2 = 0) never moves by more than 1/2.
  EXPECT_DOUBLE_EQ(w.process.eval(block_path(2, 10000)), 2.0);
  // Tripling blocks swing the running mean through roughly +-1/2 and fire all three.
  EXPECT_DOUBLE_EQ(w.process.eval(block_path(3, 10000)), 3.0);
}

TEST(Witness, ConstantAndConvergentPaths) {
  const auto w = eville::slln_witness(eville::make_schedule(kToy, nullptr));
  const auto flat = w.process.log_trajectory(std::vector<double>(1000, 0.7));
  EXPECT_TRUE(std::all_of(flat.begin(), flat.end(), [](double v) { return v == eville::kNegInf; }));
  std::vector<double> conv(10000);
  for (std::size_t t = 1; t <= conv.size(); ++t) conv[t - 1] = 0.4 + 1.0 / static_cast<double>(t);
  const auto traj = w.process.log_trajectory(conv);
  std::size_t last_change = 0;
  for (std::size_t t = 1; t < traj.size(); ++t) {
    if (traj[t] != traj[t - 1]) last_change = t;
  }
  EXPECT_LT(last_change, 100u);
}

TEST(Witness, SingleEntryIsIndicator) {
  const auto w = eville::slln_witness(eville::make_schedule({{1, 3}}, nullptr));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> d;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> xs(50);
    for (auto& x : xs) x = d(rng);
    for (double v : w.process.log_trajectory(xs)) EXPECT_TRUE(v == eville::kNegInf || v == 0.0);
  }
}

/// max - min of the running mean over k <= t <= T.
double post_k_range(const std::vector<double>& xs, std::size_t k) {
  SamplePath p(xs);
  double lo = p.mean(k);
  double hi = lo;
  for (std::size_t t = k; t <= p.horizon(); ++t) {
    lo = std::min(lo, p.mean(t));
    hi = std::max(hi, p.mean(t));
  }
  return hi - lo;
}

TEST(Coverage, UnfiredRuleConfinesRunningMean) {
  std::mt19937_64 rng(12);
  std::student_t_distribution<double> heavy(1.5);
  std::vector<std::vector<double>> paths;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> xs(300);
    for (auto& x : xs) x = heavy(rng);
    paths.push_back(std::move(xs));
  }
  for (std::size_t r : {2, 3, 5}) paths.push_back(block_path(r, 300));
  paths.push_back(std::vector<double>(300, 1.0));
  std::vector<double> hug(300);  // oscillates just inside the band
  for (std::size_t t = 0; t < hug.size(); ++t) hug[t] = (t % 2 ? -0.999 : 0.999);
  paths.push_back(hug);
  std::vector<double> spike(300, 0.0);
  spike[150] = 1e6;
  paths.push_back(spike);
  std::vector<double> ramp(300);
  for (std::size_t t = 0; t < ramp.size(); ++t) ramp[t] = static_cast<double>(t) * 1e-3;
  paths.push_back(ramp);
  for (std::size_t t = 0; t < 300; ++t) hug[t] = std::sin(0.05 * t);
  paths.push_back(hug);
  paths.push_back(block_path(7, 300));
  std::vector<double> lopsided(300);
  for (std::size_t t = 0; t < lopsided.size(); ++t) lopsided[t] = t % 3 == 0 ? 10.0 : -5.0;
  paths.push_back(lopsided);
  ASSERT_EQ(paths.size(), 1010u);

  std::size_t unfired = 0;
  for (const auto& xs : paths) {
    for (std::size_t k : {1, 10, 50}) {
      for (std::size_t n : {1, 2, 5, 20}) {
        if (eville::hit_time(eville::tau_kn(k, n), SamplePath(xs)).hit()) continue;
        ++unfired;
        EXPECT_LE(post_k_range(xs, k), 2.0 / static_cast<double>(n));
      }
    }
  }
  EXPECT_GT(unfired, 100u);
}

TEST(DivergenceGap, Examples) {
  EXPECT_EQ(eville::divergence_gap(SamplePath(std::vector<double>(100, 3.0))), 0.0);
  // Running mean 1 at t = 10 and -1 at t = 20 for this shape.
  std::vector<double> xs(20, 1.0);
  for (std::size_t t = 10; t < 20; ++t) xs[t] = -3.0;
  EXPECT_DOUBLE_EQ(eville::divergence_gap(SamplePath(xs), 10), 2.0);
  EXPECT_THROW(eville::divergence_gap(SamplePath(xs), 11), eville::InputError);
}

TEST(DivergenceGap, ShrinksForIidGaussian) {
  double small = 0.0;
  double large = 0.0;
  const int reps = 50;
  for (int rep = 0; rep < reps; ++rep) {
    small += eville::divergence_gap(eville::gaussian_iid(0, 1).sample(1000, eville::substream(3, rep)));
    large += eville::divergence_gap(eville::gaussian_iid(0, 1).sample(100000, eville::substream(3, rep)));
  }
  EXPECT_LT(large, small);
}

}  // namespace
