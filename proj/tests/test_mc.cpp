#include <cmath>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "eville/evidence.hpp"
#include "eville/mc.hpp"

namespace {

using eville::McConfig;
namespace rules = eville::rules;

McConfig config(std::size_t horizon, std::size_t n_paths, unsigned workers = 1, std::uint64_t seed = 271828) {
  McConfig c;
  c.horizon = horizon;
  c.n_paths = n_paths;
  c.workers = workers;
  c.seed = seed;
  return c;
}

TEST(RunReplicates, IndexOrderedAndWorkerIndependent) {
  auto fn = [](eville::Engine rng, std::size_t i) { return static_cast<double>(rng() % 1000) + i; };
  const auto a = eville::run_replicates<double>(1000, 5, 1, fn);
  const auto b = eville::run_replicates<double>(1000, 5, 8, fn);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[3], static_cast<double>(eville::substream(5, 3)() % 1000) + 3);
}

TEST(RunReplicates, Errors) {
  auto ok = [](eville::Engine, std::size_t) { return 0; };
  EXPECT_THROW(eville::run_replicates<int>(0, 1, 1, ok), eville::InputError);
  auto boom = [](eville::Engine, std::size_t i) -> int {
    if (i == 517) throw std::runtime_error("bad replicate");
    return 0;
  };
  EXPECT_THROW(eville::run_replicates<int>(1000, 1, 4, boom), eville::JobError);
  auto bad_input = [](eville::Engine, std::size_t) -> int { throw eville::InputError("no"); };
  EXPECT_THROW(eville::run_replicates<int>(10, 1, 2, bad_input), eville::InputError);
}

TEST(EstimateStopProb, TrivialRules) {
  const auto cfg = config(50, 200);
  const auto g = eville::gaussian_iid(0, 1);
  EXPECT_EQ(eville::estimate_stop_prob(g, rules::never(), cfg).value, 0.0);
  const auto one = eville::estimate_stop_prob(g, rules::fixed_time(1), cfg);
  EXPECT_EQ(one.value, 1.0);
  EXPECT_EQ(one.std_error, 0.0);
  EXPECT_EQ(one.kind, eville::EstimateKind::kCrossingFreq);
  EXPECT_THROW(eville::estimate_stop_prob(g, rules::never(), config(50, 99)), eville::InputError);
}

TEST(EstimateStopProb, BitwiseDeterministicAcrossWorkers) {
  const auto member = eville::gaussian_iid(0, 1);
  const auto rule = rules::mean_exceeds(0.3, 5);
  const auto a = eville::estimate_stop_prob(member, rule, config(200, 3000, 1));
  const auto b = eville::estimate_stop_prob(member, rule, config(200, 3000, 8));
  const auto c = eville::estimate_stop_prob(member, rule, config(200, 3000, 3));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(EstimateStopProb, StdErrorFollowsRootN) {
  const auto member = eville::rademacher_iid();
  const auto rule = rules::line_crossing(0.1, 3.0);
  const auto small = eville::estimate_stop_prob(member, rule, config(200, 5000, 0, 1));
  const auto big = eville::estimate_stop_prob(member, rule, config(200, 10000, 0, 2));
  const double ratio = (small.std_error * small.std_error) / (big.std_error * big.std_error);
  EXPECT_NEAR(ratio, 2.0, 0.4);
}

TEST(Kernels, LineCrossingAgreesPathByPath) {
  for (auto [alpha, beta] : {std::pair{1.0, 1.0}, {0.05, 4.0}, {0.0, 10.0}, {0.2, 0.5}}) {
    const auto cfg = config(700, 2000, 0, 9);
    const auto generic = eville::estimate_stop_prob(eville::rademacher_iid(), rules::line_crossing(alpha, beta), cfg);
    const auto kernel = eville::rademacher_line_crossing(alpha, beta, cfg);
    EXPECT_EQ(generic, kernel) << alpha << " " << beta;
  }
}

TEST(Kernels, ScaledSupAgreesPathByPath) {
  const double gamma = 100.0;
  const std::vector<double> eps{0.1, 0.25, 0.5};
  const auto cfg = config(1000, 2000, 0, 10);
  const auto kernel = eville::rademacher_scaled_sup_crossing(gamma, eps, cfg);
  ASSERT_EQ(kernel.size(), eps.size());
  for (std::size_t j = 0; j < eps.size(); ++j) {
    const auto generic =
        eville::estimate_stop_prob(eville::rademacher_iid(), rules::scaled_sup_exceeds(gamma, eps[j]), cfg);
    EXPECT_EQ(generic, kernel[j]) << eps[j];
  }
}

TEST(MuStar, BinaryGrid) {
  std::vector<eville::FamilyMember> members;
  for (std::size_t n = 0; n <= 10; ++n) members.push_back(eville::binary_pn(n));
  const eville::DistributionFamily grid("binary-pn", members);
  const auto report = eville::mu_star_grid_bound(grid, rules::leading_zeros(5), config(20, 4000));
  ASSERT_EQ(report.rows.size(), 12u);
  for (std::size_t n = 0; n <= 10; ++n) {
    const auto& e = report.rows[n].estimate;
    if (n >= 5) {
      EXPECT_EQ(e.value, 1.0);
    } else {
      EXPECT_NEAR(e.value, 0.5, 3.0 * e.std_error + 1e-12);
    }
  }
  EXPECT_EQ(report.rows.back().estimate.value, 1.0);
  EXPECT_EQ(report.rows.back().family, "grid-sup(binary-pn)");
  EXPECT_FALSE(report.notes.empty());
}

TEST(MuStar, SingletonReducesToEstimate) {
  const eville::DistributionFamily one("g", {eville::gaussian_iid(0, 1)});
  const auto cfg = config(100, 500);
  const auto report = eville::mu_star_grid_bound(one, rules::mean_exceeds(0.5, 3), cfg);
  ASSERT_EQ(report.rows.size(), 1u);
  EXPECT_EQ(report.rows[0].estimate,
            eville::estimate_stop_prob(eville::gaussian_iid(0, 1), rules::mean_exceeds(0.5, 3), cfg));
}

TEST(Ville, LikelihoodUnderNull) {
  const auto report = eville::ville_check(eville::likelihood_process(0.2), eville::gaussian_iid(0, 1),
                                          {0.05, 0.1, 0.25}, config(2000, 4000, 0));
  ASSERT_EQ(report.rows.size(), 3u);
  EXPECT_FALSE(report.any_violation());
  EXPECT_LE(report.rows[0].estimate.value, report.rows[1].estimate.value);
}

TEST(Ville, NegativeControlIsFlagged) {
  const auto cheat = eville::one_jump(rules::fixed_time(1), 1.0 / 3.0);
  const auto report = eville::ville_check(cheat, eville::rademacher_iid(), 1.0 / 3.0, config(10, 200));
  EXPECT_EQ(report.rows[0].estimate.value, 1.0);
  EXPECT_TRUE(report.any_violation());
}

TEST(Ville, DetectsAlternative) {
  // Under drift 0.5 the mixture grows like exp(t/8) and crosses 20 quickly.
  const auto report = eville::ville_check(eville::normal_mixture(), eville::gaussian_iid(0.5, 1),
                                          0.05, config(500, 500));
  EXPECT_GT(report.rows[0].estimate.value, 0.95);
  EXPECT_TRUE(report.any_violation());
}

TEST(EProcess, MartingaleMeanIsOne) {
  const eville::DistributionFamily fam("g", {eville::gaussian_iid(0, 1)});
  const auto report = eville::eprocess_check(eville::likelihood_process(0.3), {rules::fixed_time(100)},
                                             fam, config(100, 20000, 0));
  ASSERT_EQ(report.rows.size(), 1u);
  const auto& e = report.rows[0].estimate;
  EXPECT_EQ(e.kind, eville::EstimateKind::kStoppedMean);
  EXPECT_NEAR(e.value, 1.0, 3.0 * e.std_error);
  EXPECT_FALSE(report.any_violation());
}

TEST(EProcess, SupermartingaleUnderNegativeDrift) {
  const eville::DistributionFamily fam("neg", {eville::gaussian_iid(-0.2, 1)});
  const auto proc = eville::likelihood_process(0.3);
  const auto report = eville::eprocess_check(proc, eville::standard_eprocess_rules(proc, 500), fam,
                                             config(500, 4000, 0));
  EXPECT_EQ(report.rows.size(), 5u);
  EXPECT_FALSE(report.any_violation());
  for (const auto& r : report.rows) EXPECT_LT(r.estimate.value, 1.0 + 3.0 * r.estimate.std_error);
}

TEST(EProcess, NondecreasingProcessGetsTerminalRow) {
  const eville::DistributionFamily fam("r", {eville::rademacher_iid()});
  const auto proc = eville::one_jump(rules::line_crossing(0.0, 5.0), 0.5);
  const auto report = eville::eprocess_check(proc, {rules::fixed_time(10)}, fam, config(100, 500));
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_NE(report.rows[1].subject.find("terminal"), std::string::npos);
  EXPECT_EQ(report.notes.size(), 1u);
}

TEST(EProcess, DeterministicAcrossWorkers) {
  const eville::DistributionFamily fam("two", {eville::gaussian_iid(0, 1), eville::rademacher_iid()});
  const auto proc = eville::normal_mixture();
  const auto rl = eville::standard_eprocess_rules(proc, 300);
  const auto a = eville::eprocess_check(proc, rl, fam, config(300, 1000, 1));
  const auto b = eville::eprocess_check(proc, rl, fam, config(300, 1000, 8));
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].estimate, b.rows[i].estimate);
}

TEST(Violates, ThreeSeRule) {
  eville::McEstimate e;
  e.value = 0.06;
  e.std_error = 0.004;
  EXPECT_FALSE(eville::violates(e, 0.05));
  e.value = 0.063;
  EXPECT_TRUE(eville::violates(e, 0.05));
}

}  // namespace
