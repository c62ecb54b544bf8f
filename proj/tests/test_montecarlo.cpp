#include <cmath>
#include <cstdlib>

#include <gtest/gtest.h>

#include "lamplighter/exact.hpp"
#include "lamplighter/montecarlo.hpp"
#include "lamplighter/stats.hpp"

using namespace lamplighter;
using namespace lamplighter::mc;

namespace {

WalkConfig line_config(double p, std::int64_t order) {
  return WalkConfig{GraphSpec::line(), p / (1 - p), make_uniform_measure(LampGroup::cyclic(order)),
                    kDefaultStepBudget, std::nullopt};
}

double binomial_cdf_half(int k, int x) {
  double total = 0;
  for (int m = 0; m <= x; ++m) total += std::exp(exact::detail::log_binomial_half(k, m));
  return total;
}

}  // namespace

TEST(ParallelFold, IndependentOfWorkerCount) {
  auto run = [](unsigned workers) {
    return parallel_fold<std::vector<std::uint64_t>>(
        1000, [] { return std::vector<std::uint64_t>{}; },
        [](std::vector<std::uint64_t>& acc, std::uint64_t first, std::uint64_t last) {
          for (auto i = first; i < last; ++i) {
            auto rng = replica_stream(42, i);
            acc.push_back(rng());
          }
        },
        [](std::vector<std::uint64_t>& into, const std::vector<std::uint64_t>& from) {
          into.insert(into.end(), from.begin(), from.end());
        },
        workers);
  };
  const auto one = run(1);
  EXPECT_EQ(one.size(), 1000u);
  EXPECT_EQ(one, run(3));
  EXPECT_EQ(one, run(16));
}

TEST(ParallelFold, PropagatesExceptions) {
  auto body = [](int&, std::uint64_t first, std::uint64_t) {
    if (first > 0) throw DomainError("boom");
  };
  EXPECT_THROW(parallel_fold<int>(100, [] { return 0; }, body, [](int&, const int&) {}, 4), DomainError);
}

TEST(LogSpaced, UniqueIncreasing) {
  const auto ks = log_spaced(10, 100, 10);
  EXPECT_EQ(ks.front(), 10u);
  EXPECT_EQ(ks.back(), 100u);
  for (std::size_t i = 1; i < ks.size(); ++i) EXPECT_GT(ks[i], ks[i - 1]);
  EXPECT_EQ(log_spaced(1, 3, 10), (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_THROW(log_spaced(0, 3, 2), DomainError);
}

TEST(ReturnProb, SingleExcursionMatchesExact) {
  const auto est = estimate_return_prob(1, line_config(0.75, 2), 200'000, 7);
  const double exact_value = exact::ret_prob_at_rho_k(1, 3.0, 2);
  EXPECT_FALSE(est.inconclusive);
  EXPECT_EQ(est.replicas, 200'000u);
  EXPECT_NEAR(est.estimate, exact_value, 3 * est.std_error);
}

TEST(ReturnProb, TrivialLampGroupAlwaysReturns) {
  const auto est = estimate_return_prob(1, line_config(0.75, 1), 1000, 1);
  EXPECT_EQ(est.estimate, 1.0);
  EXPECT_EQ(est.successes, 1000u);
}

TEST(ReturnProb, ConditionalEstimatorAgreesWithExact) {
  const auto cfg = line_config(0.8, 2);
  const std::vector<std::uint64_t> ks = {1, 5, 20, 80};
  const auto cond = estimate_return_probs(ks, cfg, 40'000, 3, Estimator::conditional);
  for (std::size_t q = 0; q < ks.size(); ++q) {
    const double exact_value = exact::ret_prob_at_rho_k(ks[q], 4.0, 2);
    EXPECT_FALSE(cond[q].inconclusive);
    EXPECT_NEAR(cond[q].estimate, exact_value, 3.5 * cond[q].std_error) << ks[q];
  }
  // For a single excursion the conditional value is |F|^-(range) exactly; its
  // variance is below that of the indicator.
  const auto ind = estimate_return_probs(ks, cfg, 40'000, 3, Estimator::indicator);
  EXPECT_LT(cond[3].std_error, ind[3].std_error);
}

// Non-uniform measure on a cyclic group: the conditional weight uses the
// convolution-power product.
TEST(ReturnProb, ConditionalNonUniformMeasure) {
  WalkConfig cfg{GraphSpec::line(), 3.0, SwitchMeasure(LampGroup::cyclic(5), {{0, 0.4}, {1, 0.2}, {4, 0.2}, {2, 0.1}, {3, 0.1}}),
                 kDefaultStepBudget, std::nullopt};
  const auto ind = estimate_return_prob(4, cfg, 200'000, 11, Estimator::indicator);
  const auto cond = estimate_return_prob(4, cfg, 200'000, 12, Estimator::conditional);
  const double se = std::hypot(ind.std_error, cond.std_error);
  EXPECT_NEAR(ind.estimate, cond.estimate, 3.5 * se);
}

TEST(ReturnProb, IndicatorInconclusiveBelowThreshold) {
  const auto est = estimate_return_prob(50, line_config(0.6, 3), 200, 1);
  EXPECT_LT(est.successes, kMinSuccesses);
  EXPECT_TRUE(est.inconclusive);
}

TEST(ReturnProb, Deterministic) {
  const auto cfg = line_config(0.75, 2);
  const auto a = estimate_return_prob(5, cfg, 5000, 99);
  const auto b = estimate_return_prob(5, cfg, 5000, 99);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.std_error, b.std_error);
  const auto c = estimate_return_prob(5, cfg, 5000, 100);
  EXPECT_NE(a.successes, c.successes);
}

TEST(ReturnProb, TruncationIsCounted) {
  auto cfg = line_config(0.6, 2);
  cfg.radius = 3;
  const auto est = estimate_return_prob(20, cfg, 2000, 5);
  EXPECT_GT(est.truncation_aborts, 0u);
  EXPECT_TRUE(est.aborted());
  EXPECT_EQ(est.replicas + est.truncation_aborts, 2000u);
}

TEST(LocalTimeEstimate, ZeroHorizonIsOne) {
  const auto est = estimate_local_time(0, line_config(0.8, 2), 100, 1);
  EXPECT_EQ(est.estimate, 1.0);
  EXPECT_EQ(est.std_error, 0.0);
}

// E xi(id, n) equals 1 plus the expected number of identity returns among
// the rho_j <= n; the exact layer gives the partial sum along rho_k, so at
// n = m k the two agree to leading order.
TEST(LocalTimeEstimate, MatchesPartialSumScale) {
  const auto est = estimate_local_time(3000, line_config(0.75, 2), 2000, 4);
  const double upper = exact::local_time_partial_sum(3000, 3.0, 2);
  EXPECT_GT(est.estimate, 1.0);
  EXPECT_LT(est.estimate, upper);
}

TEST(Trajectories, NplusIsBinomial) {
  const int k = 20;
  const auto batch = simulate_trajectories(k, line_config(0.75, 2), 100'000, 8);
  ASSERT_EQ(batch.rows.size(), 100'000u);
  std::vector<std::int64_t> nplus;
  std::vector<std::uint64_t> observed(k + 1, 0);
  for (const auto& r : batch.rows) {
    nplus.push_back(static_cast<std::int64_t>(r.positive));
    ++observed[r.positive];
  }
  const double d = stats::empirical_cdf_distance_discrete(nplus, [&](std::int64_t x) {
    return x < 0 ? 0.0 : (x >= k ? 1.0 : binomial_cdf_half(k, static_cast<int>(x)));
  });
  EXPECT_LT(d, stats::ks_critical_value_001(nplus.size()));
  std::vector<double> expected;
  for (int m = 0; m <= k; ++m) expected.push_back(std::exp(exact::detail::log_binomial_half(k, m)));
  EXPECT_GT(stats::chi_square_test(observed, expected).p_value, 1e-3);
}

TEST(Trajectories, ReturnTimeDeviationTailDecays) {
  const double eps = 0.5, mean = 3.0;
  std::vector<double> log_freq;
  for (std::uint64_t k : {50u, 100u, 200u}) {
    const auto batch = simulate_trajectories(k, line_config(0.75, 2), 100'000, k);
    std::uint64_t far = 0;
    for (const auto& r : batch.rows)
      far += std::abs(static_cast<double>(r.return_time) - mean * k) >= eps * k;
    ASSERT_GT(far, 0u);
    log_freq.push_back(std::log(static_cast<double>(far) / batch.rows.size()));
  }
  EXPECT_LT(log_freq[1], log_freq[0]);
  EXPECT_LT(log_freq[2], log_freq[1]);
  // Exponential in k: doubling k at least doubles the log-decrement, within noise.
  EXPECT_LT(log_freq[2] - log_freq[1], 0.8 * (log_freq[1] - log_freq[0]));
}

TEST(Trajectories, RowsInReplicaOrder) {
  const auto batch = simulate_trajectories(3, line_config(0.75, 2), 500, 1);
  for (std::size_t i = 0; i < batch.rows.size(); ++i) {
    EXPECT_EQ(batch.rows[i].replica, i);
    EXPECT_EQ(batch.rows[i].seed, stream_seed(1, i));
  }
}

TEST(Escape, WithinBound) {
  for (const auto& g : {build_line_graph(40), build_gamma_m(3, 40)}) {
    for (double lambda : {2.0, 4.0}) {
      const auto prof = estimate_escape_profile(g, lambda, 8, 100'000, 13);
      EXPECT_EQ(prof.excursions, 100'000u);
      for (int r = 1; r <= 8; ++r) {
        const double bound = exact::escape_prob_bound(g, lambda, r);
        const double sigma = std::max(prof.std_error(r), std::sqrt(bound * (1 - bound) / 1e5));
        EXPECT_LE(prof.probability(r), bound + 3 * sigma) << "r=" << r;
      }
    }
  }
}

// On Z the bound is the exact escape probability.
TEST(Escape, ExactOnLine) {
  const auto g = build_line_graph(40);
  const auto prof = estimate_escape_profile(g, 2.0, 5, 200'000, 6);
  for (int r = 1; r <= 5; ++r)
    EXPECT_NEAR(prof.probability(r), exact::escape_prob_bound(g, 2.0, r), 4 * prof.std_error(r) + 1e-12);
}

TEST(Excursions, PositiveMaximaFollowCdf) {
  const auto maxima = positive_excursion_maxima(3.0, 50'000, 2);
  ASSERT_EQ(maxima.size(), 50'000u);
  const double d = stats::empirical_cdf_distance_discrete(
      maxima, [](std::int64_t x) { return x < 0 ? 0.0 : exact::max_excursion_cdf(x, 3.0); });
  EXPECT_LT(d, stats::ks_critical_value_001(maxima.size()));
}

TEST(RangeTail, CountsMonotone) {
  const auto g = build_line_graph(200);
  const auto tail = estimate_range_tail(100, {1, 5, 10, 1000}, g, 2.0, 5000, 3);
  EXPECT_EQ(tail.replicas, 5000u);
  EXPECT_EQ(tail.at_most[0], 0u);  // range always has at least two sites
  for (std::size_t q = 1; q < 4; ++q) EXPECT_GE(tail.at_most[q], tail.at_most[q - 1]);
  EXPECT_EQ(tail.at_most[3], 5000u);
}

TEST(PhaseScan, LineGraphBracketAtLampOrderSquared) {
  PhaseScanOptions opt;
  opt.replicas = 60'000;
  opt.seed = 5;
  const auto res = phase_scan({2.0, 3.0, 6.0, 8.0}, GraphSpec::line(), 2, opt);
  ASSERT_EQ(res.points.size(), 4u);
  EXPECT_FALSE(res.points[0].recurrent_side());
  EXPECT_TRUE(res.points[3].recurrent_side());
  ASSERT_TRUE(res.bracket);
  EXPECT_LE(res.bracket->first, 4.0);
  EXPECT_GE(res.bracket->second, 4.0);
}

TEST(PhaseScan, RejectsNarrowWindow) {
  PhaseScanOptions opt;
  opt.k_hi = 50;
  EXPECT_THROW(phase_scan({2.0}, GraphSpec::line(), 2, opt), DomainError);
  EXPECT_THROW(phase_scan({3.0, 2.0}, GraphSpec::line(), 2, PhaseScanOptions{}), DomainError);
}

TEST(PhaseScan, SparsePointIsInconclusive) {
  PhaseScanOptions opt;
  opt.replicas = 300;
  const auto res = phase_scan({1.5}, GraphSpec::line(), 3, opt);
  EXPECT_TRUE(res.points[0].inconclusive);
  EXPECT_FALSE(res.bracket);
}
