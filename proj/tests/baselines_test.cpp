#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "pikan/baselines.hpp"
#include "pikan/error.hpp"
#include "support.hpp"

namespace pikan::baselines {
namespace {

// Simplex projection by bisection on the threshold theta.
std::vector<double> bisection_projection(const std::vector<double>& v) {
  double lo = *std::min_element(v.begin(), v.end()) - 1.0, hi = *std::max_element(v.begin(), v.end());
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double s = 0.0;
    for (double x : v) s += std::max(x - mid, 0.0);
    (s > 1.0 ? lo : hi) = mid;
  }
  std::vector<double> w(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) w[i] = std::max(v[i] - 0.5 * (lo + hi), 0.0);
  return w;
}

double sum_of_distances(const std::vector<std::vector<double>>& pts, double x, double y) {
  double s = 0.0;
  for (const auto& p : pts) s += std::hypot(p[0] - x, p[1] - y);
  return s;
}

// Coarse-to-fine grid search for the planar L1-median.
std::vector<double> grid_median(const std::vector<std::vector<double>>& pts) {
  double cx = 0.0, cy = 0.0, half = 10.0;
  for (int level = 0; level < 12; ++level) {
    double bx = cx, by = cy, best = sum_of_distances(pts, cx, cy);
    for (int i = -50; i <= 50; ++i) {
      for (int j = -50; j <= 50; ++j) {
        const double x = cx + half * i / 50.0, y = cy + half * j / 50.0;
        const double f = sum_of_distances(pts, x, y);
        if (f < best) best = f, bx = x, by = y;
      }
    }
    cx = bx, cy = by, half /= 10.0;
  }
  return {cx, cy};
}

marketdata::Dataset flat_market(std::size_t assets) {
  synth::SynthConfig sc;
  sc.assets = assets;
  sc.days = 120;
  sc.annual_drift = 0.0;
  sc.annual_volatility = 0.0;
  auto raw = synth::generate(sc);
  marketdata::DatasetOptions opts;
  opts.stats_begin = raw[0].dates.front();
  opts.stats_end = raw[0].dates.back();
  return marketdata::make_dataset(std::move(raw), opts);
}

TEST(StrategyNameTest, ParseIsCaseInsensitive) {
  EXPECT_EQ(parse_strategy("olmar"), StrategyId::kOlmar);
  EXPECT_EQ(parse_strategy("Pamr"), StrategyId::kPamr);
  EXPECT_EQ(strategy_name(StrategyId::kUbah), "UBAH");
  EXPECT_THROW(parse_strategy("anticor"), UnknownStrategy);
}

TEST(ProjectionTest, MatchesBisectionOracle) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int k = 0; k < 500; ++k) {
    std::vector<double> v(1 + k % 9);
    for (auto& x : v) x = n(rng);
    const auto w = project_simplex_euclidean(v);
    const auto oracle = bisection_projection(v);
    for (std::size_t i = 0; i < v.size(); ++i) ASSERT_NEAR(w[i], oracle[i], 1e-9);
  }
}

TEST(ProjectionTest, FixesSimplexPoints) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 100; ++k) {
    const auto p = testing::random_simplex(5, rng);
    const auto w = project_simplex_euclidean(p);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(w[i], p[i], 1e-12);
  }
  EXPECT_THROW(project_simplex_euclidean(std::vector<double>{}), DimensionMismatch);
}

TEST(MedianTest, WeiszfeldMatchesGridSearch) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    std::vector<std::vector<double>> pts(5 + k % 3, std::vector<double>(2));
    for (auto& p : pts) p = {n(rng), n(rng)};
    const MedianResult r = geometric_median(pts, 1e-12, 10000);
    const auto oracle = grid_median(pts);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.point[0], oracle[0], 1e-4);
    EXPECT_NEAR(r.point[1], oracle[1], 1e-4);
  }
}

TEST(MedianTest, ObtuseVertexIsTheMedian) {
  // The angle at the origin exceeds 120 degrees.
  const std::vector<std::vector<double>> pts{{1.0, 0.0}, {0.0, 0.0}, {-1.0, 0.1}};
  const MedianResult r = geometric_median(pts, 1e-6, 200);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.point, (std::vector<double>{0.0, 0.0}));
}

TEST(MedianTest, TwoPointsGiveTheMidpoint) {
  const MedianResult r = geometric_median({{1.0, 2.0}, {3.0, 6.0}}, 1e-6, 200);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.point[0], 2.0, 1e-12);
  EXPECT_NEAR(r.point[1], 4.0, 1e-12);
}

TEST(MedianTest, ConvergesNearAVertex) {
  // Random triangles with the median just off a vertex stall plain Weiszfeld.
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    std::vector<std::vector<double>> pts(3, std::vector<double>(2));
    for (auto& p : pts) p = {n(rng), n(rng)};
    ASSERT_TRUE(geometric_median(pts, 1e-6, 200).converged) << "triangle " << k;
  }
  const std::vector<std::vector<double>> near{{-0.352537, -1.008823}, {-0.8956, 0.889446}, {-0.092869, 0.15389}};
  const MedianResult r = geometric_median(near, 1e-6, 200);
  const auto oracle = grid_median(near);
  EXPECT_NEAR(r.point[0], oracle[0], 1e-4);
  EXPECT_NEAR(r.point[1], oracle[1], 1e-4);
}

TEST(MedianTest, FallsBackToCoordinateMedian) {
  const std::vector<std::vector<double>> pts{{0, 0}, {4, 0}, {0, 3}, {10, 10}};
  const MedianResult r = geometric_median(pts, 1e-15, 1);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.point, (std::vector<double>{2.0, 1.5}));
  EXPECT_THROW(geometric_median({}, 1e-6, 10), InsufficientData);
}

TEST(MeanReversionStepTest, ClosedForm) {
  const std::vector<double> w{0.5, 0.5}, x{1.2, 0.8};
  // tau = (1.05 - 1.0) / 0.08 = 0.625, w + tau * (0.2, -0.2) stays feasible.
  const StepResult r = mean_reversion_step(w, x, 1.05);
  EXPECT_EQ(r.status, StepStatus::kUpdated);
  EXPECT_NEAR(r.weights[0], 0.625, 1e-9);
  EXPECT_NEAR(r.weights[1], 0.375, 1e-9);
  const StepResult far = mean_reversion_step(w, x, 10.0);
  EXPECT_NEAR(far.weights[0], 1.0, 1e-12);
  EXPECT_NEAR(far.weights[1], 0.0, 1e-12);
}

TEST(MeanReversionStepTest, PassiveAndDegenerate) {
  const std::vector<double> w{0.2, 0.8};
  const StepResult passive = mean_reversion_step(w, std::vector<double>{1.2, 0.8}, 0.5);
  EXPECT_EQ(passive.status, StepStatus::kPassive);
  EXPECT_EQ(passive.weights, w);
  const StepResult flat = mean_reversion_step(w, std::vector<double>{1.1, 1.1}, 10.0);
  EXPECT_EQ(flat.status, StepStatus::kDegenerate);
  EXPECT_EQ(flat.weights, w);
}

TEST(PamrStepTest, ClosedForm) {
  const std::vector<double> w{0.5, 0.5}, y{1.1, 0.9};
  // loss = 0.01, tau = 0.01 / 0.02 = 0.5, w - tau * (0.1, -0.1).
  const StepResult r = pamr_step(w, y, 0.99);
  EXPECT_NEAR(r.weights[0], 0.45, 1e-9);
  EXPECT_NEAR(r.weights[1], 0.55, 1e-9);
  EXPECT_EQ(pamr_step(w, y, 1.5).status, StepStatus::kPassive);
  EXPECT_EQ(pamr_step(w, std::vector<double>{0.9, 0.9}, 0.5).status, StepStatus::kDegenerate);
}

TEST(StrategyTest, OlmarHoldsUntilWindowThenFollowsClosedForm) {
  StrategyParams p;
  p.window = 3;
  p.olmar_epsilon = 10.0;
  Strategy s(StrategyId::kOlmar, p, 2);
  const auto w1 = s.decide(env::PriceRelatives({1.1, 0.9}));
  EXPECT_EQ(w1.values(), (std::vector<double>{0.5, 0.5}));
  const auto w2 = s.decide(env::PriceRelatives({1.0, 1.2}));
  // Prices (1, 1), (1.1, 0.9), (1.1, 1.08); x_hat = mean / last.
  const std::vector<double> x_hat{(1.0 + 1.1 + 1.1) / 3.0 / 1.1, (1.0 + 0.9 + 1.08) / 3.0 / 1.08};
  const StepResult expected = mean_reversion_step(std::vector<double>{0.5, 0.5}, x_hat, 10.0);
  EXPECT_NEAR(w2[0], expected.weights[0], 1e-12);
  EXPECT_NEAR(w2[1], expected.weights[1], 1e-12);
}

TEST(StrategyTest, CrpTargetAndValidation) {
  StrategyParams p;
  p.crp_target = {0.2, 0.3, 0.5};
  Strategy s(StrategyId::kCrp, p, 3);
  EXPECT_EQ(s.decide(env::PriceRelatives({1.3, 0.7, 1.0})).values(), p.crp_target);
  EXPECT_THROW(Strategy(StrategyId::kCrp, p, 2), ConfigError);
  StrategyParams bad;
  bad.window = 1;
  EXPECT_THROW(Strategy(StrategyId::kOlmar, bad, 2), ConfigError);
}

TEST(RunStrategyTest, UbahHasZeroTurnover) {
  const marketdata::Dataset ds = testing::synthetic_dataset(4, 150, 3);
  env::MarketEnv env(ds, ds.first_state_index(), ds.days() - 1, env::EnvConfig{});
  Strategy s(StrategyId::kUbah, {}, 4);
  const env::EpisodeTrace t = run_strategy(s, env);
  for (double to : t.turnover) EXPECT_NEAR(to, 0.0, 1e-12);
  // Buy and hold wealth equals the mean of price ratios.
  double ratio = 0.0;
  for (std::size_t i = 0; i < 4; ++i) ratio += ds.closes[i][ds.days() - 1] / ds.closes[i][ds.first_state_index()] / 4.0;
  EXPECT_NEAR(t.wealth.back(), 1000.0 * ratio, 1e-8);
}

TEST(RunStrategyTest, ConstantPricesKeepWealthFlat) {
  const marketdata::Dataset ds = flat_market(3);
  for (StrategyId id : {StrategyId::kUbah, StrategyId::kCrp, StrategyId::kOlmar, StrategyId::kRmr, StrategyId::kPamr}) {
    env::MarketEnv env(ds, ds.first_state_index(), ds.days() - 1, env::EnvConfig{});
    Strategy s(id, {}, 3);
    const env::EpisodeTrace t = run_strategy(s, env);
    for (double w : t.wealth) EXPECT_EQ(w, 1000.0) << strategy_name(id);
  }
}

TEST(RunStrategyTest, Deterministic) {
  const marketdata::Dataset ds = testing::synthetic_dataset(3, 150, 4);
  for (StrategyId id : {StrategyId::kOlmar, StrategyId::kRmr, StrategyId::kPamr}) {
    env::MarketEnv e1(ds, ds.first_state_index(), ds.days() - 1, env::EnvConfig{});
    env::MarketEnv e2(ds, ds.first_state_index(), ds.days() - 1, env::EnvConfig{});
    Strategy a(id, {}, 3), b(id, {}, 3);
    EXPECT_EQ(run_strategy(a, e1).wealth, run_strategy(b, e2).wealth);
  }
}

}  // namespace
}  // namespace pikan::baselines
