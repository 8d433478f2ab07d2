#include <gtest/gtest.h>

#include <cmath>

#include "pikan/env.hpp"
#include "pikan/error.hpp"
#include "support.hpp"

namespace pikan::env {
namespace {

TEST(PriceRelativesTest, ElementwiseRatio) {
  const std::vector<double> prev{100, 50}, close{110, 45};
  const PriceRelatives y = price_relatives(prev, close);
  EXPECT_NEAR(y[0], 1.10, 1e-15);
  EXPECT_NEAR(y[1], 0.90, 1e-15);
  const PriceRelatives ones = price_relatives(prev, prev);
  for (double v : ones.values()) EXPECT_EQ(v, 1.0);
}

TEST(PriceRelativesTest, ZeroPriceRejected) {
  const std::vector<double> prev{100, 0}, close{110, 45};
  EXPECT_THROW(price_relatives(prev, close), NonPositivePrice);
  EXPECT_THROW(price_relatives(close, prev), NonPositivePrice);
}

TEST(WeightVectorTest, SimplexContract) {
  EXPECT_NO_THROW(WeightVector({0.25, 0.75}));
  EXPECT_THROW(WeightVector({0.5, 0.6}), InvalidWeights);
  EXPECT_THROW(WeightVector({-0.1, 1.1}), InvalidWeights);
  EXPECT_THROW(WeightVector({}), InvalidWeights);
}

TEST(DriftTest, Cases) {
  const WeightVector w({0.5, 0.5});
  const WeightVector same = drift_weights(w, PriceRelatives({1.0, 1.0}));
  EXPECT_EQ(same.values(), w.values());
  const WeightVector d = drift_weights(w, PriceRelatives({2.0, 1.0}));
  EXPECT_NEAR(d[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(d[1], 1.0 / 3.0, 1e-15);
  const WeightVector corner = drift_weights(WeightVector({1.0, 0.0}), PriceRelatives({0.7, 3.0}));
  EXPECT_EQ(corner.values(), (std::vector<double>{1.0, 0.0}));
}

TEST(DriftTest, StaysOnSimplex) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 1000; ++k) {
    const WeightVector w(testing::random_simplex(6, rng));
    const WeightVector d = drift_weights(w, PriceRelatives(testing::random_relatives(6, rng, 0.3)));
    double s = 0.0;
    for (double x : d.values()) {
      EXPECT_GE(x, 0.0);
      s += x;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(TurnoverTest, Cases) {
  const WeightVector a({0.6, 0.4}), b({0.5, 0.5});
  EXPECT_EQ(turnover(a, a), 0.0);
  EXPECT_DOUBLE_EQ(turnover(WeightVector({1.0, 0.0}), WeightVector({0.0, 1.0})), 2.0);
  EXPECT_NEAR(turnover(b, a), 0.2, 1e-15);
}

TEST(CostFactorTest, Cases) {
  EXPECT_EQ(cost_factor(0.0, 0.0025), 1.0);
  EXPECT_EQ(cost_factor(2.0, 0.0025), 0.995);
  EXPECT_NEAR(cost_factor(0.2, 0.0025), 0.9995, 1e-15);
}

TEST(CostFactorTest, NonIncreasingInTurnover) {
  double prev = 1.0;
  for (int k = 0; k <= 200; ++k) {
    const double mu = cost_factor(k * 0.01, 0.0025);
    EXPECT_LE(mu, prev);
    prev = mu;
  }
}

TEST(StepTest, FlatMarketHoldingIsNeutral) {
  const PortfolioState s{1000.0, WeightVector({0.3, 0.7}), 0};
  const StepOutcome out = step(s, s.weights, PriceRelatives({1.0, 1.0}), 0.0025);
  EXPECT_EQ(out.next_state.wealth, 1000.0);
  EXPECT_EQ(out.reward, 0.0);
}

TEST(StepTest, HoldingDriftedWeightsCostsNothing) {
  const PortfolioState s{1000.0, WeightVector({1.0, 0.0}), 0};
  const PriceRelatives y({1.10, 1.0});
  const WeightVector drifted = drift_weights(s.weights, y);
  const StepOutcome out = step(s, drifted, y, 0.0025);
  EXPECT_NEAR(out.next_state.wealth, 1100.0, 1e-9);
  EXPECT_NEAR(out.reward, std::log(1.10), 1e-15);
  EXPECT_EQ(out.turnover, 0.0);
}

TEST(StepTest, ChainedHandExample) {
  const PortfolioState s{1000.0, WeightVector({0.5, 0.5}), 0};
  const StepOutcome out = step(s, WeightVector({0.5, 0.5}), PriceRelatives({2.0, 1.0}), 0.0025);
  EXPECT_DOUBLE_EQ(out.growth, 1.5);
  EXPECT_NEAR(out.drifted_weights[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(out.turnover, 1.0 / 3.0, 1e-15);
  const double mu = 1.0 - 0.0025 / 3.0;
  EXPECT_NEAR(out.cost_factor, mu, 1e-15);
  EXPECT_NEAR(out.next_state.wealth, 1500.0 * mu, 1e-9);
  EXPECT_NEAR(out.reward, std::log(1.5 * mu), 1e-15);
  EXPECT_EQ(out.next_state.weights.values(), (std::vector<double>{0.5, 0.5}));
}

TEST(StepTest, RewardIsLogWealthRatio) {
  std::mt19937_64 rng(3);
  PortfolioState s{1000.0, WeightVector::uniform(4), 0};
  for (int t = 0; t < 200; ++t) {
    const StepOutcome out =
        step(s, WeightVector(testing::random_simplex(4, rng)), PriceRelatives(testing::random_relatives(4, rng)), 0.0025);
    EXPECT_NEAR(out.reward, std::log(out.next_state.wealth / s.wealth), 1e-12);
    s = out.next_state;
  }
}

TEST(ProjectTest, Softmax) {
  const WeightVector u = project_to_simplex(std::vector<double>{0.7, 0.7, 0.7});
  for (double x : u.values()) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
  const WeightVector lim = project_to_simplex(std::vector<double>{800.0, -800.0});
  EXPECT_EQ(lim[0], 1.0);
  EXPECT_EQ(lim[1], 0.0);
  const WeightVector q = project_to_simplex(std::vector<double>{0.0, std::log(3.0)});
  EXPECT_NEAR(q[0], 0.25, 1e-15);
  EXPECT_NEAR(q[1], 0.75, 1e-15);
}

TEST(MarketEnvTest, TimingAndTrace) {
  const marketdata::Dataset ds = testing::synthetic_dataset(3, 140, 9);
  const std::size_t start = ds.first_state_index();
  MarketEnv env(ds, start, start + 10, EnvConfig{});
  EXPECT_EQ(env.day(), start + 1);
  EXPECT_EQ(env.observation().t_index, start + 1);
  const PriceRelatives y = env.relatives();
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(y[i], ds.closes[i][start + 1] / ds.closes[i][start]);

  const EpisodeTrace trace = run_episode(env, [](const MarketEnv& e) { return WeightVector::uniform(e.num_assets()); });
  ASSERT_EQ(trace.wealth.size(), 11u);
  EXPECT_EQ(trace.days.front(), start);
  EXPECT_EQ(trace.days.back(), start + 10);
  EXPECT_EQ(trace.wealth.front(), 1000.0);
  EXPECT_TRUE(env.done());
  EXPECT_THROW(env.step(WeightVector::uniform(3)), EpisodeTerminated);
}

TEST(MarketEnvTest, ZeroCostWealthIsProductOfGrowth) {
  const marketdata::Dataset ds = testing::synthetic_dataset(4, 200, 12);
  const std::size_t start = ds.first_state_index();
  MarketEnv env(ds, start, ds.days() - 1, EnvConfig{0.0, 1000.0});
  std::mt19937_64 rng(2);
  std::vector<std::vector<double>> actions;
  const EpisodeTrace trace = run_episode(env, [&](const MarketEnv&) {
    actions.push_back(testing::random_simplex(4, rng));
    return WeightVector(actions.back());
  });
  double wealth = 1000.0;
  std::vector<double> w(4, 0.25);
  for (std::size_t k = 0; k < actions.size(); ++k) {
    const std::size_t d = start + 1 + k;
    double g = 0.0;
    for (std::size_t i = 0; i < 4; ++i) g += w[i] * ds.closes[i][d] / ds.closes[i][d - 1];
    wealth *= g;
    w = actions[k];
  }
  EXPECT_NEAR(trace.wealth.back() / wealth - 1.0, 0.0, 1e-12);
}

TEST(MarketEnvTest, RejectsBadRanges) {
  const marketdata::Dataset ds = testing::synthetic_dataset(2, 120, 1);
  EXPECT_THROW(MarketEnv(ds, 10, 20, EnvConfig{}), InsufficientHistory);
  EXPECT_THROW(MarketEnv(ds, ds.first_state_index(), ds.days(), EnvConfig{}), ValidationError);
  EXPECT_THROW(MarketEnv(ds, ds.first_state_index(), ds.days() - 1, EnvConfig{0.6, 1000.0}), ValidationError);
}

}  // namespace
}  // namespace pikan::env
