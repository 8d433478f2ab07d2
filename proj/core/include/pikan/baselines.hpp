#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pikan/env.hpp"

namespace pikan::baselines {

enum class StrategyId { kUbah, kCrp, kOlmar, kRmr, kPamr };

std::string strategy_name(StrategyId id);
// Case-insensitive; throws UnknownStrategy.
StrategyId parse_strategy(std::string_view name);

struct StrategyParams {
  std::size_t window = 5;            // OLMAR / RMR price window
  double olmar_epsilon = 10.0;
  double rmr_epsilon = 10.0;
  double pamr_epsilon = 0.5;
  std::vector<double> crp_target;    // empty means uniform
  double median_tolerance = 1e-6;
  int median_max_iterations = 200;

  void validate(std::size_t assets) const;
};

// Nearest point of the probability simplex in L2 (sort-based).
std::vector<double> project_simplex_euclidean(std::span<const double> v);

struct MedianResult {
  std::vector<double> point;
  bool converged = true;
  int iterations = 0;
};

// L1-median by Weiszfeld iteration from the centroid. Falls back to the
// coordinate-wise median when it does not converge within max_iterations.
MedianResult geometric_median(const std::vector<std::vector<double>>& points, double tolerance, int max_iterations);

enum class StepStatus { kUpdated, kPassive, kDegenerate };

struct StepResult {
  std::vector<double> weights;
  StepStatus status = StepStatus::kUpdated;
};

// OLMAR/RMR update toward predicted relatives x_hat:
// w + tau * (x_hat - mean(x_hat)), tau = max(0, (eps - <w, x_hat>) / |x_hat - mean|^2),
// then Euclidean projection.
StepResult mean_reversion_step(std::span<const double> w, std::span<const double> x_hat, double epsilon);

// PAMR: loss = max(0, <w, y> - eps), tau = loss / |y - mean(y)|^2,
// w - tau * (y - mean(y)), then Euclidean projection.
StepResult pamr_step(std::span<const double> w, std::span<const double> y, double epsilon);

class Strategy {
 public:
  Strategy(StrategyId id, StrategyParams params, std::size_t assets);

  StrategyId id() const noexcept { return id_; }
  const StrategyParams& params() const noexcept { return params_; }
  const env::WeightVector& weights() const noexcept { return weights_; }

  void reset();
  // Called on each decision day with that day's price relatives; returns the
  // allocation to rebalance to.
  env::WeightVector decide(const env::PriceRelatives& y);

 private:
  StrategyId id_;
  StrategyParams params_;
  std::size_t assets_;
  env::WeightVector weights_;
  std::vector<double> price_;                  // normalized price path, last point
  std::deque<std::vector<double>> history_;    // last `window` price points
};

// Runs the strategy through the env (same commission as agents).
env::EpisodeTrace run_strategy(Strategy& strategy, env::MarketEnv& env);

}  // namespace pikan::baselines
