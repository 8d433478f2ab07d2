#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pikan/dataset.hpp"

namespace pikan::env {

inline constexpr double kSimplexTolerance = 1e-9;

// Long-only, fully invested allocation. Construction checks the simplex
// invariants and throws InvalidWeights otherwise.
class WeightVector {
 public:
  explicit WeightVector(std::vector<double> values);
  static WeightVector uniform(std::size_t m);

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

// y_t: elementwise close_t / close_{t-1}. Entries strictly positive, finite.
class PriceRelatives {
 public:
  explicit PriceRelatives(std::vector<double> values);

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

struct PortfolioState {
  double wealth;
  WeightVector weights;
  std::size_t t = 0;
};

struct StepOutcome {
  PortfolioState next_state;
  double reward = 0.0;       // ln(cost_factor * <w_prev, y>)
  double turnover = 0.0;
  double cost_factor = 1.0;
  double growth = 1.0;       // <w_prev, y>
  WeightVector drifted_weights;
};

struct EnvConfig {
  double commission = 0.0025;
  double initial_wealth = 1000.0;

  void validate() const;
};

PriceRelatives price_relatives(std::span<const double> prev_close, std::span<const double> close);
WeightVector drift_weights(const WeightVector& w_prev, const PriceRelatives& y);
double turnover(const WeightVector& w_new, const WeightVector& w_drifted);
double cost_factor(double turnover, double commission);

// One trading period: drift the held weights, rebalance to `action`, pay
// commission on the turnover, compound wealth.
StepOutcome step(const PortfolioState& state, const WeightVector& action, const PriceRelatives& y,
                 double commission);

// Softmax with max-subtraction.
WeightVector project_to_simplex(std::span<const double> raw);

// Walks a contiguous day range of a dataset. The initial uniform portfolio is
// formed at the close of `start_day`; decisions happen on start_day + 1
// through end_day, each after that day's price relatives are known.
class MarketEnv {
 public:
  MarketEnv(const marketdata::Dataset& data, std::size_t start_day, std::size_t end_day, EnvConfig config);

  void reset();
  bool done() const noexcept { return day_ > end_day_; }
  std::size_t day() const noexcept { return day_; }
  std::size_t start_day() const noexcept { return start_day_; }
  std::size_t end_day() const noexcept { return end_day_; }
  std::size_t num_assets() const noexcept { return data_->num_assets(); }

  // State for the current decision day.
  marketdata::StateTensor observation() const;
  // State for the following day, or the current one at the dataset edge.
  marketdata::StateTensor next_observation() const;
  PriceRelatives relatives() const;
  const PortfolioState& portfolio() const noexcept { return portfolio_; }
  const EnvConfig& config() const noexcept { return config_; }
  const marketdata::Dataset& data() const noexcept { return *data_; }

  StepOutcome step(const WeightVector& action);

 private:
  const marketdata::Dataset* data_;
  std::size_t start_day_;
  std::size_t end_day_;
  EnvConfig config_;
  std::size_t day_ = 0;
  PortfolioState portfolio_;
};

// Wealth path of one pass over an env. Entry 0 is the initial wealth at
// start_day; entry k is the wealth after the decision on day start_day + k.
struct EpisodeTrace {
  std::vector<std::size_t> days;
  std::vector<double> wealth;
  std::vector<std::vector<double>> weights;  // post-rebalance weights per entry
  std::vector<double> turnover;
};

using Policy = std::function<WeightVector(const MarketEnv&)>;

// Resets the env and steps it to the end with `policy`.
EpisodeTrace run_episode(MarketEnv& env, const Policy& policy);

}  // namespace pikan::env
