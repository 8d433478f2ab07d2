#include "pikan/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pikan/error.hpp"

namespace pikan::env {

WeightVector::WeightVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidWeights("weight vector is empty");
  double sum = 0.0;
  for (double w : values_) {
    if (!std::isfinite(w) || w < 0.0) throw InvalidWeights("weights must be finite and non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) throw InvalidWeights("weights do not sum to 1");
}

WeightVector WeightVector::uniform(std::size_t m) {
  return WeightVector(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

PriceRelatives::PriceRelatives(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw NonPositivePrice("price relatives are empty");
  for (double y : values_) {
    if (!std::isfinite(y) || !(y > 0.0)) throw NonPositivePrice("price relatives must be positive and finite");
  }
}

void EnvConfig::validate() const {
  if (!(commission >= 0.0 && commission < 0.5)) throw ValidationError("commission must lie in [0, 0.5)");
  if (!(initial_wealth > 0.0)) throw ValidationError("initial wealth must be positive");
}

PriceRelatives price_relatives(std::span<const double> prev_close, std::span<const double> close) {
  if (prev_close.size() != close.size()) throw DimensionMismatch("price_relatives: length mismatch");
  std::vector<double> y(close.size());
  for (std::size_t i = 0; i < close.size(); ++i) {
    if (!(prev_close[i] > 0.0) || !(close[i] > 0.0)) throw NonPositivePrice("price_relatives: non-positive price");
    y[i] = close[i] / prev_close[i];
  }
  return PriceRelatives(std::move(y));
}

namespace {
double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}
}  // namespace

WeightVector drift_weights(const WeightVector& w_prev, const PriceRelatives& y) {
  if (w_prev.size() != y.size()) throw DimensionMismatch("drift_weights: length mismatch");
  const double growth = dot(w_prev.values(), y.values());
  std::vector<double> out(w_prev.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = y[i] * w_prev[i] / growth;
  return WeightVector(std::move(out));
}

double turnover(const WeightVector& w_new, const WeightVector& w_drifted) {
  if (w_new.size() != w_drifted.size()) throw DimensionMismatch("turnover: length mismatch");
  double to = 0.0;
  for (std::size_t i = 0; i < w_new.size(); ++i) to += std::abs(w_new[i] - w_drifted[i]);
  return to;
}

double cost_factor(double turnover, double commission) {
  if (!(turnover >= 0.0 && turnover <= 2.0 + 1e-12)) throw ValidationError("turnover outside [0, 2]");
  if (!(commission >= 0.0 && commission < 0.5)) throw ValidationError("commission outside [0, 0.5)");
  return 1.0 - commission * turnover;
}

StepOutcome step(const PortfolioState& state, const WeightVector& action, const PriceRelatives& y,
                 double commission) {
  if (action.size() != state.weights.size() || y.size() != state.weights.size()) {
    throw DimensionMismatch("step: action, weights and relatives differ in length");
  }
  WeightVector drifted = drift_weights(state.weights, y);
  const double to = turnover(action, drifted);
  const double mu = cost_factor(to, commission);
  const double growth = dot(state.weights.values(), y.values());
  const double factor = mu * growth;
  const double next_wealth = state.wealth * factor;
  if (!(next_wealth > 0.0) || !std::isfinite(next_wealth)) {
    throw EpisodeTerminated("portfolio wealth is no longer positive");
  }
  return StepOutcome{PortfolioState{next_wealth, action, state.t + 1}, std::log(factor), to, mu, growth,
                     std::move(drifted)};
}

WeightVector project_to_simplex(std::span<const double> raw) {
  if (raw.empty()) throw InvalidWeights("project_to_simplex: empty input");
  double top = raw[0];
  for (double r : raw) {
    if (!std::isfinite(r)) throw InvalidWeights("project_to_simplex: non-finite input");
    top = std::max(top, r);
  }
  std::vector<double> w(raw.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    w[i] = std::exp(raw[i] - top);
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return WeightVector(std::move(w));
}

MarketEnv::MarketEnv(const marketdata::Dataset& data, std::size_t start_day, std::size_t end_day,
                     EnvConfig config)
    : data_(&data),
      start_day_(start_day),
      end_day_(end_day),
      config_(config),
      portfolio_{config.initial_wealth, WeightVector::uniform(data.num_assets()), start_day} {
  config_.validate();
  if (end_day_ >= data.days() || start_day_ >= end_day_) {
    throw ValidationError("MarketEnv: need start_day < end_day < number of days");
  }
  if (start_day_ + 1 < data.first_state_index()) {
    throw InsufficientHistory("MarketEnv: first decision day precedes the first complete state window");
  }
  reset();
}

void MarketEnv::reset() {
  day_ = start_day_ + 1;
  portfolio_ = PortfolioState{config_.initial_wealth, WeightVector::uniform(data_->num_assets()), start_day_};
}

marketdata::StateTensor MarketEnv::observation() const { return data_->state(day_); }

marketdata::StateTensor MarketEnv::next_observation() const {
  return data_->state(std::min(day_ + 1, data_->days() - 1));
}

PriceRelatives MarketEnv::relatives() const {
  return price_relatives(data_->close_row(day_ - 1), data_->close_row(day_));
}

StepOutcome MarketEnv::step(const WeightVector& action) {
  if (done()) throw EpisodeTerminated("MarketEnv: step after the final day");
  StepOutcome out = env::step(portfolio_, action, relatives(), config_.commission);
  portfolio_ = out.next_state;
  ++day_;
  return out;
}

EpisodeTrace run_episode(MarketEnv& env, const Policy& policy) {
  env.reset();
  EpisodeTrace trace;
  trace.days.push_back(env.start_day());
  trace.wealth.push_back(env.portfolio().wealth);
  trace.weights.push_back(env.portfolio().weights.values());
  trace.turnover.push_back(0.0);
  while (!env.done()) {
    const std::size_t day = env.day();
    const StepOutcome out = env.step(policy(env));
    trace.days.push_back(day);
    trace.wealth.push_back(out.next_state.wealth);
    trace.weights.push_back(out.next_state.weights.values());
    trace.turnover.push_back(out.turnover);
  }
  return trace;
}

}  // namespace pikan::env
