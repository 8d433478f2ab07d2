#include "pikan/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <numeric>

#include <spdlog/spdlog.h>

#include "pikan/error.hpp"

namespace pikan::baselines {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Shared tail of OLMAR/RMR/PAMR: w + step * direction, projected.
StepResult move(std::span<const double> w, std::span<const double> direction, double step) {
  std::vector<double> raw(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) raw[i] = w[i] + step * direction[i];
  return {project_simplex_euclidean(raw), StepStatus::kUpdated};
}

std::vector<double> centered(std::span<const double> x) {
  const double mu = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - mu;
  return out;
}

double sum_of_distances(const std::vector<std::vector<double>>& points, std::span<const double> x) {
  double s = 0.0;
  for (const auto& p : points) s += distance(p, x);
  return s;
}

// Solves a x = b for symmetric positive definite a (row-major, n x n) by
// Cholesky. Returns false when a is not numerically positive definite.
bool cholesky_solve(std::vector<double> a, std::vector<double>& b, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 1e-14 * std::abs(a[j * n + j])) || !(d > 0.0)) return false;
    a[j * n + j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = v / a[j * n + j];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= a[i * n + k] * b[k];
    b[i] /= a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) b[i] -= a[k * n + i] * b[k];
    b[i] /= a[i * n + i];
  }
  return true;
}

}  // namespace

std::string strategy_name(StrategyId id) {
  switch (id) {
    case StrategyId::kUbah: return "UBAH";
    case StrategyId::kCrp: return "CRP";
    case StrategyId::kOlmar: return "OLMAR";
    case StrategyId::kRmr: return "RMR";
    case StrategyId::kPamr: return "PAMR";
  }
  return "?";
}

StrategyId parse_strategy(std::string_view name) {
  std::string n(name);
  for (char& c : n) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (StrategyId id : {StrategyId::kUbah, StrategyId::kCrp, StrategyId::kOlmar, StrategyId::kRmr, StrategyId::kPamr}) {
    if (strategy_name(id) == n) return id;
  }
  throw UnknownStrategy("unknown strategy '" + std::string(name) + "'");
}

void StrategyParams::validate(std::size_t assets) const {
  if (window < 2) throw ConfigError("baselines.window must be at least 2");
  if (!(olmar_epsilon >= 1.0) || !(rmr_epsilon >= 1.0)) throw ConfigError("baselines mean-reversion epsilon must be >= 1");
  if (!(pamr_epsilon >= 0.0)) throw ConfigError("baselines.pamr_epsilon must be >= 0");
  if (!(median_tolerance > 0.0) || median_max_iterations < 1) throw ConfigError("baselines median settings invalid");
  if (!crp_target.empty()) {
    if (crp_target.size() != assets) throw ConfigError("baselines.crp_target length differs from the asset count");
    try {
      env::WeightVector check(crp_target);
    } catch (const InvalidWeights& e) {
      throw ConfigError(std::string("baselines.crp_target: ") + e.what());
    }
  }
}

std::vector<double> project_simplex_euclidean(std::span<const double> v) {
  if (v.empty()) throw DimensionMismatch("simplex projection of an empty vector");
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  std::vector<double> w(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    w[i] = std::max(v[i] - theta, 0.0);
    sum += w[i];
  }
  // Removes the rounding residue of the threshold.
  for (double& x : w) x /= sum;
  return w;
}

MedianResult geometric_median(const std::vector<std::vector<double>>& points, double tolerance, int max_iterations) {
  if (points.empty()) throw InsufficientData("geometric median of no points");
  const std::size_t dim = points[0].size();
  for (const auto& p : points) {
    if (p.size() != dim) throw DimensionMismatch("geometric median points differ in dimension");
  }
  MedianResult r;
  // A data point x_k is the median when the pull of the other points,
  // |sum (x_j - x_k) / |x_j - x_k||, is below its multiplicity. Equality is
  // left to the iteration so two points resolve to their midpoint.
  for (const auto& candidate : points) {
    std::vector<double> pull(dim, 0.0);
    double weight = 0.0;
    for (const auto& p : points) {
      const double d = distance(p, candidate);
      if (d < 1e-12) {
        weight += 1.0;
        continue;
      }
      for (std::size_t i = 0; i < dim; ++i) pull[i] += (p[i] - candidate[i]) / d;
    }
    if (std::sqrt(dot(pull, pull)) < weight - 1e-9) {
      r.point = candidate;
      r.iterations = 0;
      return r;
    }
  }
  r.point.assign(dim, 0.0);
  for (const auto& p : points) {
    for (std::size_t i = 0; i < dim; ++i) r.point[i] += p[i] / static_cast<double>(points.size());
  }
  // Weiszfeld slows to a crawl when the median sits close to a data point.
  // Each iteration also tries a Newton step on the same objective and keeps
  // whichever candidate has the smaller sum of distances.
  for (r.iterations = 1; r.iterations <= max_iterations; ++r.iterations) {
    std::vector<double> num(dim, 0.0), grad(dim, 0.0), hess(dim * dim, 0.0);
    double den = 0.0;
    for (const auto& p : points) {
      const double d = distance(p, r.point);
      if (d < 1e-12) continue;
      std::vector<double> u(dim);
      for (std::size_t i = 0; i < dim; ++i) {
        num[i] += p[i] / d;
        u[i] = (r.point[i] - p[i]) / d;
        grad[i] += u[i];
      }
      den += 1.0 / d;
      for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) hess[i * dim + j] += ((i == j ? 1.0 : 0.0) - u[i] * u[j]) / d;
      }
    }
    if (den == 0.0) return r;  // every point coincides with the estimate
    for (double& x : num) x /= den;
    const double best = sum_of_distances(points, num);
    std::vector<double> step(dim);
    for (std::size_t i = 0; i < dim; ++i) step[i] = -grad[i];
    if (cholesky_solve(hess, step, dim)) {
      std::vector<double> newton(dim);
      for (std::size_t i = 0; i < dim; ++i) newton[i] = r.point[i] + step[i];
      if (sum_of_distances(points, newton) < best) num = std::move(newton);
    }
    const double shift = distance(num, r.point);
    r.point = std::move(num);
    if (shift <= tolerance) return r;
  }
  r.converged = false;
  r.iterations = max_iterations;
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<double> col;
    col.reserve(points.size());
    for (const auto& p : points) col.push_back(p[i]);
    std::sort(col.begin(), col.end());
    const std::size_t n = col.size();
    r.point[i] = n % 2 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
  }
  spdlog::warn("Weiszfeld did not converge in {} iterations; using the coordinate-wise median", max_iterations);
  return r;
}

StepResult mean_reversion_step(std::span<const double> w, std::span<const double> x_hat, double epsilon) {
  if (w.size() != x_hat.size()) throw DimensionMismatch("mean_reversion_step: weights and prediction differ in length");
  const auto dir = centered(x_hat);
  const double norm2 = dot(dir, dir);
  if (norm2 == 0.0) return {std::vector<double>(w.begin(), w.end()), StepStatus::kDegenerate};
  const double tau = std::max(0.0, (epsilon - dot(w, x_hat)) / norm2);
  if (tau == 0.0) return {std::vector<double>(w.begin(), w.end()), StepStatus::kPassive};
  return move(w, dir, tau);
}

StepResult pamr_step(std::span<const double> w, std::span<const double> y, double epsilon) {
  if (w.size() != y.size()) throw DimensionMismatch("pamr_step: weights and relatives differ in length");
  const auto dir = centered(y);
  const double norm2 = dot(dir, dir);
  if (norm2 == 0.0) return {std::vector<double>(w.begin(), w.end()), StepStatus::kDegenerate};
  const double loss = std::max(0.0, dot(w, y) - epsilon);
  if (loss == 0.0) return {std::vector<double>(w.begin(), w.end()), StepStatus::kPassive};
  return move(w, dir, -loss / norm2);
}

Strategy::Strategy(StrategyId id, StrategyParams params, std::size_t assets)
    : id_(id), params_(std::move(params)), assets_(assets), weights_(env::WeightVector::uniform(assets)) {
  if (assets == 0) throw DimensionMismatch("strategy needs at least one asset");
  params_.validate(assets);
  reset();
}

void Strategy::reset() {
  weights_ = id_ == StrategyId::kCrp && !params_.crp_target.empty() ? env::WeightVector(params_.crp_target)
                                                                     : env::WeightVector::uniform(assets_);
  price_.assign(assets_, 1.0);
  history_.clear();
  history_.push_back(price_);
}

env::WeightVector Strategy::decide(const env::PriceRelatives& y) {
  if (y.size() != assets_) throw DimensionMismatch("strategy: price relatives differ from the asset count");
  for (std::size_t i = 0; i < assets_; ++i) price_[i] *= y[i];
  history_.push_back(price_);
  while (history_.size() > params_.window) history_.pop_front();

  const auto& w = weights_.values();
  switch (id_) {
    case StrategyId::kUbah:
      weights_ = env::drift_weights(weights_, y);
      break;
    case StrategyId::kCrp:
      break;
    case StrategyId::kOlmar:
    case StrategyId::kRmr: {
      if (history_.size() < params_.window) break;
      std::vector<double> x_hat(assets_);
      double eps = params_.olmar_epsilon;
      if (id_ == StrategyId::kOlmar) {
        for (const auto& p : history_) {
          for (std::size_t i = 0; i < assets_; ++i) x_hat[i] += p[i] / static_cast<double>(history_.size());
        }
      } else {
        eps = params_.rmr_epsilon;
        x_hat = geometric_median({history_.begin(), history_.end()}, params_.median_tolerance,
                                 params_.median_max_iterations)
                    .point;
      }
      for (std::size_t i = 0; i < assets_; ++i) x_hat[i] /= price_[i];
      weights_ = env::WeightVector(mean_reversion_step(w, x_hat, eps).weights);
      break;
    }
    case StrategyId::kPamr:
      weights_ = env::WeightVector(pamr_step(w, y.values(), params_.pamr_epsilon).weights);
      break;
  }
  return weights_;
}

env::EpisodeTrace run_strategy(Strategy& strategy, env::MarketEnv& env) {
  if (env.num_assets() != strategy.weights().size()) throw DimensionMismatch("strategy and env differ in asset count");
  strategy.reset();
  return env::run_episode(env, [&](const env::MarketEnv& e) { return strategy.decide(e.relatives()); });
}

}  // namespace pikan::baselines
