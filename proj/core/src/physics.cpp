#include "pikan/physics.hpp"

#include <cmath>

#include "pikan/error.hpp"
#include "pikan/stats.hpp"

namespace pikan::physics {

void PhysicsConfig::validate() const {
  if (!(mass > 0.0)) throw ValidationError("physics.mass must be positive");
  if (!(dt > 0.0)) throw ValidationError("physics.dt must be positive");
  if (!(lambda_base >= 0.0)) throw ValidationError("physics.lambda_base must be non-negative");
  if (!(loss_clamp.lo <= loss_clamp.hi)) throw ValidationError("physics.loss_clamp must be ordered");
  if (!(lambda_clamp.lo <= lambda_clamp.hi)) throw ValidationError("physics.lambda_clamp must be ordered");
  if (!(ema_beta > 0.0 && ema_beta < 1.0)) throw ValidationError("physics.ema_beta must lie in (0, 1)");
  if (!(vol_beta > 0.0 && vol_beta < 1.0)) throw ValidationError("physics.vol_beta must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ValidationError("physics.epsilon must be positive");
}

EmaTracker ema_update(const EmaTracker& tracker, double batch_mean, double batch_var, double beta) {
  if (!(batch_var >= 0.0)) throw ValidationError("ema_update: negative batch variance");
  if (!tracker.initialized) return EmaTracker{batch_mean, batch_var, true};
  return EmaTracker{beta * tracker.mean + (1.0 - beta) * batch_mean, beta * tracker.var + (1.0 - beta) * batch_var,
                    true};
}

double normalize_loss(double value, const EmaTracker& tracker, double epsilon) {
  return (value - tracker.mean) / std::sqrt(tracker.var + epsilon);
}

std::vector<double> normalize_loss(std::span<const double> values, const EmaTracker& tracker, double epsilon) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = normalize_loss(values[i], tracker, epsilon);
  return out;
}

Matrix velocity(const Matrix& p_t, const Matrix& p_next, double epsilon) {
  if (!p_t.same_shape(p_next)) throw ShapeMismatch("velocity: price matrices differ in shape");
  Matrix v(p_t.rows, p_t.cols);
  for (std::size_t k = 0; k < v.data.size(); ++k) v.data[k] = (p_next.data[k] - p_t.data[k]) / (p_t.data[k] + epsilon);
  return v;
}

Matrix observed_acceleration(const Matrix& v, double dt) {
  if (!(dt > 0.0)) throw ValidationError("observed_acceleration: dt must be positive");
  Matrix a = v;
  for (double& x : a.data) x /= dt;
  return a;
}

Matrix predicted_acceleration(const Matrix& actions, double mass) {
  if (!(mass > 0.0)) throw ValidationError("predicted_acceleration: mass must be positive");
  Matrix a = actions;
  for (double& x : a.data) x /= mass;
  return a;
}

double physics_loss(const Matrix& pred, const Matrix& obs, Interval clamp) {
  if (!pred.same_shape(obs)) throw ShapeMismatch("physics_loss: prediction and observation differ in shape");
  if (pred.data.empty()) throw ShapeMismatch("physics_loss: empty batch");
  double ss = 0.0;
  for (std::size_t k = 0; k < pred.data.size(); ++k) {
    const double r = pred.data[k] - obs.data[k];
    ss += r * r;
  }
  return clamp.clamp(ss / static_cast<double>(pred.data.size()));
}

std::vector<double> physics_loss_per_sample(const Matrix& pred, const Matrix& obs, Interval clamp) {
  if (!pred.same_shape(obs)) throw ShapeMismatch("physics_loss: prediction and observation differ in shape");
  if (pred.cols == 0) throw ShapeMismatch("physics_loss: no assets");
  std::vector<double> out(pred.rows);
  for (std::size_t i = 0; i < pred.rows; ++i) {
    double ss = 0.0;
    for (std::size_t j = 0; j < pred.cols; ++j) {
      const double r = pred(i, j) - obs(i, j);
      ss += r * r;
    }
    out[i] = clamp.clamp(ss / static_cast<double>(pred.cols));
  }
  return out;
}

Matrix physics_loss_gradient(const Matrix& pred, const Matrix& obs, Interval clamp) {
  if (!pred.same_shape(obs)) throw ShapeMismatch("physics_loss: prediction and observation differ in shape");
  Matrix g(pred.rows, pred.cols);
  const double n = static_cast<double>(pred.data.size());
  double ss = 0.0;
  for (std::size_t k = 0; k < pred.data.size(); ++k) ss += (pred.data[k] - obs.data[k]) * (pred.data[k] - obs.data[k]);
  if (!clamp.contains(ss / n)) return g;
  for (std::size_t k = 0; k < pred.data.size(); ++k) g.data[k] = 2.0 * (pred.data[k] - obs.data[k]) / n;
  return g;
}

Matrix physics_loss_per_sample_gradient(const Matrix& pred, const Matrix& obs, Interval clamp) {
  if (!pred.same_shape(obs)) throw ShapeMismatch("physics_loss: prediction and observation differ in shape");
  Matrix g(pred.rows, pred.cols);
  const double n = static_cast<double>(pred.cols);
  for (std::size_t i = 0; i < pred.rows; ++i) {
    double ss = 0.0;
    for (std::size_t j = 0; j < pred.cols; ++j) ss += (pred(i, j) - obs(i, j)) * (pred(i, j) - obs(i, j));
    if (!clamp.contains(ss / n)) continue;
    for (std::size_t j = 0; j < pred.cols; ++j) g(i, j) = 2.0 * (pred(i, j) - obs(i, j)) / n;
  }
  return g;
}

double adaptive_lambda(double actor_loss_mean, std::span<const double> phys_norm, double lambda_base,
                       Interval clamp) {
  if (phys_norm.empty()) throw ShapeMismatch("adaptive_lambda: empty physics loss batch");
  const double mag_actor = std::abs(actor_loss_mean);
  const double mag_phys = std::abs(stats::mean(phys_norm));
  const double var_penalty = std::sqrt(stats::sample_variance(phys_norm) + 1e-6);
  const double raw = mag_actor / (mag_phys + var_penalty) * lambda_base;
  // NaN inputs would slip through a plain clamp.
  if (std::isnan(raw)) return clamp.lo;
  return clamp.clamp(raw);
}

EmaTracker vol_ema_update(const EmaTracker& tracker, const Matrix& v, double vol_beta) {
  if (v.rows == 0) throw ShapeMismatch("vol_ema_update: empty velocity field");
  double acc = 0.0;
  for (std::size_t i = 0; i < v.rows; ++i) acc += stats::sample_std(v.row(i));
  const double batch = acc / static_cast<double>(v.rows);
  if (!tracker.initialized) return EmaTracker{batch, 0.0, true};
  return EmaTracker{vol_beta * tracker.mean + (1.0 - vol_beta) * batch, 0.0, true};
}

Matrix last_step_feature(const Matrix& states, const StateLayout& layout, std::size_t column) {
  if (states.cols != layout.size()) throw ShapeMismatch("last_step_feature: state width differs from layout");
  if (column >= layout.features) throw ShapeMismatch("last_step_feature: feature column out of range");
  Matrix out(states.rows, layout.assets);
  for (std::size_t b = 0; b < states.rows; ++b) {
    for (std::size_t i = 0; i < layout.assets; ++i) out(b, i) = states(b, layout.index(layout.window - 1, i, column));
  }
  return out;
}

Matrix feature_mean_velocity(const Matrix& states, const Matrix& next_states, const StateLayout& layout, double dt) {
  if (!states.same_shape(next_states) || states.cols != layout.size()) {
    throw ShapeMismatch("feature_mean_velocity: state batches differ from layout");
  }
  Matrix out(states.rows, layout.assets);
  for (std::size_t b = 0; b < states.rows; ++b) {
    for (std::size_t i = 0; i < layout.assets; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < layout.features; ++j) {
        const std::size_t k = layout.index(layout.window - 1, i, j);
        acc += (next_states(b, k) - states(b, k)) / dt;
      }
      out(b, i) = acc / static_cast<double>(layout.features);
    }
  }
  return out;
}

}  // namespace pikan::physics
