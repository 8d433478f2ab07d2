#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pikan/matrix.hpp"

namespace pikan::physics {

struct Interval {
  double lo;
  double hi;

  double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

// Where observed velocities come from.
//  kPrice:       (p_{t+1} - p_t) / (p_t + eps) on the close price of the last
//                window step, one value per asset.
//  kFeatureMean: (s_{t+1} - s_t) / dt on the last window step, averaged over
//                the feature axis, one value per asset.
enum class VelocityMode { kPrice, kFeatureMean };

struct PhysicsConfig {
  double mass = 1.0;
  double dt = 1.0;
  double lambda_base = 1.0;
  Interval loss_clamp{0.0, 10.0};
  Interval lambda_clamp{0.1, 10.0};
  double ema_beta = 0.99;
  double vol_beta = 0.99;
  double epsilon = 1e-8;
  VelocityMode mode = VelocityMode::kPrice;

  void validate() const;
};

struct EmaTracker {
  double mean = 0.0;
  double var = 0.0;
  bool initialized = false;
};

// First call seeds (mean, var) from the batch; later calls blend with beta.
EmaTracker ema_update(const EmaTracker& tracker, double batch_mean, double batch_var, double beta);

double normalize_loss(double value, const EmaTracker& tracker, double epsilon);
std::vector<double> normalize_loss(std::span<const double> values, const EmaTracker& tracker, double epsilon);

Matrix velocity(const Matrix& p_t, const Matrix& p_next, double epsilon);
Matrix observed_acceleration(const Matrix& v, double dt);
Matrix predicted_acceleration(const Matrix& actions, double mass);

// Mean squared residual over every element, clamped.
double physics_loss(const Matrix& pred, const Matrix& obs, Interval clamp);
// Mean over the asset axis for each sample, each clamped.
std::vector<double> physics_loss_per_sample(const Matrix& pred, const Matrix& obs, Interval clamp);

// d physics_loss / d pred. Zero when the clamp is active.
Matrix physics_loss_gradient(const Matrix& pred, const Matrix& obs, Interval clamp);
// Row i holds d loss_i / d pred_i.
Matrix physics_loss_per_sample_gradient(const Matrix& pred, const Matrix& obs, Interval clamp);

// clamp(lambda_base * |actor_loss_mean| / (|mean(phys_norm)| + sqrt(var(phys_norm) + 1e-6)))
double adaptive_lambda(double actor_loss_mean, std::span<const double> phys_norm, double lambda_base,
                       Interval clamp);

// EMA of the batch mean of per-sample cross-asset return std. Diagnostic only.
EmaTracker vol_ema_update(const EmaTracker& tracker, const Matrix& v, double vol_beta);

// Geometry of a flattened (window x assets x features) state.
struct StateLayout {
  std::size_t window = 0;
  std::size_t assets = 0;
  std::size_t features = 0;

  std::size_t size() const noexcept { return window * assets * features; }
  std::size_t index(std::size_t k, std::size_t i, std::size_t j) const noexcept {
    return (k * assets + i) * features + j;
  }
};

// Rows of `states` are flattened states. Returns (batch x assets) values of
// feature `column` at the last window step.
Matrix last_step_feature(const Matrix& states, const StateLayout& layout, std::size_t column);

// Last-step (s_next - s) / dt averaged over features, (batch x assets).
Matrix feature_mean_velocity(const Matrix& states, const Matrix& next_states, const StateLayout& layout, double dt);

}  // namespace pikan::physics
