#include <algorithm>
#include <cmath>

#include "agent_detail.hpp"
#include "pikan/agents.hpp"
#include "pikan/error.hpp"
#include "pikan/stats.hpp"

namespace pikan::agents {

namespace {

void check_batch(const TransitionBatch& batch, std::size_t state_size, std::size_t assets) {
  if (batch.size() < 2) throw BufferTooSmall("update needs a batch of at least 2 transitions");
  if (batch.states.cols != state_size || batch.next_states.cols != state_size || batch.actions.cols != assets ||
      batch.states.rows != batch.size() || batch.next_states.rows != batch.size() ||
      batch.actions.rows != batch.size() || batch.dones.size() != batch.size()) {
    throw ShapeMismatch("transition batch does not match the agent layout");
  }
}

}  // namespace

double Agent::critic_step(const TransitionBatch& batch) {
  const std::size_t n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto z = actor_target_.forward(batch.next_states.row(i));
    if (config_.target_noise > 0.0) {
      std::normal_distribution<double> noise(0.0, config_.target_noise);
      for (double& v : z) v += std::clamp(noise(noise_rng_), -config_.target_noise_clip, config_.target_noise_clip);
    }
    const auto a_next = detail::softmax(z);
    const auto input = critic_input(batch.next_states.row(i), a_next);
    double q_next = critic_targets_[0].forward(input)[0];
    for (std::size_t k = 1; k < critic_targets_.size(); ++k) {
      q_next = std::min(q_next, critic_targets_[k].forward(input)[0]);
    }
    targets[i] = batch.rewards[i] + config_.gamma * (1.0 - batch.dones[i]) * q_next;
  }

  std::vector<double> grad(critic_opt_.size(), 0.0);
  double loss = 0.0;
  std::size_t offset = 0;
  kan::ForwardCache cache;
  for (auto& critic : critics_) {
    std::span<double> g(grad.data() + offset, critic.parameter_count());
    for (std::size_t i = 0; i < n; ++i) {
      const auto input = critic_input(batch.states.row(i), batch.actions.row(i));
      const double q = critic.forward(input, cache)[0];
      const double r = q - targets[i];
      loss += r * r * inv_n;
      const double up = 2.0 * r * inv_n;
      critic.backward(cache, std::span<const double>(&up, 1), g);
    }
    offset += critic.parameter_count();
  }
  optim::clip_grad_norm(grad, config_.max_grad_norm);
  std::vector<std::span<double>> blocks;
  for (auto& critic : critics_) {
    for (auto b : critic.parameter_blocks()) blocks.push_back(b);
  }
  critic_opt_.step(blocks, grad);
  return loss;
}

UpdateMetrics Agent::actor_step(const TransitionBatch& batch, bool per_sample) {
  const std::size_t n = batch.size();
  const std::size_t m = num_assets();
  const double inv_n = 1.0 / static_cast<double>(n);
  const auto& pc = config_.physics;
  kan::KanNetwork& q1 = critics_[0];

  std::vector<kan::ForwardCache> actor_caches(n);
  Matrix weights(n, m);
  std::vector<double> q(n);
  Matrix dq_da(n, m);
  std::vector<double> scratch(q1.parameter_count());
  kan::ForwardCache critic_cache;
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = actor_.forward(batch.states.row(i), actor_caches[i]);
    const auto w = detail::softmax(z);
    std::copy(w.begin(), w.end(), weights.row(i).begin());
    q[i] = q1.forward(critic_input(batch.states.row(i), w), critic_cache)[0];
    const double one = 1.0;
    const auto dx = q1.backward(critic_cache, std::span<const double>(&one, 1), scratch);
    std::copy(dx.end() - static_cast<std::ptrdiff_t>(m), dx.end(), dq_da.row(i).begin());
  }

  UpdateMetrics out;
  out.actor_updated = true;

  // Actor term, normalized by the running Q statistics.
  actor_ema_ = physics::ema_update(actor_ema_, stats::mean(q), stats::sample_variance(q), pc.ema_beta);
  const double actor_scale = 1.0 / std::sqrt(actor_ema_.var + pc.epsilon);
  double actor_mean = 0.0;
  for (double v : q) actor_mean += -(v - actor_ema_.mean) * actor_scale * inv_n;
  Matrix dloss_dw(n, m);
  for (std::size_t k = 0; k < dloss_dw.data.size(); ++k) dloss_dw.data[k] = -actor_scale * inv_n * dq_da.data[k];
  double total = actor_mean;

  if (config_.physics_enabled) {
    const Motion motion = observed_motion(batch.states, batch.next_states);
    vol_ema_ = physics::vol_ema_update(vol_ema_, motion.velocity, pc.vol_beta);
    const Matrix pred = physics::predicted_acceleration(weights, pc.mass);
    const auto per = physics::physics_loss_per_sample(pred, motion.acceleration, pc.loss_clamp);
    Matrix dloss_dpred;
    double lambda = 0.0;
    double phys_norm_mean = 0.0;
    double phys_raw = 0.0;
    if (per_sample) {
      physics_ema_ = physics::ema_update(physics_ema_, stats::mean(per), stats::sample_variance(per), pc.ema_beta);
      const auto norm = physics::normalize_loss(per, physics_ema_, pc.epsilon);
      lambda = physics::adaptive_lambda(actor_mean, norm, pc.lambda_base, pc.lambda_clamp);
      phys_raw = stats::mean(per);
      phys_norm_mean = stats::mean(norm);
      dloss_dpred = physics::physics_loss_per_sample_gradient(pred, motion.acceleration, pc.loss_clamp);
      for (double& g : dloss_dpred.data) g *= inv_n;
    } else {
      phys_raw = physics::physics_loss(pred, motion.acceleration, pc.loss_clamp);
      physics_ema_ = physics::ema_update(physics_ema_, phys_raw, stats::sample_variance(per), pc.ema_beta);
      const double norm = physics::normalize_loss(phys_raw, physics_ema_, pc.epsilon);
      lambda = physics::adaptive_lambda(actor_mean, std::span<const double>(&norm, 1), pc.lambda_base,
                                        pc.lambda_clamp);
      phys_norm_mean = norm;
      dloss_dpred = physics::physics_loss_gradient(pred, motion.acceleration, pc.loss_clamp);
    }
    const double phys_scale = lambda / std::sqrt(physics_ema_.var + pc.epsilon) / pc.mass;
    for (std::size_t k = 0; k < dloss_dw.data.size(); ++k) dloss_dw.data[k] += phys_scale * dloss_dpred.data[k];
    total += lambda * phys_norm_mean;
    out.physics_loss = phys_raw;
    out.physics_loss_norm = phys_norm_mean;
    out.lambda_adapt = lambda;
    out.vol_ema = vol_ema_.mean;
  }
  out.actor_loss = total;

  std::vector<double> grad(actor_.parameter_count(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto dz = detail::softmax_backward(weights.row(i), dloss_dw.row(i));
    actor_.backward(actor_caches[i], dz, grad);
  }
  optim::clip_grad_norm(grad, config_.max_grad_norm);
  actor_opt_.step(actor_.parameter_blocks(), grad);
  return out;
}

UpdateMetrics Agent::ddpg_update(const TransitionBatch& batch) {
  if (config_.variant.algorithm != Algorithm::kDdpg) throw Error("ddpg_update called on a " + config_.variant.name() + " agent");
  check_batch(batch, state_size(), num_assets());
  const double critic_loss = critic_step(batch);
  UpdateMetrics out = actor_step(batch, false);
  out.critic_loss = critic_loss;
  kan::polyak_update(critic_targets_[0], critics_[0], config_.tau);
  kan::polyak_update(actor_target_, actor_, config_.tau);
  return out;
}

UpdateMetrics Agent::td3_update(const TransitionBatch& batch, std::size_t step_index) {
  if (config_.variant.algorithm != Algorithm::kTd3) throw Error("td3_update called on a " + config_.variant.name() + " agent");
  check_batch(batch, state_size(), num_assets());
  const double critic_loss = critic_step(batch);
  UpdateMetrics out;
  if (step_index % config_.policy_delay == 0) {
    out = actor_step(batch, true);
    kan::polyak_update(actor_target_, actor_, config_.tau);
  }
  out.critic_loss = critic_loss;
  for (std::size_t k = 0; k < critics_.size(); ++k) kan::polyak_update(critic_targets_[k], critics_[k], config_.tau);
  return out;
}

}  // namespace pikan::agents
