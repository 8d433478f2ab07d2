#include <algorithm>
#include <cmath>
#include <numeric>

#include "agent_detail.hpp"
#include "pikan/agents.hpp"
#include "pikan/error.hpp"
#include "pikan/stats.hpp"

namespace pikan::agents {

// Forward pass of policy and value heads over a set of rollout indices, with
// gradient accumulators for everything the on-policy optimizer owns.
struct Agent::PolicyBatch {
  std::vector<std::size_t> index;
  std::vector<kan::ForwardCache> actor_cache;
  std::vector<kan::ForwardCache> value_cache;
  Matrix mean;           // policy mean (pre-softmax)
  Matrix weights;        // softmax of the mean
  std::vector<double> v;
  std::vector<double> logp;
  Matrix d_mean;         // d loss / d mean
  std::vector<double> d_value;
  std::vector<double> d_log_std;

  PolicyBatch(const Agent& agent, const RolloutBuffer& rollout, std::vector<std::size_t> idx)
      : index(std::move(idx)),
        actor_cache(index.size()),
        value_cache(index.size()),
        mean(index.size(), agent.num_assets()),
        weights(index.size(), agent.num_assets()),
        v(index.size()),
        logp(index.size()),
        d_mean(index.size(), agent.num_assets()),
        d_value(index.size(), 0.0),
        d_log_std(agent.num_assets(), 0.0) {
    const auto& ts = rollout.transitions();
    for (std::size_t b = 0; b < index.size(); ++b) {
      const Transition& t = ts[index[b]];
      if (t.state.size() != agent.state_size() || t.raw_action.size() != agent.num_assets()) {
        throw ShapeMismatch("rollout transition does not match the agent layout");
      }
      const auto mu = agent.actor_.forward(t.state, actor_cache[b]);
      std::copy(mu.begin(), mu.end(), mean.row(b).begin());
      const auto w = detail::softmax(mu);
      std::copy(w.begin(), w.end(), weights.row(b).begin());
      v[b] = agent.value_net_.forward(t.state, value_cache[b])[0];
      logp[b] = detail::gaussian_log_prob(mu, agent.log_std_, t.raw_action);
    }
  }

  std::size_t size() const noexcept { return index.size(); }

  // Adds g * d logp_b / d(mean_b, log_std).
  void add_logp_grad(const Agent& agent, const RolloutBuffer& rollout, std::size_t b, double g) {
    const auto& z = rollout.transitions()[index[b]].raw_action;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double inv_var = std::exp(-2.0 * agent.log_std_[j]);
      const double u = z[j] - mean(b, j);
      d_mean(b, j) += g * u * inv_var;
      d_log_std[j] += g * (u * u * inv_var - 1.0);
    }
  }

  // Adds d loss / d weights for the rows of `dw` through the softmax.
  void add_weight_grad(const Matrix& dw) {
    for (std::size_t b = 0; b < size(); ++b) {
      const auto dz = detail::softmax_backward(weights.row(b), dw.row(b));
      for (std::size_t j = 0; j < dz.size(); ++j) d_mean(b, j) += dz[j];
    }
  }

  std::vector<double> gradient(const Agent& agent) const {
    const std::size_t na = agent.actor_.parameter_count();
    const std::size_t m = agent.num_assets();
    std::vector<double> grad(na + m + agent.value_net_.parameter_count(), 0.0);
    std::span<double> g_actor(grad.data(), na);
    std::span<double> g_value(grad.data() + na + m, agent.value_net_.parameter_count());
    for (std::size_t b = 0; b < size(); ++b) {
      agent.actor_.backward(actor_cache[b], d_mean.row(b), g_actor);
      agent.value_net_.backward(value_cache[b], std::span<const double>(&d_value[b], 1), g_value);
    }
    std::copy(d_log_std.begin(), d_log_std.end(), grad.begin() + static_cast<std::ptrdiff_t>(na));
    return grad;
  }

  Matrix stacked(const RolloutBuffer& rollout, bool next) const {
    const auto& ts = rollout.transitions();
    const std::size_t d = ts[index[0]].state.size();
    Matrix out(size(), d);
    for (std::size_t b = 0; b < size(); ++b) {
      const auto& src = next ? ts[index[b]].next_state : ts[index[b]].state;
      if (src.size() != d) throw ShapeMismatch("rollout states differ in shape");
      std::copy(src.begin(), src.end(), out.row(b).begin());
    }
    return out;
  }

  Matrix stored_actions(const RolloutBuffer& rollout) const {
    Matrix out(size(), weights.cols);
    for (std::size_t b = 0; b < size(); ++b) {
      const auto w = detail::softmax(rollout.transitions()[index[b]].raw_action);
      std::copy(w.begin(), w.end(), out.row(b).begin());
    }
    return out;
  }
};

std::vector<std::span<double>> Agent::onpolicy_blocks() {
  std::vector<std::span<double>> blocks = actor_.parameter_blocks();
  blocks.emplace_back(log_std_);
  for (auto b : value_net_.parameter_blocks()) blocks.push_back(b);
  return blocks;
}

namespace {

void require_rollout(const RolloutBuffer& rollout) {
  if (rollout.empty()) throw EmptyRollout("rollout buffer is empty");
  if (!rollout.ready()) throw EmptyRollout("rollout advantages have not been computed");
}

double explained_variance(const RolloutBuffer& rollout) {
  const auto& ret = rollout.returns();
  const double var_ret = stats::sample_variance(ret);
  if (var_ret == 0.0) return kMissing;
  std::vector<double> resid(ret.size());
  for (std::size_t k = 0; k < ret.size(); ++k) resid[k] = ret[k] - rollout.values()[k];
  return 1.0 - stats::sample_variance(resid) / var_ret;
}

std::vector<double> normalized_advantages(const RolloutBuffer& rollout, const std::vector<std::size_t>& idx,
                                          bool normalize) {
  std::vector<double> adv(idx.size());
  for (std::size_t b = 0; b < idx.size(); ++b) adv[b] = rollout.advantages()[idx[b]];
  if (normalize && adv.size() > 1) {
    const double mu = stats::mean(adv);
    const double sd = stats::sample_std(adv);
    for (double& a : adv) a = (a - mu) / (sd + 1e-8);
  }
  return adv;
}

// Global z-score over every element of a matrix.
void standardize(Matrix& x, double eps) {
  const double mu = stats::mean(x.data);
  const double sd = stats::sample_std(x.data);
  for (double& v : x.data) v = (v - mu) / (sd + eps);
}

}  // namespace

std::vector<UpdateMetrics> Agent::ppo_update(const RolloutBuffer& rollout) {
  if (config_.variant.algorithm != Algorithm::kPpo) throw Error("ppo_update called on a " + config_.variant.name() + " agent");
  require_rollout(rollout);
  const auto& pc = config_.physics;
  const std::size_t n = rollout.size();
  const double ev = explained_variance(rollout);
  const double entropy = detail::gaussian_entropy(log_std_);

  std::vector<UpdateMetrics> rows;
  std::vector<std::size_t> order(n);
  bool keep_going = true;
  for (std::size_t epoch = 0; epoch < config_.n_epochs && keep_going; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), sample_rng_);
    for (std::size_t start = 0; start < n; start += config_.minibatch_size) {
      const std::size_t stop = std::min(n, start + config_.minibatch_size);
      PolicyBatch pb(*this, rollout, std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                              order.begin() + static_cast<std::ptrdiff_t>(stop)));
      const std::size_t b_count = pb.size();
      const double inv_b = 1.0 / static_cast<double>(b_count);
      const auto adv = normalized_advantages(rollout, pb.index, config_.normalize_advantage);

      UpdateMetrics row;
      double policy_loss = 0.0, kl = 0.0, clipped = 0.0;
      for (std::size_t b = 0; b < b_count; ++b) {
        const double log_ratio = pb.logp[b] - rollout.log_probs()[pb.index[b]];
        const double r = std::exp(log_ratio);
        const double r_clip = std::clamp(r, 1.0 - config_.clip_range, 1.0 + config_.clip_range);
        const double s1 = adv[b] * r;
        const double s2 = adv[b] * r_clip;
        policy_loss -= std::min(s1, s2) * inv_b;
        kl += ((r - 1.0) - log_ratio) * inv_b;
        if (std::abs(r - 1.0) > config_.clip_range) clipped += inv_b;
        if (s1 <= s2) pb.add_logp_grad(*this, rollout, b, -adv[b] * r * inv_b);
      }
      if (config_.target_kl > 0.0 && kl > 1.5 * config_.target_kl) {
        keep_going = false;
        break;
      }

      double value_loss = 0.0;
      for (std::size_t b = 0; b < b_count; ++b) {
        const double old_v = rollout.values()[pb.index[b]];
        const double ret = rollout.returns()[pb.index[b]];
        double pred = pb.v[b];
        bool live = true;
        if (config_.clip_range_vf > 0.0) {
          const double delta = pred - old_v;
          if (std::abs(delta) > config_.clip_range_vf) {
            pred = old_v + std::clamp(delta, -config_.clip_range_vf, config_.clip_range_vf);
            live = false;
          }
        }
        value_loss += (pred - ret) * (pred - ret) * inv_b;
        if (live) pb.d_value[b] += config_.vf_coef * 2.0 * (pred - ret) * inv_b;
      }

      for (double& g : pb.d_log_std) g -= config_.ent_coef;
      double total = policy_loss - config_.ent_coef * entropy + config_.vf_coef * value_loss;

      if (config_.physics_enabled) {
        const Matrix states = pb.stacked(rollout, false);
        const Matrix next = pb.stacked(rollout, true);
        const Motion motion = observed_motion(states, next);
        vol_ema_ = physics::vol_ema_update(vol_ema_, motion.velocity, pc.vol_beta);
        const bool from_policy = config_.physics_action_source == PhysicsActionSource::kPolicyMean;
        const Matrix w = from_policy ? pb.weights : pb.stored_actions(rollout);
        const Matrix pred = physics::predicted_acceleration(w, pc.mass);
        const double loss = physics::physics_loss(pred, motion.acceleration, pc.loss_clamp);
        total += pc.lambda_base * loss;
        if (from_policy) {
          Matrix dw = physics::physics_loss_gradient(pred, motion.acceleration, pc.loss_clamp);
          for (double& g : dw.data) g *= pc.lambda_base / pc.mass;
          pb.add_weight_grad(dw);
        }
        row.physics_loss = loss;
        row.lambda_adapt = pc.lambda_base;
        row.vol_ema = vol_ema_.mean;
      }

      auto grad = pb.gradient(*this);
      optim::clip_grad_norm(grad, config_.max_grad_norm);
      actor_opt_.step(onpolicy_blocks(), grad);

      row.actor_updated = true;
      row.actor_loss = total;
      row.policy_loss = policy_loss;
      row.value_loss = value_loss;
      row.entropy_loss = -entropy;
      row.approx_kl = kl;
      row.clip_fraction = clipped;
      row.explained_variance = ev;
      rows.push_back(row);
    }
  }
  return rows;
}

UpdateMetrics Agent::a2c_update(const RolloutBuffer& rollout) {
  if (config_.variant.algorithm != Algorithm::kA2c) throw Error("a2c_update called on a " + config_.variant.name() + " agent");
  require_rollout(rollout);
  const auto& pc = config_.physics;
  const std::size_t n = rollout.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  PolicyBatch pb(*this, rollout, all);
  const auto adv = normalized_advantages(rollout, all, config_.normalize_advantage);
  const double entropy = detail::gaussian_entropy(log_std_);

  UpdateMetrics row;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    policy_loss -= adv[b] * pb.logp[b] * inv_n;
    pb.add_logp_grad(*this, rollout, b, -adv[b] * inv_n);
    const double r = pb.v[b] - rollout.returns()[b];
    value_loss += r * r * inv_n;
    pb.d_value[b] += config_.vf_coef * 2.0 * r * inv_n;
  }
  for (double& g : pb.d_log_std) g -= config_.ent_coef;
  double total = policy_loss - config_.ent_coef * entropy + config_.vf_coef * value_loss;

  if (config_.physics_enabled) {
    Matrix states = pb.stacked(rollout, false);
    Matrix next = pb.stacked(rollout, true);
    Matrix accel;
    if (pc.mode == physics::VelocityMode::kFeatureMean) {
      standardize(states, pc.epsilon);
      standardize(next, pc.epsilon);
      Matrix vel(n, states.cols);
      for (std::size_t k = 0; k < vel.data.size(); ++k) vel.data[k] = (next.data[k] - states.data[k]) / pc.dt;
      standardize(vel, pc.epsilon);
      Matrix zero(n, states.cols);
      accel = physics::feature_mean_velocity(zero, vel, context_.layout, pc.dt);
      vol_ema_ = physics::vol_ema_update(vol_ema_, accel, pc.vol_beta);
    } else {
      const Motion motion = observed_motion(states, next);
      vol_ema_ = physics::vol_ema_update(vol_ema_, motion.velocity, pc.vol_beta);
      accel = motion.acceleration;
    }
    const bool from_policy = config_.physics_action_source == PhysicsActionSource::kPolicyMean;
    const Matrix w = from_policy ? pb.weights : pb.stored_actions(rollout);
    const Matrix pred = physics::predicted_acceleration(w, pc.mass);

    const std::size_t count = pred.data.size();
    std::vector<double> resid(count), sq(count);
    for (std::size_t k = 0; k < count; ++k) {
      resid[k] = pred.data[k] - accel.data[k];
      sq[k] = resid[k] * resid[k];
    }
    const double sq_mean = stats::mean(sq);
    const double raw = sq_mean + stats::sample_variance(sq);
    const double loss = pc.loss_clamp.clamp(raw);
    const double scale = std::abs(policy_loss) / (std::abs(loss) + pc.epsilon);
    const double weight = pc.lambda_base * scale;
    total += weight * loss;
    if (from_policy && pc.loss_clamp.contains(raw)) {
      Matrix dw(pred.rows, pred.cols);
      const double nn = static_cast<double>(count);
      for (std::size_t k = 0; k < count; ++k) {
        double d = 2.0 * resid[k] / nn;
        if (count > 1) d += 2.0 * (sq[k] - sq_mean) / (nn - 1.0) * 2.0 * resid[k];
        dw.data[k] = weight * d / pc.mass;
      }
      pb.add_weight_grad(dw);
    }
    row.physics_loss = loss;
    row.lambda_adapt = weight;
    row.vol_ema = vol_ema_.mean;
  }

  auto grad = pb.gradient(*this);
  optim::clip_grad_norm(grad, config_.max_grad_norm);
  actor_opt_.step(onpolicy_blocks(), grad);

  row.actor_updated = true;
  row.actor_loss = total;
  row.policy_loss = policy_loss;
  row.value_loss = value_loss;
  row.entropy_loss = -entropy;
  row.explained_variance = explained_variance(rollout);
  return row;
}

}  // namespace pikan::agents
