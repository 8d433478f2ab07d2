#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pikan/buffers.hpp"
#include "pikan/dataset.hpp"
#include "pikan/env.hpp"
#include "pikan/kan.hpp"
#include "pikan/optim.hpp"
#include "pikan/physics.hpp"

namespace pikan::agents {

enum class Algorithm { kDdpg, kTd3, kPpo, kA2c };

struct Variant {
  Algorithm algorithm = Algorithm::kTd3;
  bool physics = true;

  bool off_policy() const noexcept { return algorithm == Algorithm::kDdpg || algorithm == Algorithm::kTd3; }
  // "td3_pinn", "td3", ...
  std::string name() const;
  // "TD3_PINN", "TD3", ...
  std::string display_name() const;
  static Variant parse(std::string_view name);
  bool operator==(const Variant&) const = default;
};

// Which actions enter the on-policy physics term: the current policy mean
// (differentiable) or the actions stored in the rollout (constant).
enum class PhysicsActionSource { kPolicyMean, kRollout };

struct AgentConfig {
  Variant variant;
  std::vector<std::size_t> actor_hidden{16};
  std::vector<std::size_t> critic_hidden{16};
  kan::KanOptions kan;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double gamma = 0.99;
  double tau = 0.005;
  double max_grad_norm = 10.0;

  // Off-policy.
  std::size_t policy_delay = 2;
  double exploration_noise = 0.1;
  double target_noise = 0.2;
  double target_noise_clip = 0.5;
  std::size_t batch_size = 64;
  std::size_t buffer_size = 100000;
  std::size_t learning_starts = 64;
  std::size_t train_freq = 1;
  std::size_t gradient_steps = 1;

  // On-policy.
  std::size_t n_steps = 256;
  std::size_t n_epochs = 10;
  std::size_t minibatch_size = 64;
  double clip_range = 0.2;
  double clip_range_vf = 0.0;  // <= 0 disables value clipping
  double vf_coef = 0.5;
  double ent_coef = 0.0;
  double gae_lambda = 0.95;
  double target_kl = 0.05;     // <= 0 disables early stopping
  bool normalize_advantage = true;
  double log_std_init = -0.5;
  PhysicsActionSource physics_action_source = PhysicsActionSource::kPolicyMean;

  physics::PhysicsConfig physics;
  bool physics_enabled = true;

  std::uint64_t seed = 0;

  // Listing defaults for one algorithm (delay, clamps, velocity mode, ...).
  static AgentConfig defaults(Variant v);
  void validate() const;
};

nlohmann::json to_json(const AgentConfig& config);
// Starts from AgentConfig::defaults for the "algorithm" key and applies every
// other key of `agent` and `physics`. Unknown keys raise ConfigError.
AgentConfig agent_config_from_json(const nlohmann::json& agent, const nlohmann::json& physics);

// Converts stored (normalized) close features back to prices for the
// price-mode velocity.
struct PhysicsContext {
  physics::StateLayout layout;
  std::size_t price_column = 3;
  std::vector<double> price_mean;  // per asset
  std::vector<double> price_std;   // per asset, population

  static PhysicsContext from_dataset(const marketdata::Dataset& data);
  // Identity decoding, for tests and synthetic batches.
  static PhysicsContext identity(physics::StateLayout layout, std::size_t price_column = 3);
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// One gradient step. Fields that the algorithm does not produce stay NaN.
struct UpdateMetrics {
  double critic_loss = kMissing;
  double actor_loss = kMissing;
  bool actor_updated = false;
  double policy_loss = kMissing;
  double value_loss = kMissing;
  double entropy_loss = kMissing;
  double approx_kl = kMissing;
  double clip_fraction = kMissing;
  double explained_variance = kMissing;
  double physics_loss = kMissing;
  double physics_loss_norm = kMissing;
  double lambda_adapt = kMissing;
  double vol_ema = kMissing;
};

struct ActResult {
  env::WeightVector weights;
  std::vector<double> raw;
  double value = 0.0;     // on-policy: V(s)
  double log_prob = 0.0;  // on-policy: log pi(raw | s)
};

class Agent {
 public:
  Agent(AgentConfig config, PhysicsContext context);

  const AgentConfig& config() const noexcept { return config_; }
  const PhysicsContext& context() const noexcept { return context_; }
  std::size_t state_size() const noexcept { return context_.layout.size(); }
  std::size_t num_assets() const noexcept { return context_.layout.assets; }

  // Pre-softmax actor output.
  std::vector<double> actor_logits(std::span<const double> state) const;
  env::WeightVector act(const marketdata::StateTensor& state, bool explore);
  ActResult act_detailed(std::span<const double> state, bool explore);

  double value(std::span<const double> state) const;
  double log_prob(std::span<const double> state, std::span<const double> raw) const;

  UpdateMetrics ddpg_update(const TransitionBatch& batch);
  UpdateMetrics td3_update(const TransitionBatch& batch, std::size_t step_index);
  std::vector<UpdateMetrics> ppo_update(const RolloutBuffer& rollout);
  UpdateMetrics a2c_update(const RolloutBuffer& rollout);

  const kan::KanNetwork& actor() const noexcept { return actor_; }
  const kan::KanNetwork& actor_target() const noexcept { return actor_target_; }
  const std::vector<kan::KanNetwork>& critics() const noexcept { return critics_; }
  const std::vector<kan::KanNetwork>& critic_targets() const noexcept { return critic_targets_; }
  const kan::KanNetwork& value_net() const noexcept { return value_net_; }
  const std::vector<double>& log_std() const noexcept { return log_std_; }
  const physics::EmaTracker& actor_ema() const noexcept { return actor_ema_; }
  const physics::EmaTracker& physics_ema() const noexcept { return physics_ema_; }
  const physics::EmaTracker& vol_ema() const noexcept { return vol_ema_; }
  std::mt19937_64& sampling_rng() noexcept { return sample_rng_; }

  nlohmann::json checkpoint() const;
  // Throws CheckpointShapeMismatch when the stored networks do not fit the
  // layout of `context`.
  static Agent from_checkpoint(const nlohmann::json& j, PhysicsContext context);

 private:
  struct Motion {
    Matrix velocity;
    Matrix acceleration;
  };
  struct PolicyBatch;

  // Observed velocity and acceleration (batch x assets) for the configured mode.
  Motion observed_motion(const Matrix& states, const Matrix& next_states) const;
  double critic_step(const TransitionBatch& batch);
  UpdateMetrics actor_step(const TransitionBatch& batch, bool per_sample);
  std::vector<double> critic_input(std::span<const double> state, std::span<const double> weights) const;
  std::vector<std::span<double>> onpolicy_blocks();

  AgentConfig config_;
  PhysicsContext context_;
  kan::KanNetwork actor_;
  kan::KanNetwork actor_target_;
  std::vector<kan::KanNetwork> critics_;
  std::vector<kan::KanNetwork> critic_targets_;
  kan::KanNetwork value_net_;
  std::vector<double> log_std_;
  optim::Adam actor_opt_;
  optim::Adam critic_opt_;
  physics::EmaTracker actor_ema_;
  physics::EmaTracker physics_ema_;
  physics::EmaTracker vol_ema_;
  std::mt19937_64 explore_rng_;
  std::mt19937_64 noise_rng_;
  std::mt19937_64 sample_rng_;
};

// Per-update rows plus the column layout they are written with.
struct TrainLog {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  bool empty() const noexcept { return rows.empty(); }
  // RFC-4180, LF line endings, NaN written as an empty field.
  void write_csv(std::ostream& out) const;
};

std::vector<std::string> train_log_columns(const AgentConfig& config);

struct TrainSchedule {
  std::size_t total_steps = 0;
  std::size_t checkpoint_every = 0;  // 0 disables periodic checkpoints
  std::function<void(const Agent&, std::size_t env_step)> on_checkpoint;
};

// Runs env steps until the schedule is exhausted, resetting the env at the
// end of each episode, and performs updates at the algorithm's cadence.
TrainLog train(Agent& agent, env::MarketEnv& env, const TrainSchedule& schedule);

// Deterministic (explore = false) pass over the env.
env::EpisodeTrace evaluate(Agent& agent, env::MarketEnv& env);

}  // namespace pikan::agents
