#include <cmath>
#include <ostream>

#include <spdlog/spdlog.h>

#include "pikan/agents.hpp"
#include "pikan/csv.hpp"
#include "pikan/error.hpp"

namespace pikan::agents {

namespace {

struct RewardWindow {
  double sum = 0.0;
  std::size_t count = 0;

  void add(double r) {
    sum += r;
    ++count;
  }
  double mean() const { return count == 0 ? kMissing : sum / static_cast<double>(count); }
  void clear() { *this = {}; }
};

std::vector<double> make_row(const AgentConfig& config, std::size_t update, std::size_t env_step, double reward,
                             const UpdateMetrics& m) {
  std::vector<double> row{static_cast<double>(update), static_cast<double>(env_step), reward};
  if (config.variant.off_policy()) {
    row.insert(row.end(), {m.critic_loss, m.actor_loss, m.actor_updated ? 1.0 : 0.0});
    if (config.variant.physics) row.insert(row.end(), {m.physics_loss, m.physics_loss_norm, m.lambda_adapt, m.vol_ema});
  } else {
    row.insert(row.end(), {m.actor_loss, m.policy_loss, m.value_loss, m.entropy_loss, m.approx_kl, m.clip_fraction,
                           m.explained_variance});
    if (config.variant.physics) row.insert(row.end(), {m.physics_loss, m.lambda_adapt, m.vol_ema});
  }
  return row;
}

Transition observe(const ActResult& act, double reward, bool done,
                   const marketdata::StateTensor& state, const marketdata::StateTensor& next) {
  return Transition{state.values, act.weights.values(), act.raw, reward, next.values, done};
}

void maybe_checkpoint(const Agent& agent, const TrainSchedule& schedule, std::size_t step) {
  if (schedule.checkpoint_every > 0 && step % schedule.checkpoint_every == 0 && schedule.on_checkpoint) {
    schedule.on_checkpoint(agent, step);
  }
}

TrainLog train_off_policy(Agent& agent, env::MarketEnv& env, const TrainSchedule& schedule) {
  const AgentConfig& cfg = agent.config();
  TrainLog log{train_log_columns(cfg), {}};
  ReplayBuffer buffer(cfg.buffer_size);
  RewardWindow rewards;
  std::size_t updates = 0;
  env.reset();
  for (std::size_t step = 1; step <= schedule.total_steps; ++step) {
    if (env.done()) env.reset();
    const auto state = env.observation();
    const auto next = env.next_observation();
    const ActResult act = agent.act_detailed(state.flat(), true);
    const env::StepOutcome out = env.step(act.weights);
    buffer.add(observe(act, out.reward, env.done(), state, next));
    rewards.add(out.reward);

    if (step >= cfg.learning_starts && buffer.size() >= cfg.batch_size && step % cfg.train_freq == 0) {
      const double mean_reward = rewards.mean();
      for (std::size_t g = 0; g < cfg.gradient_steps; ++g) {
        const TransitionBatch batch = buffer.sample(cfg.batch_size, agent.sampling_rng());
        ++updates;
        const UpdateMetrics m = cfg.variant.algorithm == Algorithm::kDdpg ? agent.ddpg_update(batch)
                                                                          : agent.td3_update(batch, updates);
        log.rows.push_back(make_row(cfg, updates, step, mean_reward, m));
      }
      rewards.clear();
    }
    maybe_checkpoint(agent, schedule, step);
  }
  return log;
}

TrainLog train_on_policy(Agent& agent, env::MarketEnv& env, const TrainSchedule& schedule) {
  const AgentConfig& cfg = agent.config();
  TrainLog log{train_log_columns(cfg), {}};
  RolloutBuffer rollout;
  std::size_t updates = 0;
  std::size_t step = 0;
  env.reset();
  while (step < schedule.total_steps) {
    rollout.clear();
    RewardWindow rewards;
    std::vector<double> last_next;
    while (rollout.size() < cfg.n_steps && step < schedule.total_steps) {
      if (env.done()) env.reset();
      const auto state = env.observation();
      const auto next = env.next_observation();
      const ActResult act = agent.act_detailed(state.flat(), true);
      const env::StepOutcome out = env.step(act.weights);
      rollout.add(observe(act, out.reward, env.done(), state, next), act.value, act.log_prob);
      rewards.add(out.reward);
      last_next = next.values;
      ++step;
      maybe_checkpoint(agent, schedule, step);
    }
    rollout.compute_returns_and_advantages(agent.value(last_next), cfg.gamma, cfg.gae_lambda);
    std::vector<UpdateMetrics> rows;
    if (cfg.variant.algorithm == Algorithm::kPpo) {
      rows = agent.ppo_update(rollout);
    } else {
      rows.push_back(agent.a2c_update(rollout));
    }
    for (const auto& m : rows) log.rows.push_back(make_row(cfg, ++updates, step, rewards.mean(), m));
  }
  return log;
}

}  // namespace

std::vector<std::string> train_log_columns(const AgentConfig& config) {
  std::vector<std::string> cols{"update", "env_step", "reward"};
  if (config.variant.off_policy()) {
    cols.insert(cols.end(), {"critic_loss", "actor_loss", "actor_updated"});
    if (config.variant.physics) cols.insert(cols.end(), {"physics_loss", "physics_loss_norm", "lambda_adapt", "vol_ema"});
  } else {
    cols.insert(cols.end(), {"total_loss", "policy_loss", "value_loss", "entropy_loss", "approx_kl", "clip_fraction",
                             "explained_variance"});
    if (config.variant.physics) cols.insert(cols.end(), {"physics_loss", "lambda_adapt", "vol_ema"});
  }
  return cols;
}

void TrainLog::write_csv(std::ostream& out) const {
  csv::Writer w(out);
  w.write_row(columns);
  std::vector<std::string> fields;
  for (const auto& row : rows) {
    fields.clear();
    for (std::size_t k = 0; k < row.size(); ++k) {
      const double v = row[k];
      if (std::isnan(v)) {
        fields.emplace_back();
      } else if (k < 2) {
        fields.push_back(std::to_string(static_cast<long long>(v)));
      } else {
        fields.push_back(csv::format_double(v));
      }
    }
    w.write_row(fields);
  }
}

TrainLog train(Agent& agent, env::MarketEnv& env, const TrainSchedule& schedule) {
  if (env.num_assets() != agent.num_assets() || env.data().state_size() != agent.state_size()) {
    throw DimensionMismatch("train: environment layout differs from the agent");
  }
  spdlog::debug("training {} for {} steps", agent.config().variant.name(), schedule.total_steps);
  return agent.config().variant.off_policy() ? train_off_policy(agent, env, schedule)
                                             : train_on_policy(agent, env, schedule);
}

env::EpisodeTrace evaluate(Agent& agent, env::MarketEnv& env) {
  if (env.num_assets() != agent.num_assets() || env.data().state_size() != agent.state_size()) {
    throw DimensionMismatch("evaluate: environment layout differs from the agent");
  }
  return env::run_episode(env, [&](const env::MarketEnv& e) { return agent.act(e.observation(), false); });
}

}  // namespace pikan::agents
