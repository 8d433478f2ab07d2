#include "pikan/buffers.hpp"

#include <algorithm>
#include <unordered_set>

#include "pikan/error.hpp"

namespace pikan::agents {

TransitionBatch stack(std::span<const Transition* const> rows) {
  TransitionBatch b;
  if (rows.empty()) return b;
  const Transition& first = *rows.front();
  const std::size_t n = rows.size();
  b.states = Matrix(n, first.state.size());
  b.next_states = Matrix(n, first.next_state.size());
  b.actions = Matrix(n, first.action.size());
  b.raw_actions = Matrix(n, first.raw_action.size());
  b.rewards.resize(n);
  b.dones.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Transition& t = *rows[i];
    if (t.state.size() != b.states.cols || t.next_state.size() != b.next_states.cols ||
        t.action.size() != b.actions.cols || t.raw_action.size() != b.raw_actions.cols) {
      throw ShapeMismatch("transition batch: rows differ in shape");
    }
    std::copy(t.state.begin(), t.state.end(), b.states.row(i).begin());
    std::copy(t.next_state.begin(), t.next_state.end(), b.next_states.row(i).begin());
    std::copy(t.action.begin(), t.action.end(), b.actions.row(i).begin());
    std::copy(t.raw_action.begin(), t.raw_action.end(), b.raw_actions.row(i).begin());
    b.rewards[i] = t.reward;
    b.dones[i] = t.done ? 1.0 : 0.0;
  }
  return b;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ValidationError("replay buffer capacity must be positive");
}

void ReplayBuffer::add(Transition t) {
  if (t.state.size() != t.next_state.size()) throw ShapeMismatch("transition: state and next_state differ in shape");
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[cursor_] = std::move(t);
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch_size, std::mt19937_64& rng) const {
  if (batch_size < 2 || batch_size > items_.size()) {
    throw BufferTooSmall("replay buffer holds " + std::to_string(items_.size()) + " transitions, batch needs " +
                         std::to_string(batch_size) + " (minimum 2)");
  }
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<std::size_t> out;
  out.reserve(batch_size);
  std::unordered_set<std::size_t> seen;
  while (out.size() < batch_size) {
    const std::size_t i = pick(rng);
    if (seen.insert(i).second) out.push_back(i);
  }
  return out;
}

TransitionBatch ReplayBuffer::sample(std::size_t batch_size, std::mt19937_64& rng) const {
  const auto idx = sample_indices(batch_size, rng);
  std::vector<const Transition*> rows;
  rows.reserve(idx.size());
  for (std::size_t i : idx) rows.push_back(&items_[i]);
  return stack(rows);
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const double> dones, double last_value, double gamma, double lambda_gae) {
  if (rewards.size() != values.size() || rewards.size() != dones.size()) {
    throw LengthMismatch("compute_gae: rewards, values and dones differ in length");
  }
  const std::size_t n = rewards.size();
  GaeResult r;
  r.advantages.assign(n, 0.0);
  r.returns.assign(n, 0.0);
  double next_adv = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double next_value = k + 1 < n ? values[k + 1] : last_value;
    const double live = 1.0 - dones[k];
    const double delta = rewards[k] + gamma * live * next_value - values[k];
    next_adv = delta + gamma * lambda_gae * live * next_adv;
    r.advantages[k] = next_adv;
    r.returns[k] = next_adv + values[k];
  }
  return r;
}

void RolloutBuffer::add(Transition t, double value, double log_prob) {
  if (ready_) throw Error("rollout buffer: add after advantages were computed; clear first");
  transitions_.push_back(std::move(t));
  values_.push_back(value);
  log_probs_.push_back(log_prob);
}

void RolloutBuffer::compute_returns_and_advantages(double last_value, double gamma, double lambda_gae) {
  if (transitions_.empty()) throw EmptyRollout("rollout buffer is empty");
  std::vector<double> rewards, dones;
  rewards.reserve(size());
  dones.reserve(size());
  for (const auto& t : transitions_) {
    rewards.push_back(t.reward);
    dones.push_back(t.done ? 1.0 : 0.0);
  }
  auto gae = compute_gae(rewards, values_, dones, last_value, gamma, lambda_gae);
  advantages_ = std::move(gae.advantages);
  returns_ = std::move(gae.returns);
  ready_ = true;
}

void RolloutBuffer::clear() {
  transitions_.clear();
  values_.clear();
  log_probs_.clear();
  advantages_.clear();
  returns_.clear();
  ready_ = false;
}

const std::vector<double>& RolloutBuffer::advantages() const {
  if (!ready_) throw EmptyRollout("rollout buffer: advantages not computed");
  return advantages_;
}

const std::vector<double>& RolloutBuffer::returns() const {
  if (!ready_) throw EmptyRollout("rollout buffer: returns not computed");
  return returns_;
}

}  // namespace pikan::agents
