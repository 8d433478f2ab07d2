#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "pikan/matrix.hpp"

namespace pikan::agents {

// States are stored flattened (window x assets x features). `action` holds
// the executed simplex weights, `raw_action` the pre-softmax vector the
// policy produced.
struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  std::vector<double> raw_action;
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;
};

// Row-stacked view of a sampled set of transitions.
struct TransitionBatch {
  Matrix states;
  Matrix actions;
  Matrix raw_actions;
  std::vector<double> rewards;
  Matrix next_states;
  std::vector<double> dones;

  std::size_t size() const noexcept { return rewards.size(); }
};

TransitionBatch stack(std::span<const Transition* const> rows);

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void add(Transition t);
  std::size_t size() const noexcept { return items_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t cursor() const noexcept { return cursor_; }
  const Transition& at(std::size_t i) const { return items_.at(i); }

  // Distinct indices drawn uniformly from the filled region.
  std::vector<std::size_t> sample_indices(std::size_t batch_size, std::mt19937_64& rng) const;
  TransitionBatch sample(std::size_t batch_size, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Transition> items_;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// dones[t] marks that the episode ended after step t. last_value bootstraps
// the step after the final one.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const double> dones, double last_value, double gamma, double lambda_gae);

class RolloutBuffer {
 public:
  void add(Transition t, double value, double log_prob);
  void compute_returns_and_advantages(double last_value, double gamma, double lambda_gae);
  void clear();

  std::size_t size() const noexcept { return transitions_.size(); }
  bool empty() const noexcept { return transitions_.empty(); }
  bool ready() const noexcept { return ready_; }

  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<double>& log_probs() const noexcept { return log_probs_; }
  // Throw EmptyRollout when empty or advantages are not yet computed.
  const std::vector<double>& advantages() const;
  const std::vector<double>& returns() const;

 private:
  std::vector<Transition> transitions_;
  std::vector<double> values_;
  std::vector<double> log_probs_;
  std::vector<double> advantages_;
  std::vector<double> returns_;
  bool ready_ = false;
};

}  // namespace pikan::agents
