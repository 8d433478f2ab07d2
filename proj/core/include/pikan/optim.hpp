#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace pikan::optim {

// Adam with bias-corrected first/second moments. Parameters are given as a
// list of blocks whose concatenation matches the flat gradient.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(const std::vector<std::span<double>>& params, std::span<const double> grad);

  std::size_t size() const noexcept { return m_.size(); }
  long steps() const noexcept { return t_; }
  double learning_rate() const noexcept { return lr_; }

  nlohmann::json to_json() const;
  static Adam from_json(const nlohmann::json& j);

 private:
  double lr_ = 3e-4;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

double global_norm(std::span<const double> grad);

// Rescales grad in place so its L2 norm is at most max_norm. Returns the norm
// before clipping.
double clip_grad_norm(std::span<double> grad, double max_norm);

}  // namespace pikan::optim
