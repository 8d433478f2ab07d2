#include "pikan/optim.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "pikan/error.hpp"

namespace pikan::optim {

Adam::Adam(std::size_t size, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(const std::vector<std::span<double>>& params, std::span<const double> grad) {
  if (grad.size() != m_.size()) throw DimensionMismatch("Adam: gradient length differs from optimizer state");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::size_t k = 0;
  for (const auto& block : params) {
    for (double& p : block) {
      if (k >= m_.size()) throw DimensionMismatch("Adam: parameter blocks exceed optimizer state");
      const double g = grad[k];
      m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * g;
      v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * g * g;
      p -= lr_ * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps_);
      ++k;
    }
  }
  if (k != m_.size()) throw DimensionMismatch("Adam: parameter blocks shorter than optimizer state");
}

nlohmann::json Adam::to_json() const {
  return {{"lr", lr_}, {"beta1", beta1_}, {"beta2", beta2_}, {"eps", eps_}, {"t", t_}, {"m", m_}, {"v", v_}};
}

Adam Adam::from_json(const nlohmann::json& j) {
  Adam a;
  a.lr_ = j.at("lr").get<double>();
  a.beta1_ = j.at("beta1").get<double>();
  a.beta2_ = j.at("beta2").get<double>();
  a.eps_ = j.at("eps").get<double>();
  a.t_ = j.at("t").get<long>();
  a.m_ = j.at("m").get<std::vector<double>>();
  a.v_ = j.at("v").get<std::vector<double>>();
  if (a.m_.size() != a.v_.size()) throw ValidationError("Adam state moments differ in length");
  return a;
}

double global_norm(std::span<const double> grad) {
  double ss = 0.0;
  for (double g : grad) ss += g * g;
  return std::sqrt(ss);
}

double clip_grad_norm(std::span<double> grad, double max_norm) {
  const double norm = global_norm(grad);
  if (norm > max_norm && norm > 0.0) {
    double scale = max_norm / norm;
    for (double& g : grad) g *= scale;
    // Rounding can leave the norm an ulp above the bound.
    while (global_norm(grad) > max_norm) {
      scale = std::nextafter(1.0, 0.0) * max_norm / global_norm(grad);
      for (double& g : grad) g *= scale;
    }
  }
  return norm;
}

}  // namespace pikan::optim
