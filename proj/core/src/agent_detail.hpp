#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "pikan/kan.hpp"

namespace pikan::agents::detail {

inline std::vector<double> softmax(std::span<const double> z) {
  double hi = z.empty() ? 0.0 : z[0];
  for (double v : z) hi = std::max(hi, v);
  std::vector<double> out(z.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    out[j] = std::exp(z[j] - hi);
    sum += out[j];
  }
  for (double& v : out) v /= sum;
  return out;
}

// Pulls d/dw back through w = softmax(z).
inline std::vector<double> softmax_backward(std::span<const double> w, std::span<const double> dw) {
  double dot = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) dot += w[j] * dw[j];
  std::vector<double> dz(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) dz[j] = w[j] * (dw[j] - dot);
  return dz;
}

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * ln(2 pi)

// Diagonal Gaussian log-density summed over dimensions.
inline double gaussian_log_prob(std::span<const double> mean, std::span<const double> log_std,
                                std::span<const double> x) {
  double lp = 0.0;
  for (std::size_t j = 0; j < mean.size(); ++j) {
    const double u = (x[j] - mean[j]) * std::exp(-log_std[j]);
    lp += -0.5 * u * u - log_std[j] - kHalfLog2Pi;
  }
  return lp;
}

inline double gaussian_entropy(std::span<const double> log_std) {
  double h = 0.0;
  for (double s : log_std) h += 0.5 + kHalfLog2Pi + s;
  return h;
}

inline std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace pikan::agents::detail
