#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>

namespace pikan::stats {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Divides by N.
inline double population_variance(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return acc / static_cast<double>(xs.size());
}

// Divides by N - 1; zero for fewer than two samples.
inline double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return acc / static_cast<double>(xs.size() - 1);
}

inline double population_std(std::span<const double> xs) { return std::sqrt(population_variance(xs)); }
inline double sample_std(std::span<const double> xs) { return std::sqrt(sample_variance(xs)); }

}  // namespace pikan::stats
