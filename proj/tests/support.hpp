#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pikan/dataset.hpp"
#include "pikan/env.hpp"
#include "pikan/synth.hpp"

namespace pikan::testing {

// Synthetic market with normalization statistics from the first
// `stats_days` trading days.
inline marketdata::Dataset synthetic_dataset(std::size_t assets, std::size_t days, std::uint64_t seed,
                                             std::size_t window = 5, double momentum = 0.0,
                                             std::size_t stats_days = 0) {
  synth::SynthConfig sc;
  sc.assets = assets;
  sc.days = days;
  sc.seed = seed;
  sc.momentum = momentum;
  auto raw = synth::generate(sc);
  marketdata::DatasetOptions opts;
  opts.window = window;
  opts.stats_begin = raw[0].dates.front();
  opts.stats_end = raw[0].dates[stats_days == 0 ? days - 1 : stats_days - 1];
  return marketdata::make_dataset(std::move(raw), opts);
}

inline std::vector<double> random_simplex(std::size_t m, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(m);
  double s = 0.0;
  for (auto& x : w) s += (x = e(rng));
  for (auto& x : w) x /= s;
  return w;
}

inline std::vector<double> random_relatives(std::size_t m, std::mt19937_64& rng, double spread = 0.05) {
  std::uniform_real_distribution<double> u(1.0 - spread, 1.0 + spread);
  std::vector<double> y(m);
  for (auto& x : y) x = u(rng);
  return y;
}

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("pikan_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace pikan::testing
