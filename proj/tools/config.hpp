#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pikan/agents.hpp"
#include "pikan/baselines.hpp"
#include "pikan/env.hpp"
#include "pikan/marketdata.hpp"

namespace pikan::cli {

inline constexpr const char* kOutputRootEnv = "PIKAN_OUTPUT_ROOT";

struct DataConfig {
  std::vector<std::filesystem::path> assets;  // raw OHLCV CSVs, asset id = file stem
  std::filesystem::path feature_store;
  marketdata::Date train_start;
  marketdata::Date train_end;
  marketdata::Date test_start;
  marketdata::Date test_end;
  std::size_t window = 5;
  marketdata::IndicatorParams indicators;
};

struct TrainConfig {
  std::size_t total_steps = 10000;
  std::size_t checkpoint_every = 0;
};

struct ExperimentConfig {
  std::filesystem::path source;  // config file, empty for in-memory configs
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  DataConfig data;
  env::EnvConfig env;
  agents::AgentConfig agent;
  baselines::StrategyParams baselines;
  TrainConfig train;
  nlohmann::json raw;  // merged document after overrides

  // Disjoint date ranges, positive window, existing asset files.
  void validate() const;
};

// "--agent.gamma=0.95" and "--agent.gamma 0.95" forms. Values are read as
// TOML scalars, falling back to strings. Throws ConfigError on malformed keys.
void apply_overrides(nlohmann::json& doc, const std::vector<std::string>& args);

// Relative data paths resolve against `base_dir`; a relative output_dir
// resolves against $PIKAN_OUTPUT_ROOT, then the output_root key, then
// `base_dir`. Unknown keys raise ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace pikan::cli
