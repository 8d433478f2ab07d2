#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "pikan/dataset.hpp"
#include "pikan/env.hpp"
#include "pikan/metrics.hpp"
#include "pikan/synth.hpp"

namespace pikan::cli {

struct DayRange {
  std::size_t start_day = 0;  // initial portfolio formed here
  std::size_t end_day = 0;    // last decision day
};

// Training decisions start once every indicator and the lookback window are
// defined; the first test decision falls on the first trading day on or
// after test_start.
DayRange train_range(const marketdata::Dataset& data, const DataConfig& config);
DayRange test_range(const marketdata::Dataset& data, const DataConfig& config);

nlohmann::json cmd_ingest(const ExperimentConfig& config);

struct TrainResult {
  std::filesystem::path run_dir;
  std::size_t checkpoints = 0;
  std::size_t log_rows = 0;
};

// Writes checkpoints/step_NNNNNN.json (step 0 first), final.json when any
// step ran, and trainlog.csv under the output directory.
TrainResult cmd_train(const ExperimentConfig& config);

struct BacktestOptions {
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::string> baseline;
  std::optional<std::filesystem::path> out_dir;  // default: <output_dir>/backtest_<name>
};

struct BacktestResult {
  std::filesystem::path out_dir;
  metrics::WealthSeries wealth;
  metrics::MetricsReport report;
};

// Writes wealth.csv, report.json and report.csv.
BacktestResult cmd_backtest(const ExperimentConfig& config, const BacktestOptions& options);

void write_wealth_csv(std::ostream& out, const marketdata::Dataset& data, const env::EpisodeTrace& trace);

// One row per directory, in argument order. Throws MissingReport.
std::vector<metrics::MetricsReport> cmd_compare(const std::vector<std::filesystem::path>& run_dirs, std::ostream& out);

// Writes <out_dir>/<asset>.csv for every generated asset.
std::vector<std::filesystem::path> cmd_synth(const synth::SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace pikan::cli
