#include "commands.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "feature_store.hpp"
#include "pikan/agents.hpp"
#include "pikan/baselines.hpp"
#include "pikan/csv.hpp"
#include "pikan/error.hpp"

namespace pikan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string checkpoint_name(std::size_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%06zu.json", step);
  return buf;
}

}  // namespace

DayRange train_range(const marketdata::Dataset& data, const DataConfig& config) {
  const std::size_t first = std::max(data.first_state_index(), data.index_on_or_after(config.train_start));
  if (first >= data.days() || data.dates[first] > config.train_end) {
    throw InsufficientHistory("no training day has a complete lookback window");
  }
  const std::size_t last = data.index_on_or_before(config.train_end);
  if (last <= first) throw InsufficientHistory("training range holds fewer than two usable days");
  return {first, last};
}

DayRange test_range(const marketdata::Dataset& data, const DataConfig& config) {
  const std::size_t first = data.index_on_or_after(config.test_start);
  if (first >= data.days() || data.dates[first] > config.test_end) {
    throw InsufficientHistory("no trading days inside the test range");
  }
  if (first == 0 || first - 1 < data.first_state_index()) {
    throw InsufficientHistory("test range starts before the indicator warm-up and lookback window are complete");
  }
  return {first - 1, data.index_on_or_before(config.test_end)};
}

json cmd_ingest(const ExperimentConfig& config) { return build_feature_store(config); }

TrainResult cmd_train(const ExperimentConfig& config) {
  const marketdata::Dataset ds = load_feature_store(config);
  const DayRange range = train_range(ds, config.data);
  env::MarketEnv env(ds, range.start_day, range.end_day, config.env);
  agents::Agent agent(config.agent, agents::PhysicsContext::from_dataset(ds));

  TrainResult result;
  result.run_dir = config.output_dir;
  const fs::path ckpt_dir = config.output_dir / "checkpoints";
  fs::remove_all(ckpt_dir);
  fs::create_directories(ckpt_dir);
  write_text(config.output_dir / "agent_config.json", agents::to_json(config.agent).dump(2) + "\n");

  auto save = [&](const agents::Agent& a, const fs::path& path) {
    write_text(path, a.checkpoint().dump() + "\n");
    ++result.checkpoints;
  };
  save(agent, ckpt_dir / checkpoint_name(0));

  agents::TrainSchedule schedule;
  schedule.total_steps = config.train.total_steps;
  schedule.checkpoint_every = config.train.checkpoint_every;
  schedule.on_checkpoint = [&](const agents::Agent& a, std::size_t step) { save(a, ckpt_dir / checkpoint_name(step)); };

  spdlog::info("training {} on days {}..{} ({} -> {}) for {} steps", config.agent.variant.name(), range.start_day,
               range.end_day, marketdata::format_date(ds.dates[range.start_day]),
               marketdata::format_date(ds.dates[range.end_day]), schedule.total_steps);
  const agents::TrainLog log = agents::train(agent, env, schedule);
  if (schedule.total_steps > 0) save(agent, config.output_dir / "final.json");

  std::ostringstream csv_text;
  log.write_csv(csv_text);
  write_text(config.output_dir / "trainlog.csv", csv_text.str());
  result.log_rows = log.rows.size();
  return result;
}

void write_wealth_csv(std::ostream& out, const marketdata::Dataset& data, const env::EpisodeTrace& trace) {
  csv::Writer w(out);
  csv::Row header{"date", "wealth"};
  for (const auto& a : data.assets) header.push_back("w_" + a);
  w.write_row(header);
  for (std::size_t k = 0; k < trace.days.size(); ++k) {
    csv::Row row{marketdata::format_date(data.dates[trace.days[k]]), csv::format_double(trace.wealth[k])};
    for (double x : trace.weights[k]) row.push_back(csv::format_double(x));
    w.write_row(row);
  }
}

BacktestResult cmd_backtest(const ExperimentConfig& config, const BacktestOptions& options) {
  if (options.checkpoint.has_value() == options.baseline.has_value()) {
    throw ConfigError("backtest needs exactly one of --checkpoint or --baseline");
  }
  const marketdata::Dataset ds = load_feature_store(config);
  const DayRange range = test_range(ds, config.data);
  env::MarketEnv env(ds, range.start_day, range.end_day, config.env);

  env::EpisodeTrace trace;
  std::string name;
  if (options.baseline) {
    const baselines::StrategyId id = baselines::parse_strategy(*options.baseline);
    baselines::Strategy strategy(id, config.baselines, ds.num_assets());
    trace = baselines::run_strategy(strategy, env);
    name = baselines::strategy_name(id);
  } else {
    agents::Agent agent =
        agents::Agent::from_checkpoint(read_json(*options.checkpoint), agents::PhysicsContext::from_dataset(ds));
    trace = agents::evaluate(agent, env);
    name = agent.config().variant.display_name();
  }

  BacktestResult result;
  result.out_dir = options.out_dir.value_or(config.output_dir / ("backtest_" + lower(name)));
  for (std::size_t k = 0; k < trace.days.size(); ++k) {
    result.wealth.dates.push_back(ds.dates[trace.days[k]]);
    result.wealth.values.push_back(trace.wealth[k]);
  }
  result.report = metrics::full_report(result.wealth, name);

  std::ostringstream wealth_text;
  write_wealth_csv(wealth_text, ds, trace);
  write_text(result.out_dir / "wealth.csv", wealth_text.str());
  write_text(result.out_dir / "report.json", metrics::to_json(result.report).dump(2) + "\n");
  std::ostringstream table;
  metrics::write_table_csv(table, std::span<const metrics::MetricsReport>(&result.report, 1));
  write_text(result.out_dir / "report.csv", table.str());
  spdlog::info("{}: CumRet {:.2f}%, MDD {:.2f}%, APV {:.2f}", name, result.report.crr, result.report.mdd,
               result.report.apv);
  return result;
}

std::vector<metrics::MetricsReport> cmd_compare(const std::vector<fs::path>& run_dirs, std::ostream& out) {
  if (run_dirs.empty()) throw ConfigError("compare needs at least one run directory");
  std::vector<metrics::MetricsReport> reports;
  for (const auto& dir : run_dirs) {
    const fs::path path = dir / "report.json";
    if (!fs::is_regular_file(path)) throw MissingReport("no report.json in " + dir.string());
    reports.push_back(metrics::report_from_json(read_json(path)));
  }
  metrics::write_table_csv(out, reports);
  return reports;
}

std::vector<fs::path> cmd_synth(const synth::SynthConfig& config, const fs::path& out_dir) {
  const auto series = synth::generate(config);
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  for (const auto& s : series) {
    std::ostringstream text;
    marketdata::write_ohlcv(text, s);
    const fs::path path = out_dir / (s.asset_id + ".csv");
    write_text(path, text.str());
    written.push_back(path);
  }
  return written;
}

}  // namespace pikan::cli
