#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "config.hpp"
#include "pikan/error.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

void setup_logging(bool verbose, bool quiet) {
  auto logger = spdlog::stderr_color_mt("pikan");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(quiet ? spdlog::level::warn : verbose ? spdlog::level::debug : spdlog::level::info);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pikan: physics-informed KAN agents for portfolio allocation"};
  app.require_subcommand(1);
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  std::string config_path;
  auto add_config_command = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "Experiment config (TOML)")->required();
    sub->allow_extras();
    sub->footer("Any config key can be overridden with --section.key=value, e.g. --agent.gamma=0.95");
    return sub;
  };

  CLI::App* ingest = add_config_command("ingest", "Validate raw CSVs and build the normalized feature store");
  CLI::App* train = add_config_command("train", "Train the configured agent on the training range");
  CLI::App* backtest = add_config_command("backtest", "Run a checkpoint or baseline through the test range");
  std::string checkpoint;
  std::string baseline;
  std::string backtest_out;
  auto* ckpt_opt = backtest->add_option("--checkpoint", checkpoint, "Agent checkpoint JSON");
  auto* base_opt = backtest->add_option("--baseline", baseline, "Baseline strategy: ubah, crp, olmar, rmr, pamr");
  ckpt_opt->excludes(base_opt);
  backtest->add_option("--out", backtest_out, "Output directory (default <output_dir>/backtest_<name>)");

  CLI::App* compare = app.add_subcommand("compare", "Combine run reports into one table");
  std::vector<std::string> run_dirs;
  std::string compare_out;
  compare->add_option("runs", run_dirs, "Directories holding report.json")->required();
  compare->add_option("--out", compare_out, "CSV path (default stdout)");

  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic OHLCV market");
  pikan::synth::SynthConfig synth_cfg;
  std::string synth_out;
  std::string synth_start = "2015-01-02";
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--assets", synth_cfg.assets, "Number of assets")->capture_default_str();
  synth_cmd->add_option("--days", synth_cfg.days, "Trading days")->capture_default_str();
  synth_cmd->add_option("--seed", synth_cfg.seed, "Seed")->capture_default_str();
  synth_cmd->add_option("--momentum", synth_cfg.momentum, "AR(1) coefficient of daily log returns")->capture_default_str();
  synth_cmd->add_option("--drift", synth_cfg.annual_drift, "Annual drift")->capture_default_str();
  synth_cmd->add_option("--volatility", synth_cfg.annual_volatility, "Annual volatility")->capture_default_str();
  synth_cmd->add_option("--start", synth_start, "First date")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }
  setup_logging(verbose, quiet);

  try {
    namespace cli = pikan::cli;
    CLI::App* active = app.get_subcommands().front();
    if (active == compare) {
      if (compare_out.empty()) {
        cli::cmd_compare({run_dirs.begin(), run_dirs.end()}, std::cout);
      } else {
        std::ofstream out(compare_out, std::ios::binary | std::ios::trunc);
        if (!out) throw pikan::Error("cannot write " + compare_out);
        cli::cmd_compare({run_dirs.begin(), run_dirs.end()}, out);
      }
      return 0;
    }
    if (active == synth_cmd) {
      synth_cfg.start = pikan::marketdata::parse_date(synth_start);
      for (const auto& p : cli::cmd_synth(synth_cfg, synth_out)) spdlog::info("wrote {}", p.string());
      return 0;
    }

    const cli::ExperimentConfig config = cli::load_config(config_path, active->remaining());
    if (active == ingest) {
      cli::cmd_ingest(config);
    } else if (active == train) {
      const auto r = cli::cmd_train(config);
      spdlog::info("wrote {} checkpoints and {} log rows to {}", r.checkpoints, r.log_rows, r.run_dir.string());
    } else if (active == backtest) {
      cli::BacktestOptions opts;
      if (!checkpoint.empty()) opts.checkpoint = checkpoint;
      if (!baseline.empty()) opts.baseline = baseline;
      if (!backtest_out.empty()) opts.out_dir = backtest_out;
      const auto r = cli::cmd_backtest(config, opts);
      spdlog::info("wrote {}", r.out_dir.string());
    }
    return 0;
  } catch (const pikan::ValidationError& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
}
