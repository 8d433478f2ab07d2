#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "feature_store.hpp"
#include "pikan/error.hpp"
#include "support.hpp"
#include "toml_lite.hpp"

namespace pikan::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spill(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

// Three synthetic assets plus a config in a scratch directory.
class Workspace {
 public:
  explicit Workspace(const std::string& tag, double volatility = 0.2, double drift = 0.06) : dir_(tag) {
    synth::SynthConfig sc;
    sc.assets = 3;
    sc.days = 400;
    sc.seed = 21;
    sc.annual_volatility = volatility;
    sc.annual_drift = drift;
    cmd_synth(sc, dir_.path() / "data");
    write_config("");
  }

  void write_config(const std::string& extra) {
    spill(config_path(), "seed = 3\n"
                         "output_dir = \"runs\"\n"
                         "[data]\n"
                         "data_dir = \"data\"\n"
                         "feature_store = \"store\"\n"
                         "train_start = 2015-01-02\n"
                         "train_end = 2015-12-31\n"
                         "test_start = 2016-01-01\n"
                         "test_end = 2016-07-29\n"
                         "[agent]\n"
                         "algorithm = \"td3_pinn\"\n"
                         "batch_size = 16\n"
                         "learning_starts = 16\n"
                         "actor_hidden = [8]\n"
                         "critic_hidden = [8]\n"
                         "[train]\n"
                         "total_steps = 40\n"
                         "checkpoint_every = 20\n" +
                             extra);
  }

  fs::path config_path() const { return dir_.path() / "exp.toml"; }
  const fs::path& root() const { return dir_.path(); }
  ExperimentConfig load(const std::vector<std::string>& overrides = {}) const {
    return load_config(config_path(), overrides);
  }

 private:
  testing::TempDir dir_;
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PIKAN_BINARY) + " -q " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(TomlTest, ParsesSubset) {
  const auto j = toml::parse(
      "# comment\n"
      "a = 1_000\n"
      "b = -2.5e-1 # trailing\n"
      "s = \"x\\ty\"\n"
      "lit = 'C:\\path'\n"
      "d = 2020-01-02\n"
      "flag = true\n"
      "[t.u]\n"
      "arr = [1, 2,\n  3,]\n"
      "inline = { k = \"v\", n = 4 }\n"
      "x.y = inf\n");
  EXPECT_EQ(j["a"], 1000);
  EXPECT_EQ(j["b"], -0.25);
  EXPECT_EQ(j["s"], "x\ty");
  EXPECT_EQ(j["lit"], "C:\\path");
  EXPECT_EQ(j["d"], "2020-01-02");
  EXPECT_EQ(j["flag"], true);
  EXPECT_EQ(j["t"]["u"]["arr"], nlohmann::json::array({1, 2, 3}));
  EXPECT_EQ(j["t"]["u"]["inline"]["n"], 4);
  EXPECT_TRUE(std::isinf(j["t"]["u"]["x"]["y"].get<double>()));
}

TEST(TomlTest, RejectsMalformedInput) {
  EXPECT_THROW(toml::parse("a = 1\na = 2\n"), ConfigError);
  EXPECT_THROW(toml::parse("[[tables]]\n"), ConfigError);
  EXPECT_THROW(toml::parse("a = \"unterminated\n"), ConfigError);
  EXPECT_THROW(toml::parse("= 3\n"), ConfigError);
  try {
    toml::parse("ok = 1\nbad line\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(TomlTest, ParseValueFallsBackToString) {
  EXPECT_EQ(toml::parse_value("0.95"), 0.95);
  EXPECT_EQ(toml::parse_value("[4, 4]"), nlohmann::json::array({4, 4}));
  EXPECT_EQ(toml::parse_value("ppo_pinn"), "ppo_pinn");
}

TEST(OverrideTest, BothForms) {
  nlohmann::json doc{{"agent", {{"gamma", 0.99}}}};
  apply_overrides(doc, {"--agent.gamma=0.5", "--train.total_steps", "7", "--seed=4"});
  EXPECT_EQ(doc["agent"]["gamma"], 0.5);
  EXPECT_EQ(doc["train"]["total_steps"], 7);
  EXPECT_EQ(doc["seed"], 4);
  EXPECT_THROW(apply_overrides(doc, {"--gamma=0.5"}), ConfigError);
  EXPECT_THROW(apply_overrides(doc, {"agent.gamma=0.5"}), ConfigError);
}

TEST(ConfigTest, LoadsAndResolvesPaths) {
  Workspace ws("cfg");
  const ExperimentConfig c = ws.load({"--agent.gamma=0.9"});
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.agent.seed, 3u);
  EXPECT_EQ(c.agent.gamma, 0.9);
  EXPECT_EQ(c.data.assets.size(), 3u);
  EXPECT_EQ(c.data.assets[0].filename(), "SYN00.csv");
  EXPECT_EQ(c.data.feature_store, ws.root() / "store");
  EXPECT_EQ(c.agent.variant.name(), "td3_pinn");
}

TEST(ConfigTest, RejectsOverlapUnknownKeysAndMissingFiles) {
  Workspace ws("cfgbad");
  EXPECT_THROW(ws.load({"--data.test_start=2015-06-01"}), ConfigError);
  EXPECT_THROW(ws.load({"--agent.learning_rate=0.1"}), ConfigError);
  EXPECT_THROW(ws.load({"--bogus.key=1"}), ConfigError);
  EXPECT_THROW(load_config(ws.root() / "absent.toml"), ConfigError);
  ws.write_config("[baselines]\ncrp_target = [0.5, 0.5]\n");
  EXPECT_THROW(ws.load(), ConfigError);
  fs::remove(ws.root() / "data" / "SYN01.csv");
  ws.write_config("");
  auto doc = toml::parse_file(ws.config_path());
  doc["data"].erase("data_dir");
  doc["data"]["assets"] = {"data/SYN00.csv", "data/SYN01.csv"};
  EXPECT_THROW(config_from_json(doc, ws.root()), ConfigError);
}

TEST(FeatureStoreTest, DeterministicChecksums) {
  Workspace ws("store");
  const ExperimentConfig c = ws.load();
  const nlohmann::json m1 = cmd_ingest(c);
  const std::string file1 = slurp(ws.root() / "store" / "features" / "SYN02.csv");
  const nlohmann::json m2 = cmd_ingest(c);
  EXPECT_EQ(m1, m2);
  EXPECT_EQ(slurp(ws.root() / "store" / "features" / "SYN02.csv"), file1);
  EXPECT_EQ(m1["assets"][2]["sha256"], sha256_hex(file1));
  const marketdata::Dataset ds = load_feature_store(c);
  EXPECT_EQ(ds.num_assets(), 3u);
}

TEST(FeatureStoreTest, KnownDigest) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(FeatureStoreTest, TamperingAndStaleStoresDetected) {
  Workspace ws("tamper");
  cmd_ingest(ws.load());
  EXPECT_THROW(load_feature_store(ws.load({"--data.train_end=2015-11-30"})), ConfigError);
  const fs::path f = ws.root() / "store" / "features" / "SYN00.csv";
  spill(f, slurp(f) + "\n");
  EXPECT_THROW(load_feature_store(ws.load()), ValidationError);
}

TEST(FeatureStoreTest, FailedIngestLeavesNoManifest) {
  Workspace ws("atomic");
  const fs::path f = ws.root() / "data" / "SYN01.csv";
  std::string text = slurp(f);
  text.insert(text.find('\n', text.find('\n') + 1) + 1, "2015-01-06,oops,1,1,1,1\n");
  spill(f, text);
  EXPECT_THROW(cmd_ingest(ws.load()), ValidationError);
  EXPECT_FALSE(fs::exists(ws.root() / "store" / "manifest.json"));
  EXPECT_THROW(load_feature_store(ws.load()), ConfigError);
}

TEST(TrainCommandTest, WritesCheckpointsAndLog) {
  Workspace ws("train");
  const ExperimentConfig c = ws.load();
  cmd_ingest(c);
  const TrainResult r = cmd_train(c);
  EXPECT_EQ(r.checkpoints, 4u);
  EXPECT_TRUE(fs::exists(r.run_dir / "checkpoints" / "step_000000.json"));
  EXPECT_TRUE(fs::exists(r.run_dir / "checkpoints" / "step_000040.json"));
  EXPECT_TRUE(fs::exists(r.run_dir / "final.json"));
  EXPECT_TRUE(fs::exists(r.run_dir / "trainlog.csv"));
  EXPECT_TRUE(fs::exists(r.run_dir / "agent_config.json"));
}

TEST(TrainCommandTest, ZeroStepsWritesOnlyInitialCheckpoint) {
  Workspace ws("train0");
  const ExperimentConfig c = ws.load({"--train.total_steps=0"});
  cmd_ingest(c);
  const TrainResult r = cmd_train(c);
  EXPECT_EQ(r.checkpoints, 1u);
  EXPECT_EQ(r.log_rows, 0u);
  EXPECT_FALSE(fs::exists(r.run_dir / "final.json"));
}

TEST(BacktestCommandTest, DeterministicAcrossRuns) {
  Workspace ws("bt");
  const ExperimentConfig c = ws.load();
  cmd_ingest(c);
  const TrainResult t = cmd_train(c);
  BacktestOptions o;
  o.checkpoint = t.run_dir / "final.json";
  o.out_dir = ws.root() / "bt1";
  const BacktestResult a = cmd_backtest(c, o);
  o.out_dir = ws.root() / "bt2";
  cmd_backtest(c, o);
  EXPECT_EQ(slurp(ws.root() / "bt1" / "wealth.csv"), slurp(ws.root() / "bt2" / "wealth.csv"));
  EXPECT_EQ(a.report.algorithm, "TD3_PINN");
  const DayRange test = test_range(load_feature_store(c), c.data);
  EXPECT_EQ(a.wealth.size(), test.end_day - test.start_day + 1);
}

TEST(BacktestCommandTest, BaselinesAndCompare) {
  Workspace ws("cmp");
  const ExperimentConfig c = ws.load();
  cmd_ingest(c);
  std::vector<fs::path> dirs;
  for (const char* b : {"ubah", "olmar", "pamr"}) {
    BacktestOptions o;
    o.baseline = b;
    dirs.push_back(cmd_backtest(c, o).out_dir);
  }
  EXPECT_EQ(dirs[1].filename(), "backtest_olmar");
  std::ostringstream out;
  const auto reports = cmd_compare(dirs, out);
  ASSERT_EQ(reports.size(), 3u);
  EXPECT_EQ(reports[0].algorithm, "UBAH");
  EXPECT_EQ(reports[2].algorithm, "PAMR");
  const std::string table = out.str();
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 4);
  EXPECT_THROW(cmd_compare({dirs[0], ws.root() / "nothing"}, out), MissingReport);

  BacktestOptions both;
  both.baseline = "crp";
  both.checkpoint = ws.root() / "x.json";
  EXPECT_THROW(cmd_backtest(c, both), ConfigError);
  BacktestOptions unknown;
  unknown.baseline = "anticor";
  EXPECT_THROW(cmd_backtest(c, unknown), UnknownStrategy);
}

TEST(BacktestCommandTest, CrpOnFlatMarketIsFlat) {
  Workspace ws("flat", 0.0, 0.0);
  const ExperimentConfig c = ws.load();
  cmd_ingest(c);
  BacktestOptions o;
  o.baseline = "crp";
  const BacktestResult r = cmd_backtest(c, o);
  EXPECT_EQ(r.report.crr, 0.0);
  for (double w : r.wealth.values) EXPECT_EQ(w, 1000.0);
}

TEST(BacktestCommandTest, CheckpointFromOtherUniverseRejected) {
  Workspace ws("shape");
  const ExperimentConfig c = ws.load();
  cmd_ingest(c);
  const TrainResult t = cmd_train(ws.load({"--train.total_steps=0"}));
  fs::remove(ws.root() / "data" / "SYN02.csv");
  const ExperimentConfig two = ws.load({"--data.feature_store=store2"});
  cmd_ingest(two);
  BacktestOptions o;
  o.checkpoint = t.run_dir / "checkpoints" / "step_000000.json";
  EXPECT_THROW(cmd_backtest(two, o), CheckpointShapeMismatch);
}

TEST(CliBinaryTest, ExitCodes) {
  Workspace ws("exit");
  const std::string cfg = ws.config_path().string();
  EXPECT_EQ(run_cli("ingest " + cfg), 0);
  EXPECT_EQ(run_cli("backtest " + cfg + " --baseline crp"), 0);
  EXPECT_EQ(run_cli("backtest " + cfg + " --baseline nope"), 1);
  EXPECT_EQ(run_cli("train " + cfg + " --agent.gamma=abc"), 1);
  EXPECT_EQ(run_cli("--no-such-flag"), 1);
  EXPECT_EQ(run_cli("compare " + (ws.root() / "missing").string()), 1);
  EXPECT_EQ(run_cli("compare " + (ws.root() / "runs" / "backtest_crp").string() + " --out /proc/none/x.csv"), 2);
}

}  // namespace
}  // namespace pikan::cli
