#include "config.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "pikan/error.hpp"
#include "toml_lite.hpp"

namespace pikan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& table, const std::string& section, const std::set<std::string>& allowed) {
  if (!table.is_object()) throw ConfigError(section + " must be a table");
  for (const auto& [key, _] : table.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key " + (section.empty() ? key : section + "." + key));
  }
}

template <typename T>
T read(const json& table, const std::string& section, const std::string& key, T fallback) {
  if (!table.contains(key)) return fallback;
  const json& v = table.at(key);
  try {
    if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, int>) {
      if (!v.is_number_integer()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError(section + "." + key + " has the wrong type");
  }
}

marketdata::Date read_date(const json& table, const std::string& section, const std::string& key) {
  if (!table.contains(key)) throw ConfigError(section + "." + key + " is required");
  const auto text = read<std::string>(table, section, key, "");
  try {
    return marketdata::parse_date(text);
  } catch (const ValidationError&) {
    throw ConfigError(section + "." + key + " must be a YYYY-MM-DD date, got '" + text + "'");
  }
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

marketdata::IndicatorParams read_indicators(const json& t) {
  marketdata::IndicatorParams p;
  check_keys(t, "data.indicators",
             {"adx_period", "atr_period", "bb_period", "bb_k", "macd_fast", "macd_slow", "macd_signal", "mom_period",
              "ret_short", "ret_long", "rsi_period", "rvol_period", "willr_period"});
  const std::string s = "data.indicators";
  p.adx_period = read(t, s, "adx_period", p.adx_period);
  p.atr_period = read(t, s, "atr_period", p.atr_period);
  p.bb_period = read(t, s, "bb_period", p.bb_period);
  p.bb_k = read(t, s, "bb_k", p.bb_k);
  p.macd_fast = read(t, s, "macd_fast", p.macd_fast);
  p.macd_slow = read(t, s, "macd_slow", p.macd_slow);
  p.macd_signal = read(t, s, "macd_signal", p.macd_signal);
  p.mom_period = read(t, s, "mom_period", p.mom_period);
  p.ret_short = read(t, s, "ret_short", p.ret_short);
  p.ret_long = read(t, s, "ret_long", p.ret_long);
  p.rsi_period = read(t, s, "rsi_period", p.rsi_period);
  p.rvol_period = read(t, s, "rvol_period", p.rvol_period);
  p.willr_period = read(t, s, "willr_period", p.willr_period);
  try {
    p.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("data.indicators: ") + e.what());
  }
  return p;
}

DataConfig read_data(const json& t, const fs::path& base) {
  check_keys(t, "data", {"assets", "data_dir", "feature_store", "train_start", "train_end", "test_start", "test_end",
                         "window", "indicators"});
  DataConfig d;
  if (t.contains("assets") == t.contains("data_dir")) {
    throw ConfigError("data needs exactly one of data.assets or data.data_dir");
  }
  if (t.contains("assets")) {
    const json& a = t.at("assets");
    if (!a.is_array() || a.empty()) throw ConfigError("data.assets must be a non-empty array of paths");
    for (const auto& e : a) {
      if (!e.is_string()) throw ConfigError("data.assets entries must be strings");
      d.assets.push_back(resolve(base, e.get<std::string>()));
    }
  } else {
    const fs::path dir = resolve(base, read<std::string>(t, "data", "data_dir", ""));
    if (!fs::is_directory(dir)) throw ConfigError("data.data_dir does not exist: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") d.assets.push_back(entry.path());
    }
    std::sort(d.assets.begin(), d.assets.end());
    if (d.assets.empty()) throw ConfigError("data.data_dir holds no .csv files: " + dir.string());
  }
  d.feature_store = resolve(base, read<std::string>(t, "data", "feature_store", "features"));
  d.train_start = read_date(t, "data", "train_start");
  d.train_end = read_date(t, "data", "train_end");
  d.test_start = read_date(t, "data", "test_start");
  d.test_end = read_date(t, "data", "test_end");
  d.window = read<std::size_t>(t, "data", "window", d.window);
  if (t.contains("indicators")) d.indicators = read_indicators(t.at("indicators"));
  return d;
}

fs::path output_root(const json& doc, const fs::path& base) {
  if (const char* env = std::getenv(kOutputRootEnv); env != nullptr && *env != '\0') return fs::path(env);
  if (doc.contains("output_root")) return resolve(base, read<std::string>(doc, "", "output_root", ""));
  return base;
}

void set_path(json& doc, const std::string& dotted, json value) {
  json* node = &doc;
  std::size_t begin = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', begin);
    const std::string part = dotted.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin);
    if (part.empty()) throw ConfigError("malformed override key '" + dotted + "'");
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    json& child = (*node)[part];
    if (child.is_null()) child = json::object();
    if (!child.is_object()) throw ConfigError("override '" + dotted + "' descends into a non-table value");
    node = &child;
    begin = dot + 1;
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (data.window == 0) throw ConfigError("data.window must be positive");
  if (data.train_start > data.train_end) throw ConfigError("data.train_start is after data.train_end");
  if (data.test_start > data.test_end) throw ConfigError("data.test_start is after data.test_end");
  if (!(data.train_end < data.test_start || data.test_end < data.train_start)) {
    throw ConfigError("train range [" + marketdata::format_date(data.train_start) + ", " +
                      marketdata::format_date(data.train_end) + "] overlaps test range [" +
                      marketdata::format_date(data.test_start) + ", " + marketdata::format_date(data.test_end) + "]");
  }
  std::set<std::string> ids;
  for (const auto& p : data.assets) {
    if (!fs::is_regular_file(p)) throw ConfigError("asset file does not exist: " + p.string());
    if (!ids.insert(p.stem().string()).second) throw ConfigError("duplicate asset id " + p.stem().string());
  }
  try {
    env.validate();
    agent.validate();
    baselines.validate(data.assets.size());
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
}

void apply_overrides(json& doc, const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0 || a.size() <= 2) throw ConfigError("unexpected argument '" + a + "'");
    std::string key = a.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else if (i + 1 < args.size()) {
      value = args[++i];
    } else {
      throw ConfigError("override --" + key + " needs a value");
    }
    if (key.find('.') == std::string::npos && key != "seed" && key != "output_dir" && key != "output_root") {
      throw ConfigError("unknown option --" + key);
    }
    set_path(doc, key, toml::parse_value(value));
  }
}

ExperimentConfig config_from_json(const json& doc, const fs::path& base_dir) {
  check_keys(doc, "", {"seed", "output_dir", "output_root", "data", "env", "agent", "physics", "train", "baselines"});
  ExperimentConfig c;
  c.raw = doc;
  c.seed = read<std::uint64_t>(doc, "", "seed", 0);
  c.output_dir = resolve(output_root(doc, base_dir), read<std::string>(doc, "", "output_dir", "runs"));

  if (!doc.contains("data")) throw ConfigError("missing [data] section");
  c.data = read_data(doc.at("data"), base_dir);

  const json env = doc.value("env", json::object());
  check_keys(env, "env", {"commission", "initial_wealth"});
  c.env.commission = read(env, "env", "commission", c.env.commission);
  c.env.initial_wealth = read(env, "env", "initial_wealth", c.env.initial_wealth);

  json agent = doc.value("agent", json::object({{"algorithm", "td3_pinn"}}));
  if (!agent.is_object()) throw ConfigError("agent must be a table");
  if (!agent.contains("seed")) agent["seed"] = c.seed;
  c.agent = agents::agent_config_from_json(agent, doc.value("physics", json::object()));

  const json train = doc.value("train", json::object());
  check_keys(train, "train", {"total_steps", "checkpoint_every"});
  c.train.total_steps = read(train, "train", "total_steps", c.train.total_steps);
  c.train.checkpoint_every = read(train, "train", "checkpoint_every", c.train.checkpoint_every);

  const json bl = doc.value("baselines", json::object());
  check_keys(bl, "baselines", {"window", "olmar_epsilon", "rmr_epsilon", "pamr_epsilon", "crp_target",
                               "median_tolerance", "median_max_iterations"});
  auto& b = c.baselines;
  b.window = read(bl, "baselines", "window", b.window);
  b.olmar_epsilon = read(bl, "baselines", "olmar_epsilon", b.olmar_epsilon);
  b.rmr_epsilon = read(bl, "baselines", "rmr_epsilon", b.rmr_epsilon);
  b.pamr_epsilon = read(bl, "baselines", "pamr_epsilon", b.pamr_epsilon);
  b.median_tolerance = read(bl, "baselines", "median_tolerance", b.median_tolerance);
  b.median_max_iterations = read(bl, "baselines", "median_max_iterations", b.median_max_iterations);
  if (bl.contains("crp_target")) {
    const json& t = bl.at("crp_target");
    if (!t.is_array()) throw ConfigError("baselines.crp_target must be an array");
    for (const auto& e : t) {
      if (!e.is_number()) throw ConfigError("baselines.crp_target entries must be numbers");
      b.crp_target.push_back(e.get<double>());
    }
  }

  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  json doc = toml::parse_file(path);
  apply_overrides(doc, overrides);
  ExperimentConfig c = config_from_json(doc, fs::absolute(path).parent_path());
  c.source = path;
  return c;
}

}  // namespace pikan::cli
