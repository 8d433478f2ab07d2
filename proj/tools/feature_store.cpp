#include "feature_store.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "pikan/csv.hpp"
#include "pikan/error.hpp"

namespace pikan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << bytes;
  if (!out) throw Error("write failed for " + path.string());
}

json indicator_json(const marketdata::IndicatorParams& p) {
  return {{"adx_period", p.adx_period},   {"atr_period", p.atr_period},     {"bb_period", p.bb_period},
          {"bb_k", p.bb_k},               {"macd_fast", p.macd_fast},       {"macd_slow", p.macd_slow},
          {"macd_signal", p.macd_signal}, {"mom_period", p.mom_period},     {"ret_short", p.ret_short},
          {"ret_long", p.ret_long},       {"rsi_period", p.rsi_period},     {"rvol_period", p.rvol_period},
          {"willr_period", p.willr_period}};
}

double parse_field(const std::string& s, const fs::path& file, std::size_t line) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw UnparseableRow(line, file.string() + ": bad number '" + s + "'");
  }
  return v;
}

json stats_range(const DataConfig& d) {
  return json::array({marketdata::format_date(d.train_start), marketdata::format_date(d.train_end)});
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_bytes(path)); }

std::string feature_csv(const marketdata::FeatureMatrix& m, const std::vector<double>& closes) {
  std::ostringstream out;
  csv::Writer w(out);
  csv::Row header{"date", "valid", "close_raw"};
  header.insert(header.end(), m.feature_names.begin(), m.feature_names.end());
  w.write_row(header);
  csv::Row row;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    row.clear();
    row.push_back(marketdata::format_date(m.dates[r]));
    row.push_back(m.valid(r) ? "1" : "0");
    row.push_back(csv::format_double(closes.at(r)));
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const double v = m.at(r, j);
      row.push_back(std::isnan(v) ? std::string() : csv::format_double(v));
    }
    w.write_row(row);
  }
  return out.str();
}

json build_feature_store(const ExperimentConfig& config) {
  const DataConfig& d = config.data;
  std::vector<marketdata::OhlcvSeries> raw;
  json sources = json::array();
  for (const auto& path : d.assets) {
    try {
      raw.push_back(marketdata::load_ohlcv(path));
    } catch (const UnparseableRow&) {
      throw;
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
    sources.push_back({{"path", path.filename().string()}, {"sha256", sha256_file(path)}});
  }
  marketdata::DatasetOptions opts;
  opts.indicators = d.indicators;
  opts.window = d.window;
  opts.stats_begin = d.train_start;
  opts.stats_end = d.train_end;
  const marketdata::Dataset ds = marketdata::make_dataset(std::move(raw), opts);
  if (ds.index_on_or_after(d.train_start) >= ds.days()) {
    throw InsufficientHistory("no aligned trading days on or after data.train_start");
  }

  const fs::path store = d.feature_store;
  const fs::path tmp = store.string() + ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp / "features");

  json assets = json::array();
  for (std::size_t i = 0; i < ds.num_assets(); ++i) {
    const std::string name = ds.assets[i] + ".csv";
    const std::string bytes = feature_csv(ds.features[i], ds.closes[i]);
    write_bytes(tmp / "features" / name, bytes);
    assets.push_back({{"id", ds.assets[i]},
                      {"file", "features/" + name},
                      {"sha256", sha256_hex(bytes)},
                      {"first_valid", ds.features[i].first_valid},
                      {"source", sources[i]},
                      {"stats", {{"mean", ds.stats[i].mean}, {"std", ds.stats[i].std}}}});
  }
  json manifest = {{"format", kManifestFormat},
                   {"version", kManifestVersion},
                   {"days", ds.days()},
                   {"first_date", marketdata::format_date(ds.dates.front())},
                   {"last_date", marketdata::format_date(ds.dates.back())},
                   {"stats_range", stats_range(d)},
                   {"indicators", indicator_json(d.indicators)},
                   {"feature_names", ds.features[0].feature_names},
                   {"assets", assets}};
  write_bytes(tmp / kManifestName, manifest.dump(2) + "\n");

  fs::remove_all(store);
  if (store.has_parent_path()) fs::create_directories(store.parent_path());
  fs::rename(tmp, store);
  spdlog::info("feature store written to {} ({} assets, {} days)", store.string(), ds.num_assets(), ds.days());
  return manifest;
}

marketdata::Dataset load_feature_store(const ExperimentConfig& config) {
  const DataConfig& d = config.data;
  const fs::path store = d.feature_store;
  const fs::path manifest_path = store / kManifestName;
  if (!fs::is_regular_file(manifest_path)) {
    throw ConfigError("feature store not found at " + store.string() + "; run `pikan ingest` first");
  }
  json manifest;
  try {
    manifest = json::parse(read_bytes(manifest_path));
  } catch (const json::exception& e) {
    throw ValidationError(manifest_path.string() + ": " + e.what());
  }
  if (manifest.value("format", "") != kManifestFormat || manifest.value("version", 0) != kManifestVersion) {
    throw ValidationError(manifest_path.string() + ": not a version 1 feature manifest");
  }
  if (manifest.at("stats_range") != stats_range(d) || manifest.at("indicators") != indicator_json(d.indicators)) {
    throw ConfigError("feature store at " + store.string() +
                      " was built with a different training range or indicator set; re-run `pikan ingest`");
  }
  const json& assets = manifest.at("assets");
  if (assets.size() != d.assets.size()) {
    throw ConfigError("feature store holds " + std::to_string(assets.size()) + " assets, config lists " +
                      std::to_string(d.assets.size()));
  }

  marketdata::Dataset ds;
  ds.window = d.window;
  for (std::size_t i = 0; i < assets.size(); ++i) {
    const json& a = assets[i];
    const std::string id = a.at("id").get<std::string>();
    if (id != d.assets[i].stem().string()) {
      throw ConfigError("feature store asset " + id + " does not match config asset " + d.assets[i].stem().string());
    }
    const fs::path file = store / a.at("file").get<std::string>();
    const std::string bytes = read_bytes(file);
    if (sha256_hex(bytes) != a.at("sha256").get<std::string>()) {
      throw ValidationError("checksum mismatch for " + file.string());
    }
    std::istringstream in(bytes);
    const auto records = csv::parse(in);
    if (records.empty()) throw SeriesTooShort(file.string() + ": empty feature file");
    const auto& header = records[0].fields;
    if (header.size() < 3 || header[0] != "date" || header[1] != "valid" || header[2] != "close_raw") {
      throw MissingColumn(file.string() + ": unexpected feature file header");
    }

    marketdata::FeatureMatrix fm;
    fm.asset_id = id;
    fm.feature_names.assign(header.begin() + 3, header.end());
    fm.first_valid = a.at("first_valid").get<std::size_t>();
    std::vector<double> closes;
    for (std::size_t r = 1; r < records.size(); ++r) {
      const auto& rec = records[r];
      if (rec.fields.size() != header.size()) {
        throw UnparseableRow(rec.line, file.string() + ": expected " + std::to_string(header.size()) + " fields");
      }
      fm.dates.push_back(marketdata::parse_date(rec.fields[0]));
      closes.push_back(parse_field(rec.fields[2], file, rec.line));
      for (std::size_t j = 3; j < rec.fields.size(); ++j) fm.values.push_back(parse_field(rec.fields[j], file, rec.line));
    }
    if (i == 0) ds.dates = fm.dates;
    ds.assets.push_back(id);
    ds.features.push_back(std::move(fm));
    ds.closes.push_back(std::move(closes));
    ds.stats.push_back({a.at("stats").at("mean").get<std::vector<double>>(),
                        a.at("stats").at("std").get<std::vector<double>>()});
  }
  ds.validate();
  return ds;
}

}  // namespace pikan::cli
