#include "pikan/marketdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

#include "pikan/csv.hpp"
#include "pikan/error.hpp"

namespace pikan::marketdata {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size() && std::isfinite(out);
}

}  // namespace

Date parse_date(std::string_view text) {
  text = trim(text);
  auto bad = [&] { return ValidationError("unparseable date '" + std::string(text) + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  int y = 0;
  unsigned m = 0, d = 0;
  auto parse_int = [&](std::size_t pos, std::size_t len, auto& out) {
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    if (ec != std::errc{} || ptr != text.data() + pos + len) throw bad();
  };
  parse_int(0, 4, y);
  parse_int(5, 2, m);
  parse_int(8, 2, d);
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw bad();
  return std::chrono::sys_days{ymd};
}

std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

void OhlcvSeries::validate() const {
  const std::size_t n = dates.size();
  if (open.size() != n || high.size() != n || low.size() != n || close.size() != n || volume.size() != n) {
    throw LengthMismatch(asset_id + ": OHLCV columns differ in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double top = std::max(open[i], close[i]);
    const double bottom = std::min(open[i], close[i]);
    if (!(high[i] >= top && bottom >= low[i] && low[i] > 0.0) || volume[i] < 0.0) {
      throw ValidationError(asset_id + ": inconsistent bar on " + format_date(dates[i]));
    }
    if (i > 0 && !(dates[i] > dates[i - 1])) {
      throw NonMonotonicDates(asset_id + ": dates not strictly increasing at " + format_date(dates[i]));
    }
  }
}

OhlcvSeries parse_ohlcv(std::istream& in, std::string asset_id, const ColumnSchema& schema) {
  const auto records = csv::parse(in);
  if (records.empty()) throw MissingColumn(asset_id + ": empty file");

  std::map<std::string, std::size_t, std::less<>> header;
  for (std::size_t i = 0; i < records[0].fields.size(); ++i) {
    header.emplace(std::string(trim(records[0].fields[i])), i);
  }
  auto column = [&](const std::string& name) {
    auto it = header.find(name);
    if (it == header.end()) throw MissingColumn(asset_id + ": missing column '" + name + "'");
    return it->second;
  };
  const std::size_t c_date = column(schema.date);
  const std::size_t c_open = column(schema.open);
  const std::size_t c_high = column(schema.high);
  const std::size_t c_low = column(schema.low);
  const std::size_t c_close = column(schema.close);
  const std::size_t c_volume = column(schema.volume);
  const std::size_t needed = std::max({c_date, c_open, c_high, c_low, c_close, c_volume}) + 1;

  OhlcvSeries s;
  s.asset_id = std::move(asset_id);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() < needed) throw UnparseableRow(rec.line, "too few fields");
    Date date;
    try {
      date = parse_date(rec.fields[c_date]);
    } catch (const ValidationError& e) {
      throw UnparseableRow(rec.line, e.what());
    }
    double o, h, l, c, v;
    if (!parse_number(rec.fields[c_open], o) || !parse_number(rec.fields[c_high], h) ||
        !parse_number(rec.fields[c_low], l) || !parse_number(rec.fields[c_close], c) ||
        !parse_number(rec.fields[c_volume], v)) {
      throw UnparseableRow(rec.line, "non-numeric price or volume");
    }
    if (!(l > 0.0) || v < 0.0) throw UnparseableRow(rec.line, "non-positive price or negative volume");
    if (!(h >= std::max(o, c) && std::min(o, c) >= l)) {
      throw UnparseableRow(rec.line, "bar violates low <= open,close <= high");
    }
    if (!s.dates.empty() && !(date > s.dates.back())) {
      throw NonMonotonicDates(s.asset_id + ": line " + std::to_string(rec.line) + " date " +
                              format_date(date) + " does not follow " + format_date(s.dates.back()));
    }
    s.dates.push_back(date);
    s.open.push_back(o);
    s.high.push_back(h);
    s.low.push_back(l);
    s.close.push_back(c);
    s.volume.push_back(v);
  }
  return s;
}

OhlcvSeries load_ohlcv(const std::filesystem::path& path, const ColumnSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return parse_ohlcv(in, path.stem().string(), schema);
  } catch (const UnparseableRow& e) {
    throw UnparseableRow(e.line(), path.string() + ": " + e.what());
  }
}

std::vector<OhlcvSeries> align_on_common_dates(std::vector<OhlcvSeries> series) {
  if (series.empty()) return series;
  std::set<Date> common(series[0].dates.begin(), series[0].dates.end());
  for (std::size_t a = 1; a < series.size(); ++a) {
    std::set<Date> keep;
    for (Date d : series[a].dates) {
      if (common.count(d)) keep.insert(d);
    }
    common = std::move(keep);
  }
  for (auto& s : series) {
    if (s.dates.size() == common.size()) continue;
    OhlcvSeries out;
    out.asset_id = s.asset_id;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!common.count(s.dates[i])) continue;
      out.dates.push_back(s.dates[i]);
      out.open.push_back(s.open[i]);
      out.high.push_back(s.high[i]);
      out.low.push_back(s.low[i]);
      out.close.push_back(s.close[i]);
      out.volume.push_back(s.volume[i]);
    }
    s = std::move(out);
  }
  return series;
}

double FeatureStats::normalize(std::size_t col, double x) const {
  if (std[col] == 0.0) return 0.0;
  return (x - mean[col]) / (std[col] + kNormalizationEpsilon);
}

double FeatureStats::denormalize(std::size_t col, double z) const {
  return z * (std[col] + kNormalizationEpsilon) + mean[col];
}

FeatureStats compute_feature_stats(const FeatureMatrix& matrix, std::size_t begin, std::size_t end) {
  begin = std::max(begin, matrix.first_valid);
  end = std::min(end, matrix.rows());
  if (begin >= end) throw InsufficientHistory(matrix.asset_id + ": no valid rows in statistics range");
  const std::size_t n = end - begin;
  FeatureStats stats;
  stats.mean.assign(matrix.cols(), 0.0);
  stats.std.assign(matrix.cols(), 0.0);
  for (std::size_t j = 0; j < matrix.cols(); ++j) {
    double sum = 0.0;
    for (std::size_t r = begin; r < end; ++r) sum += matrix.at(r, j);
    const double m = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = begin; r < end; ++r) ss += (matrix.at(r, j) - m) * (matrix.at(r, j) - m);
    stats.mean[j] = m;
    stats.std[j] = std::sqrt(ss / static_cast<double>(n));
  }
  return stats;
}

FeatureMatrix normalize_features(const FeatureMatrix& matrix, const FeatureStats& stats) {
  if (stats.mean.size() != matrix.cols() || stats.std.size() != matrix.cols()) {
    throw DimensionMismatch("normalize_features: stats width differs from feature count");
  }
  FeatureMatrix out = matrix;
  for (std::size_t j = 0; j < matrix.cols(); ++j) {
    if (stats.degenerate(j)) {
      spdlog::warn("{}: feature '{}' has zero variance in the statistics range; mapped to zeros",
                   matrix.asset_id, matrix.feature_names[j]);
    }
    for (std::size_t r = matrix.first_valid; r < matrix.rows(); ++r) {
      out.at(r, j) = stats.normalize(j, matrix.at(r, j));
    }
  }
  return out;
}

StateTensor build_state(std::span<const FeatureMatrix> features, std::size_t t, std::size_t window) {
  if (features.empty()) throw DimensionMismatch("build_state: no assets");
  if (window == 0) throw DimensionMismatch("build_state: window must be positive");
  const FeatureMatrix& ref = features[0];
  std::size_t first_valid = 0;
  for (const auto& f : features) {
    if (f.dates != ref.dates || f.cols() != ref.cols()) {
      throw AssetDateMismatch("build_state: asset '" + f.asset_id + "' does not share the date/feature axis");
    }
    first_valid = std::max(first_valid, f.first_valid);
  }
  if (t >= ref.rows() || t + 1 < window || t + 1 - window < first_valid) {
    throw InsufficientHistory("build_state: day " + std::to_string(t) + " with window " + std::to_string(window) +
                              " reaches before the first valid row " + std::to_string(first_valid));
  }
  StateTensor s;
  s.window = window;
  s.assets = features.size();
  s.features = ref.cols();
  s.t_index = t;
  s.values.resize(window * s.assets * s.features);
  for (std::size_t k = 0; k < window; ++k) {
    const std::size_t day = t + 1 - window + k;
    for (std::size_t i = 0; i < s.assets; ++i) {
      const auto row = features[i].row(day);
      std::copy(row.begin(), row.end(), s.values.begin() + static_cast<std::ptrdiff_t>((k * s.assets + i) * s.features));
    }
  }
  for (double v : s.values) {
    if (!std::isfinite(v)) throw ValidationError("build_state: non-finite feature on day " + std::to_string(t));
  }
  return s;
}

void write_ohlcv(std::ostream& out, const OhlcvSeries& s) {
  csv::Writer w(out);
  w.write_row({"date", "open", "high", "low", "close", "volume"});
  for (std::size_t i = 0; i < s.size(); ++i) {
    w.write_row({format_date(s.dates[i]), csv::format_double(s.open[i]), csv::format_double(s.high[i]),
                 csv::format_double(s.low[i]), csv::format_double(s.close[i]), csv::format_double(s.volume[i])});
  }
}

}  // namespace pikan::marketdata
