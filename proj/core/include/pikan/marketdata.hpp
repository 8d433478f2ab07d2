#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pikan::marketdata {

using Date = std::chrono::sys_days;

// Strict YYYY-MM-DD. Throws ValidationError on anything else.
Date parse_date(std::string_view text);
std::string format_date(Date date);

struct OhlcvSeries {
  std::string asset_id;
  std::vector<Date> dates;
  std::vector<double> open;
  std::vector<double> high;
  std::vector<double> low;
  std::vector<double> close;
  std::vector<double> volume;

  std::size_t size() const noexcept { return dates.size(); }

  // Checks equal lengths, bar ordering (high >= max(open, close) >=
  // min(open, close) >= low) and strictly increasing dates.
  void validate() const;
};

struct ColumnSchema {
  std::string date = "date";
  std::string open = "open";
  std::string high = "high";
  std::string low = "low";
  std::string close = "close";
  std::string volume = "volume";
};

// Rows are sorted by date after parsing; duplicate dates are rejected as
// NonMonotonicDates, as are files whose rows are out of order.
OhlcvSeries parse_ohlcv(std::istream& in, std::string asset_id, const ColumnSchema& schema = {});
OhlcvSeries load_ohlcv(const std::filesystem::path& path, const ColumnSchema& schema = {});

// date,open,high,low,close,volume with shortest round-trip numbers.
void write_ohlcv(std::ostream& out, const OhlcvSeries& series);

// Inner join on the dates every series has in common.
std::vector<OhlcvSeries> align_on_common_dates(std::vector<OhlcvSeries> series);

struct IndicatorParams {
  int adx_period = 14;
  int atr_period = 14;
  int bb_period = 20;
  double bb_k = 2.0;
  int macd_fast = 12;
  int macd_slow = 26;
  int macd_signal = 9;
  int mom_period = 10;
  int ret_short = 1;
  int ret_long = 5;
  int rsi_period = 14;
  int rvol_period = 20;
  int willr_period = 60;

  // First row index at which every indicator is defined.
  std::size_t warmup() const;
  void validate() const;
};

inline constexpr std::size_t kFeatureCount = 18;
inline constexpr std::size_t kCloseIndex = 3;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "open", "high",     "low",      "close", "volume", "ADX",  "ATR",  "BB_upper", "BB_lower",
    "MACD", "MACDS",    "MOM",      "OBV",   "RET1",   "RET5", "RSI",  "RVOL",     "WILLR"};

// (days x features) row-major. Rows before `first_valid` hold NaN in the
// indicator columns and must not be used for states or statistics.
struct FeatureMatrix {
  std::string asset_id;
  std::vector<Date> dates;
  std::vector<std::string> feature_names;
  std::vector<double> values;
  std::size_t first_valid = 0;
  std::size_t price_feature_index = kCloseIndex;

  std::size_t rows() const noexcept { return dates.size(); }
  std::size_t cols() const noexcept { return feature_names.size(); }
  double at(std::size_t row, std::size_t col) const { return values[row * cols() + col]; }
  double& at(std::size_t row, std::size_t col) { return values[row * cols() + col]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols(), cols()}; }
  bool valid(std::size_t r) const noexcept { return r >= first_valid && r < rows(); }
};

FeatureMatrix compute_indicators(const OhlcvSeries& series, const IndicatorParams& params = {});

// Individual indicators. Each returns a series the same length as its input
// with NaN during warm-up.
namespace indicators {
std::vector<double> rsi(std::span<const double> close, int period);
std::vector<double> atr(std::span<const double> high, std::span<const double> low,
                        std::span<const double> close, int period);
std::vector<double> adx(std::span<const double> high, std::span<const double> low,
                        std::span<const double> close, int period);
struct Bands {
  std::vector<double> upper;
  std::vector<double> lower;
};
Bands bollinger(std::span<const double> close, int period, double k);
// EMA seeded with the simple mean of the first `period` defined values.
std::vector<double> ema(std::span<const double> xs, int period);
struct Macd {
  std::vector<double> macd;
  std::vector<double> signal;
};
Macd macd(std::span<const double> close, int fast, int slow, int signal);
std::vector<double> momentum(std::span<const double> close, int period);
std::vector<double> obv(std::span<const double> close, std::span<const double> volume);
std::vector<double> simple_return(std::span<const double> close, int horizon);
// Rolling population std of one-day simple returns.
std::vector<double> realized_volatility(std::span<const double> close, int period);
std::vector<double> williams_r(std::span<const double> high, std::span<const double> low,
                               std::span<const double> close, int period);
}  // namespace indicators

inline constexpr double kNormalizationEpsilon = 1e-8;

struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> std;  // population

  double normalize(std::size_t col, double x) const;
  double denormalize(std::size_t col, double z) const;
  bool degenerate(std::size_t col) const { return std[col] == 0.0; }
};

// Statistics over valid rows in [begin, end). Callers pass the training
// range only so that test rows never leak into the scaling.
FeatureStats compute_feature_stats(const FeatureMatrix& matrix, std::size_t begin, std::size_t end);

// (x - mean) / (std + eps) per column; zero-variance columns become all zeros
// and log a warning. Invalid rows are left as they are.
FeatureMatrix normalize_features(const FeatureMatrix& matrix, const FeatureStats& stats);

// (w x m x n) lookback window ending at day t_index.
struct StateTensor {
  std::size_t window = 0;
  std::size_t assets = 0;
  std::size_t features = 0;
  std::size_t t_index = 0;
  std::vector<double> values;

  double at(std::size_t k, std::size_t i, std::size_t j) const {
    return values[(k * assets + i) * features + j];
  }
  std::span<const double> flat() const { return values; }
  std::size_t size() const noexcept { return values.size(); }
};

StateTensor build_state(std::span<const FeatureMatrix> features, std::size_t t, std::size_t window);

}  // namespace pikan::marketdata
