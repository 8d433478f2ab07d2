#include <algorithm>
#include <cmath>
#include <limits>

#include "pikan/error.hpp"
#include "pikan/marketdata.hpp"

namespace pikan::marketdata {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> nan_series(std::size_t n) { return std::vector<double>(n, kNaN); }

std::vector<double> true_range(std::span<const double> high, std::span<const double> low,
                               std::span<const double> close) {
  auto tr = nan_series(close.size());
  for (std::size_t i = 1; i < close.size(); ++i) {
    tr[i] = std::max({high[i] - low[i], std::abs(high[i] - close[i - 1]), std::abs(low[i] - close[i - 1])});
  }
  return tr;
}

}  // namespace

namespace indicators {

// Wilder smoothing throughout: the first average is the plain mean of the
// first `period` one-step values, later ones are avg = (avg * (p - 1) + x) / p.
std::vector<double> rsi(std::span<const double> close, int period) {
  const auto p = static_cast<std::size_t>(period);
  auto out = nan_series(close.size());
  if (close.size() <= p) return out;
  double gain = 0.0, loss = 0.0;
  for (std::size_t i = 1; i <= p; ++i) {
    const double d = close[i] - close[i - 1];
    gain += std::max(d, 0.0);
    loss += std::max(-d, 0.0);
  }
  gain /= period;
  loss /= period;
  auto value = [](double g, double l) {
    if (l == 0.0) return g == 0.0 ? 50.0 : 100.0;
    return 100.0 - 100.0 / (1.0 + g / l);
  };
  out[p] = value(gain, loss);
  for (std::size_t i = p + 1; i < close.size(); ++i) {
    const double d = close[i] - close[i - 1];
    gain = (gain * (period - 1) + std::max(d, 0.0)) / period;
    loss = (loss * (period - 1) + std::max(-d, 0.0)) / period;
    out[i] = value(gain, loss);
  }
  return out;
}

std::vector<double> atr(std::span<const double> high, std::span<const double> low,
                        std::span<const double> close, int period) {
  const auto p = static_cast<std::size_t>(period);
  auto out = nan_series(close.size());
  if (close.size() <= p) return out;
  const auto tr = true_range(high, low, close);
  double avg = 0.0;
  for (std::size_t i = 1; i <= p; ++i) avg += tr[i];
  avg /= period;
  out[p] = avg;
  for (std::size_t i = p + 1; i < close.size(); ++i) {
    avg = (avg * (period - 1) + tr[i]) / period;
    out[i] = avg;
  }
  return out;
}

std::vector<double> adx(std::span<const double> high, std::span<const double> low,
                        std::span<const double> close, int period) {
  const auto p = static_cast<std::size_t>(period);
  const std::size_t n = close.size();
  auto out = nan_series(n);
  if (n < 2 * p) return out;
  const auto tr = true_range(high, low, close);
  std::vector<double> plus_dm(n, 0.0), minus_dm(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double up = high[i] - high[i - 1];
    const double down = low[i - 1] - low[i];
    if (up > down && up > 0.0) plus_dm[i] = up;
    if (down > up && down > 0.0) minus_dm[i] = down;
  }
  double s_tr = 0.0, s_plus = 0.0, s_minus = 0.0;
  for (std::size_t i = 1; i <= p; ++i) {
    s_tr += tr[i];
    s_plus += plus_dm[i];
    s_minus += minus_dm[i];
  }
  auto dx = [&]() {
    if (s_tr == 0.0) return 0.0;
    const double pdi = 100.0 * s_plus / s_tr;
    const double mdi = 100.0 * s_minus / s_tr;
    const double sum = pdi + mdi;
    return sum == 0.0 ? 0.0 : 100.0 * std::abs(pdi - mdi) / sum;
  };
  std::vector<double> dxs(n, kNaN);
  dxs[p] = dx();
  for (std::size_t i = p + 1; i < n; ++i) {
    s_tr = s_tr - s_tr / period + tr[i];
    s_plus = s_plus - s_plus / period + plus_dm[i];
    s_minus = s_minus - s_minus / period + minus_dm[i];
    dxs[i] = dx();
  }
  const std::size_t first = 2 * p - 1;
  double avg = 0.0;
  for (std::size_t i = p; i <= first; ++i) avg += dxs[i];
  avg /= period;
  out[first] = avg;
  for (std::size_t i = first + 1; i < n; ++i) {
    avg = (avg * (period - 1) + dxs[i]) / period;
    out[i] = avg;
  }
  return out;
}

Bands bollinger(std::span<const double> close, int period, double k) {
  const auto p = static_cast<std::size_t>(period);
  Bands b{nan_series(close.size()), nan_series(close.size())};
  for (std::size_t i = p - 1; i < close.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = i + 1 - p; j <= i; ++j) sum += close[j];
    const double mean = sum / period;
    double ss = 0.0;
    for (std::size_t j = i + 1 - p; j <= i; ++j) ss += (close[j] - mean) * (close[j] - mean);
    const double sd = std::sqrt(ss / period);
    b.upper[i] = mean + k * sd;
    b.lower[i] = mean - k * sd;
  }
  return b;
}

std::vector<double> ema(std::span<const double> xs, int period) {
  const auto p = static_cast<std::size_t>(period);
  auto out = nan_series(xs.size());
  std::size_t first = 0;
  while (first < xs.size() && std::isnan(xs[first])) ++first;
  if (first + p > xs.size()) return out;
  double seed = 0.0;
  for (std::size_t i = first; i < first + p; ++i) seed += xs[i];
  double value = seed / period;
  out[first + p - 1] = value;
  const double alpha = 2.0 / (period + 1.0);
  for (std::size_t i = first + p; i < xs.size(); ++i) {
    value = alpha * xs[i] + (1.0 - alpha) * value;
    out[i] = value;
  }
  return out;
}

Macd macd(std::span<const double> close, int fast, int slow, int signal) {
  const auto f = ema(close, fast);
  const auto s = ema(close, slow);
  Macd m{nan_series(close.size()), {}};
  for (std::size_t i = 0; i < close.size(); ++i) {
    if (!std::isnan(f[i]) && !std::isnan(s[i])) m.macd[i] = f[i] - s[i];
  }
  m.signal = ema(m.macd, signal);
  return m;
}

std::vector<double> momentum(std::span<const double> close, int period) {
  const auto p = static_cast<std::size_t>(period);
  auto out = nan_series(close.size());
  for (std::size_t i = p; i < close.size(); ++i) out[i] = close[i] - close[i - p];
  return out;
}

std::vector<double> obv(std::span<const double> close, std::span<const double> volume) {
  std::vector<double> out(close.size(), 0.0);
  if (close.empty()) return out;
  out[0] = volume[0];
  for (std::size_t i = 1; i < close.size(); ++i) {
    double step = 0.0;
    if (close[i] > close[i - 1]) step = volume[i];
    if (close[i] < close[i - 1]) step = -volume[i];
    out[i] = out[i - 1] + step;
  }
  return out;
}

std::vector<double> simple_return(std::span<const double> close, int horizon) {
  const auto h = static_cast<std::size_t>(horizon);
  auto out = nan_series(close.size());
  for (std::size_t i = h; i < close.size(); ++i) out[i] = (close[i] - close[i - h]) / close[i - h];
  return out;
}

std::vector<double> realized_volatility(std::span<const double> close, int period) {
  const auto p = static_cast<std::size_t>(period);
  auto out = nan_series(close.size());
  const auto r = simple_return(close, 1);
  for (std::size_t i = p; i < close.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = i + 1 - p; j <= i; ++j) sum += r[j];
    const double mean = sum / period;
    double ss = 0.0;
    for (std::size_t j = i + 1 - p; j <= i; ++j) ss += (r[j] - mean) * (r[j] - mean);
    out[i] = std::sqrt(ss / period);
  }
  return out;
}

std::vector<double> williams_r(std::span<const double> high, std::span<const double> low,
                               std::span<const double> close, int period) {
  const auto p = static_cast<std::size_t>(period);
  auto out = nan_series(close.size());
  for (std::size_t i = p - 1; i < close.size(); ++i) {
    double hh = high[i + 1 - p], ll = low[i + 1 - p];
    for (std::size_t j = i + 1 - p; j <= i; ++j) {
      hh = std::max(hh, high[j]);
      ll = std::min(ll, low[j]);
    }
    // Flat range: the close sits at every point of it; report the midpoint.
    out[i] = hh == ll ? -50.0 : -100.0 * (hh - close[i]) / (hh - ll);
  }
  return out;
}

}  // namespace indicators

void IndicatorParams::validate() const {
  for (int v : {adx_period, atr_period, bb_period, macd_fast, macd_slow, macd_signal, mom_period, ret_short,
                ret_long, rsi_period, rvol_period, willr_period}) {
    if (v < 1) throw ValidationError("indicator periods must be positive");
  }
  if (macd_fast >= macd_slow) throw ValidationError("MACD fast period must be shorter than slow period");
  if (!(bb_k > 0.0)) throw ValidationError("Bollinger k must be positive");
}

std::size_t IndicatorParams::warmup() const {
  const int longest = std::max({2 * adx_period - 1, atr_period, bb_period - 1, macd_slow + macd_signal - 2,
                                mom_period, ret_short, ret_long, rsi_period, rvol_period, willr_period - 1});
  return static_cast<std::size_t>(longest);
}

FeatureMatrix compute_indicators(const OhlcvSeries& series, const IndicatorParams& params) {
  params.validate();
  series.validate();
  const std::size_t n = series.size();
  const std::size_t warm = params.warmup();
  if (n <= warm) {
    throw SeriesTooShort(series.asset_id + ": need more than " + std::to_string(warm) + " rows, got " +
                         std::to_string(n));
  }
  namespace ind = indicators;
  const auto adx = ind::adx(series.high, series.low, series.close, params.adx_period);
  const auto atr = ind::atr(series.high, series.low, series.close, params.atr_period);
  const auto bb = ind::bollinger(series.close, params.bb_period, params.bb_k);
  const auto macd = ind::macd(series.close, params.macd_fast, params.macd_slow, params.macd_signal);
  const auto mom = ind::momentum(series.close, params.mom_period);
  const auto obv = ind::obv(series.close, series.volume);
  const auto ret1 = ind::simple_return(series.close, params.ret_short);
  const auto ret5 = ind::simple_return(series.close, params.ret_long);
  const auto rsi = ind::rsi(series.close, params.rsi_period);
  const auto rvol = ind::realized_volatility(series.close, params.rvol_period);
  const auto willr = ind::williams_r(series.high, series.low, series.close, params.willr_period);

  const std::array<const std::vector<double>*, kFeatureCount> columns = {
      &series.open, &series.high, &series.low,  &series.close, &series.volume, &adx,
      &atr,         &bb.upper,    &bb.lower,    &macd.macd,    &macd.signal,   &mom,
      &obv,         &ret1,        &ret5,        &rsi,          &rvol,          &willr};

  FeatureMatrix fm;
  fm.asset_id = series.asset_id;
  fm.dates = series.dates;
  fm.feature_names.assign(kFeatureNames.begin(), kFeatureNames.end());
  fm.first_valid = warm;
  fm.values.resize(n * kFeatureCount);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) fm.values[r * kFeatureCount + j] = (*columns[j])[r];
  }
  return fm;
}

}  // namespace pikan::marketdata
