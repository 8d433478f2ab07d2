#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pikan/marketdata.hpp"

namespace pikan::marketdata {

// m aligned assets on one date axis: normalized features for states plus the
// raw closes that drive price relatives.
struct Dataset {
  std::vector<std::string> assets;
  std::vector<Date> dates;
  std::vector<FeatureMatrix> features;       // normalized, one per asset
  std::vector<std::vector<double>> closes;   // [asset][day], raw currency units
  std::vector<FeatureStats> stats;           // per asset, frozen from the training range
  std::size_t window = 5;

  std::size_t num_assets() const noexcept { return assets.size(); }
  std::size_t num_features() const noexcept { return features.empty() ? 0 : features[0].cols(); }
  std::size_t days() const noexcept { return dates.size(); }
  std::size_t state_size() const noexcept { return window * num_assets() * num_features(); }

  // Earliest day whose lookback window contains only valid rows.
  std::size_t first_state_index() const;

  StateTensor state(std::size_t t) const;
  std::vector<double> close_row(std::size_t t) const;

  // Index of the first date >= d (days() when none) and last date <= d.
  std::size_t index_on_or_after(Date d) const;
  std::size_t index_on_or_before(Date d) const;

  void validate() const;
};

struct DatasetOptions {
  IndicatorParams indicators;
  std::size_t window = 5;
  Date stats_begin;  // normalization statistics come from [stats_begin, stats_end]
  Date stats_end;
};

// Aligns on common dates, computes indicators and freezes per-asset
// normalization statistics from the configured range.
Dataset make_dataset(std::vector<OhlcvSeries> raw, const DatasetOptions& options);

}  // namespace pikan::marketdata
