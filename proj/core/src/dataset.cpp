#include "pikan/dataset.hpp"

#include <algorithm>

#include "pikan/error.hpp"

namespace pikan::marketdata {

std::size_t Dataset::first_state_index() const {
  std::size_t first_valid = 0;
  for (const auto& f : features) first_valid = std::max(first_valid, f.first_valid);
  return first_valid + window - 1;
}

StateTensor Dataset::state(std::size_t t) const { return build_state(features, t, window); }

std::vector<double> Dataset::close_row(std::size_t t) const {
  std::vector<double> row(num_assets());
  for (std::size_t i = 0; i < num_assets(); ++i) row[i] = closes[i].at(t);
  return row;
}

std::size_t Dataset::index_on_or_after(Date d) const {
  return static_cast<std::size_t>(std::lower_bound(dates.begin(), dates.end(), d) - dates.begin());
}

std::size_t Dataset::index_on_or_before(Date d) const {
  const auto it = std::upper_bound(dates.begin(), dates.end(), d);
  if (it == dates.begin()) throw InsufficientHistory("no date on or before " + format_date(d));
  return static_cast<std::size_t>(it - dates.begin()) - 1;
}

void Dataset::validate() const {
  if (assets.empty()) throw ValidationError("dataset has no assets");
  if (features.size() != assets.size() || closes.size() != assets.size() || stats.size() != assets.size()) {
    throw DimensionMismatch("dataset: per-asset arrays disagree in count");
  }
  for (std::size_t i = 0; i < assets.size(); ++i) {
    if (features[i].dates != dates) throw AssetDateMismatch("dataset: '" + assets[i] + "' off the date axis");
    if (closes[i].size() != dates.size()) throw LengthMismatch("dataset: close series length for " + assets[i]);
    for (double c : closes[i]) {
      if (!(c > 0.0)) throw NonPositivePrice("dataset: non-positive close for " + assets[i]);
    }
  }
}

Dataset make_dataset(std::vector<OhlcvSeries> raw, const DatasetOptions& options) {
  if (raw.empty()) throw ValidationError("make_dataset: no assets");
  auto aligned = align_on_common_dates(std::move(raw));
  Dataset ds;
  ds.window = options.window;
  ds.dates = aligned[0].dates;
  for (auto& series : aligned) {
    FeatureMatrix fm = compute_indicators(series, options.indicators);
    const std::size_t begin = ds.index_on_or_after(options.stats_begin);
    const std::size_t end = ds.index_on_or_before(options.stats_end) + 1;
    FeatureStats stats = compute_feature_stats(fm, begin, end);
    ds.assets.push_back(series.asset_id);
    ds.features.push_back(normalize_features(fm, stats));
    ds.stats.push_back(std::move(stats));
    ds.closes.push_back(std::move(series.close));
  }
  ds.validate();
  return ds;
}

}  // namespace pikan::marketdata
