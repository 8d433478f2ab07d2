#include "pikan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "pikan/csv.hpp"
#include "pikan/error.hpp"
#include "pikan/stats.hpp"

namespace pikan::metrics {

void WealthSeries::validate() const {
  if (values.size() < 2) throw InsufficientData("wealth series needs at least 2 values");
  if (!dates.empty() && dates.size() != values.size()) throw LengthMismatch("wealth series dates and values differ in length");
  for (double v : values) {
    if (!std::isfinite(v) || v <= 0.0) throw ValidationError("wealth series values must be positive and finite");
  }
  for (std::size_t k = 1; k < dates.size(); ++k) {
    if (!(dates[k - 1] < dates[k])) throw NonMonotonicDates("wealth series dates must increase strictly");
  }
}

std::vector<double> daily_returns(const WealthSeries& series) {
  series.validate();
  std::vector<double> r(series.size() - 1);
  for (std::size_t k = 1; k < series.size(); ++k) r[k - 1] = series.values[k] / series.values[k - 1] - 1.0;
  return r;
}

double years_spanned(const WealthSeries& series) {
  series.validate();
  return static_cast<double>(series.size() - 1) / kTradingDays;
}

double cumulative_return(const WealthSeries& series) {
  series.validate();
  return (series.values.back() - series.values.front()) / series.values.front() * 100.0;
}

double annualized_return(const WealthSeries& series, double years) {
  series.validate();
  if (!(years > 0.0)) throw ValidationError("annualized_return needs years > 0");
  return std::pow(series.values.back() / series.values.front(), 1.0 / years) - 1.0;
}

double annualized_volatility(std::span<const double> daily_returns) {
  if (daily_returns.size() < 2) throw InsufficientData("annualized volatility needs at least 2 returns");
  return stats::population_std(daily_returns) * std::sqrt(kTradingDays);
}

double sharpe_ratio(const WealthSeries& series, double risk_free) {
  const double vol = annualized_volatility(daily_returns(series));
  if (vol == 0.0) throw ZeroVolatility("Sharpe ratio undefined for zero volatility");
  return (annualized_return(series, years_spanned(series)) - risk_free) / vol;
}

double max_drawdown(const WealthSeries& series) {
  series.validate();
  double peak = series.values.front();
  double worst = 0.0;
  for (double v : series.values) {
    peak = std::max(peak, v);
    worst = std::max(worst, (peak - v) / peak);
  }
  return worst * 100.0;
}

double calmar_ratio(double ann_return, double mdd_percent) {
  if (!(std::abs(mdd_percent) > 0.0)) throw ZeroDrawdown("Calmar ratio undefined for zero drawdown");
  return ann_return / std::abs(mdd_percent / 100.0);
}

MetricsReport full_report(const WealthSeries& series, std::string algorithm, double risk_free) {
  series.validate();
  MetricsReport r;
  r.algorithm = std::move(algorithm);
  r.crr = cumulative_return(series);
  r.ann_return = annualized_return(series, years_spanned(series));
  r.ann_vol = series.size() >= 3 ? annualized_volatility(daily_returns(series)) : 0.0;
  if (r.ann_vol > 0.0) r.sharpe = (r.ann_return - risk_free) / r.ann_vol;
  r.mdd = max_drawdown(series);
  if (r.mdd > 0.0) r.calmar = calmar_ratio(r.ann_return, r.mdd);
  r.apv = series.values.back();
  return r;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j{{"algorithm", r.algorithm}, {"crr", r.crr},  {"ann_return", r.ann_return},
                   {"ann_vol", r.ann_vol},     {"mdd", r.mdd},  {"apv", r.apv}};
  j["sharpe"] = r.sharpe ? nlohmann::json(*r.sharpe) : nlohmann::json(nullptr);
  j["calmar"] = r.calmar ? nlohmann::json(*r.calmar) : nlohmann::json(nullptr);
  return j;
}

MetricsReport report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  try {
    r.algorithm = j.at("algorithm").get<std::string>();
    r.crr = j.at("crr").get<double>();
    r.ann_return = j.at("ann_return").get<double>();
    r.ann_vol = j.at("ann_vol").get<double>();
    r.mdd = j.at("mdd").get<double>();
    r.apv = j.at("apv").get<double>();
    if (!j.at("sharpe").is_null()) r.sharpe = j.at("sharpe").get<double>();
    if (!j.at("calmar").is_null()) r.calmar = j.at("calmar").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed metrics report: ") + e.what());
  }
  return r;
}

std::vector<std::string> table_columns() {
  return {"Algorithm", "CumRet", "AnnRet", "AnnVol", "Sharpe", "MDD", "Calmar", "APV"};
}

std::vector<std::string> table_row(const MetricsReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); };
  return {r.algorithm,
          csv::format_double(r.crr),
          csv::format_double(r.ann_return * 100.0),
          csv::format_double(r.ann_vol * 100.0),
          opt(r.sharpe),
          csv::format_double(r.mdd == 0.0 ? 0.0 : -r.mdd),
          opt(r.calmar),
          csv::format_double(r.apv)};
}

void write_table_csv(std::ostream& out, std::span<const MetricsReport> reports) {
  csv::Writer w(out);
  w.write_row(table_columns());
  for (const auto& r : reports) w.write_row(table_row(r));
}

}  // namespace pikan::metrics
