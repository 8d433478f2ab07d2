#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pikan/marketdata.hpp"

namespace pikan::metrics {

inline constexpr double kTradingDays = 252.0;

// Daily portfolio values P_0..P_T. `dates` may be empty for bare series.
struct WealthSeries {
  std::vector<marketdata::Date> dates;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  // Throws InsufficientData (fewer than 2 points) or ValidationError.
  void validate() const;
};

std::vector<double> daily_returns(const WealthSeries& series);
// Number of daily returns divided by 252.
double years_spanned(const WealthSeries& series);

double cumulative_return(const WealthSeries& series);               // percent
double annualized_return(const WealthSeries& series, double years);  // fraction
double annualized_volatility(std::span<const double> daily_returns); // fraction, population std
double sharpe_ratio(const WealthSeries& series, double risk_free = 0.0);
double max_drawdown(const WealthSeries& series);                     // percent, >= 0
double calmar_ratio(double ann_return, double mdd_percent);

struct MetricsReport {
  std::string algorithm;
  double crr = 0.0;         // percent
  double ann_return = 0.0;  // fraction per year
  double ann_vol = 0.0;     // fraction per sqrt(year)
  std::optional<double> sharpe;  // absent when volatility is zero
  double mdd = 0.0;         // percent
  std::optional<double> calmar;  // absent when drawdown is zero
  double apv = 0.0;         // terminal value
};

MetricsReport full_report(const WealthSeries& series, std::string algorithm, double risk_free = 0.0);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);

// Algorithm, CumRet, AnnRet, AnnVol, Sharpe, MDD, Calmar, APV. Percent
// columns are in percent; MDD is written negative as a decline.
std::vector<std::string> table_columns();
std::vector<std::string> table_row(const MetricsReport& report);
void write_table_csv(std::ostream& out, std::span<const MetricsReport> reports);

}  // namespace pikan::metrics
