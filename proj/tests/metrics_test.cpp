#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pikan/error.hpp"
#include "pikan/metrics.hpp"

namespace pikan::metrics {
namespace {

WealthSeries series(std::vector<double> v) { return WealthSeries{{}, std::move(v)}; }

double brute_force_mdd(const std::vector<double>& v) {
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i; j < v.size(); ++j) worst = std::max(worst, (v[i] - v[j]) / v[i]);
  }
  return worst * 100.0;
}

TEST(DrawdownTest, HandCases) {
  EXPECT_DOUBLE_EQ(max_drawdown(series({100, 50, 75})), 50.0);
  EXPECT_DOUBLE_EQ(max_drawdown(series({100, 120, 60, 130})), 50.0);
  EXPECT_EQ(max_drawdown(series({1, 2, 3, 4})), 0.0);
}

TEST(DrawdownTest, MatchesBruteForceAndIsScaleInvariant) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 0.02);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> v{1000.0};
    for (int t = 0; t < 60; ++t) v.push_back(v.back() * std::exp(n(rng)));
    const double mdd = max_drawdown(series(v));
    EXPECT_NEAR(mdd, brute_force_mdd(v), 1e-9);
    EXPECT_GE(mdd, 0.0);
    EXPECT_LE(mdd, 100.0);
    std::vector<double> scaled = v;
    for (auto& x : scaled) x *= 7.5;
    EXPECT_NEAR(max_drawdown(series(scaled)), mdd, 1e-9);
    EXPECT_NEAR(full_report(series(scaled), "x").crr, full_report(series(v), "x").crr, 1e-9);
  }
}

TEST(ReturnTest, CumulativeAndAnnualized) {
  EXPECT_NEAR(cumulative_return(series({1000.0, 1446.58})), 44.658, 1e-9);
  EXPECT_EQ(cumulative_return(series({5.0, 5.0, 5.0})), 0.0);
  std::vector<double> v(253);
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = 100.0 * std::pow(1.1, t / 252.0);
  const WealthSeries year = series(v);
  EXPECT_DOUBLE_EQ(years_spanned(year), 1.0);
  EXPECT_NEAR(annualized_return(year, 1.0), 0.1, 1e-12);
  EXPECT_THROW(annualized_return(year, 0.0), ValidationError);
}

TEST(VolatilityTest, AlternatingReturns) {
  std::vector<double> r;
  for (int t = 0; t < 100; ++t) r.push_back(t % 2 ? -0.01 : 0.01);
  EXPECT_NEAR(annualized_volatility(r), 0.1587, 1e-4);
  EXPECT_THROW(annualized_volatility(std::vector<double>{0.01}), InsufficientData);
}

TEST(RatioTest, SharpeAndCalmar) {
  EXPECT_DOUBLE_EQ(calmar_ratio(0.2, 10.0), 2.0);
  EXPECT_DOUBLE_EQ(calmar_ratio(0.2, -10.0), 2.0);
  EXPECT_THROW(calmar_ratio(0.2, 0.0), ZeroDrawdown);
  EXPECT_THROW(sharpe_ratio(series({1.0, 1.0, 1.0})), ZeroVolatility);
  const WealthSeries s = series({100, 103, 101, 106, 104, 110});
  const double vol = annualized_volatility(daily_returns(s));
  EXPECT_NEAR(sharpe_ratio(s), annualized_return(s, years_spanned(s)) / vol, 1e-12);
  EXPECT_NEAR(sharpe_ratio(s, 0.05), (annualized_return(s, years_spanned(s)) - 0.05) / vol, 1e-12);
}

TEST(ReportTest, OptionalRatiosAbsentWhenUndefined) {
  const MetricsReport flat = full_report(series({1000, 1000, 1000}), "flat");
  EXPECT_EQ(flat.crr, 0.0);
  EXPECT_FALSE(flat.sharpe.has_value());
  EXPECT_FALSE(flat.calmar.has_value());
  const MetricsReport up = full_report(series({1000, 1010, 1030}), "up");
  EXPECT_TRUE(up.sharpe.has_value());
  EXPECT_FALSE(up.calmar.has_value());
}

TEST(ReportTest, JsonRoundTripAndTable) {
  const MetricsReport r = full_report(series({1000, 1100, 990, 1200}), "OLMAR");
  const MetricsReport back = report_from_json(nlohmann::json::parse(to_json(r).dump()));
  EXPECT_EQ(back.algorithm, "OLMAR");
  EXPECT_EQ(back.crr, r.crr);
  EXPECT_EQ(back.sharpe, r.sharpe);
  EXPECT_EQ(back.calmar, r.calmar);
  EXPECT_EQ(back.apv, 1200.0);
  EXPECT_THROW(report_from_json(nlohmann::json{{"algorithm", "x"}}), ValidationError);

  std::ostringstream out;
  const std::vector<MetricsReport> rows{r};
  write_table_csv(out, rows);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "Algorithm,CumRet,AnnRet,AnnVol,Sharpe,MDD,Calmar,APV");
  EXPECT_EQ(table_row(r)[5].front(), '-');
}

TEST(SeriesTest, Validation) {
  EXPECT_THROW(series({1.0}).validate(), InsufficientData);
  EXPECT_THROW(series({1.0, 0.0}).validate(), ValidationError);
  EXPECT_THROW(series({1.0, NAN}).validate(), ValidationError);
  const auto d = marketdata::parse_date("2020-01-02");
  EXPECT_THROW((WealthSeries{{d, d}, {1.0, 2.0}}).validate(), NonMonotonicDates);
  EXPECT_THROW((WealthSeries{{d}, {1.0, 2.0}}).validate(), LengthMismatch);
}

}  // namespace
}  // namespace pikan::metrics
