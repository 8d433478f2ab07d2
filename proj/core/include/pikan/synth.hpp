#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pikan/marketdata.hpp"

namespace pikan::synth {

// Daily log returns r_t = drift + momentum * (r_{t-1} - drift) + sigma * eps_t
// per asset, on business days (Mon-Fri). momentum = 0 gives plain geometric
// Brownian motion. Annual drift/volatility are scaled by 252.
struct SynthConfig {
  std::size_t assets = 4;
  std::size_t days = 750;
  marketdata::Date start = marketdata::parse_date("2015-01-02");
  double annual_drift = 0.06;
  double annual_volatility = 0.2;
  double volatility_spread = 0.5;  // per-asset sigma in sigma * [1 - s/2, 1 + s/2]
  double momentum = 0.0;           // AR(1) coefficient, |momentum| < 1
  double start_price = 100.0;
  std::uint64_t seed = 0;

  void validate() const;
};

std::vector<marketdata::Date> business_days(marketdata::Date start, std::size_t count);

// Asset ids are "SYN00", "SYN01", ...
std::vector<marketdata::OhlcvSeries> generate(const SynthConfig& config);

}  // namespace pikan::synth
