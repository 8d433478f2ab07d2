#include "pikan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "pikan/error.hpp"
#include "pikan/rng.hpp"

namespace pikan::synth {

void SynthConfig::validate() const {
  if (assets == 0) throw ConfigError("synth.assets must be positive");
  if (days < 2) throw ConfigError("synth.days must be at least 2");
  if (!(annual_volatility >= 0.0)) throw ConfigError("synth.annual_volatility must be >= 0");
  if (!(volatility_spread >= 0.0 && volatility_spread < 2.0)) throw ConfigError("synth.volatility_spread must lie in [0, 2)");
  if (!(std::abs(momentum) < 1.0)) throw ConfigError("synth.momentum must lie in (-1, 1)");
  if (!(start_price > 0.0)) throw ConfigError("synth.start_price must be positive");
  if (!std::isfinite(annual_drift)) throw ConfigError("synth.annual_drift must be finite");
}

std::vector<marketdata::Date> business_days(marketdata::Date start, std::size_t count) {
  std::vector<marketdata::Date> out;
  out.reserve(count);
  for (marketdata::Date d = start; out.size() < count; d += std::chrono::days{1}) {
    const std::chrono::weekday wd{d};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.push_back(d);
  }
  return out;
}

std::vector<marketdata::OhlcvSeries> generate(const SynthConfig& c) {
  c.validate();
  const SeedSequence seeds(c.seed);
  const auto dates = business_days(c.start, c.days);
  const double drift = c.annual_drift / 252.0;
  std::vector<marketdata::OhlcvSeries> out;
  for (std::size_t a = 0; a < c.assets; ++a) {
    char id[16];
    std::snprintf(id, sizeof id, "SYN%02zu", a);
    auto rng = seeds.stream(std::string("synth/") + id);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sigma = c.annual_volatility / std::sqrt(252.0) * (1.0 + c.volatility_spread * (unit(rng) - 0.5));

    marketdata::OhlcvSeries s;
    s.asset_id = id;
    s.dates = dates;
    double close = c.start_price;
    double prev_ret = drift;
    for (std::size_t t = 0; t < c.days; ++t) {
      const double ret = t == 0 ? 0.0 : drift + c.momentum * (prev_ret - drift) + sigma * normal(rng);
      if (t > 0) prev_ret = ret;
      const double open = close * std::exp(0.25 * sigma * normal(rng));
      close *= std::exp(ret);
      const double hi = std::max(open, close) * (1.0 + 0.5 * sigma * std::abs(normal(rng)));
      const double lo = std::min(open, close) * (1.0 - std::min(0.5, 0.5 * sigma * std::abs(normal(rng))));
      s.open.push_back(open);
      s.high.push_back(hi);
      s.low.push_back(lo);
      s.close.push_back(close);
      s.volume.push_back(std::round(1e6 * std::exp(0.3 * normal(rng))));
    }
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace pikan::synth
