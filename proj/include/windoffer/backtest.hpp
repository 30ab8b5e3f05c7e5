#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "windoffer/market.hpp"
#include "windoffer/scenario.hpp"

namespace windoffer {

struct BacktestRecord {
  Date date;
  int hour = 0;
  double actual_da = 0.0;
  double actual_rt = 0.0;
  double actual_wind = 0.0;
  double cleared_mw = 0.0;
  double profit = 0.0;
  double ideal_profit = 0.0;
  double regret = 0.0;

  friend bool operator==(const BacktestRecord&, const BacktestRecord&) = default;
};

struct SkippedHour {
  Date date;
  int hour = 0;
  std::string reason;
};

// Hindsight profit of selling all realized wind in the better market.
double ideal_profit(double actual_da, double actual_rt, double actual_wind);

// Clears `curve` at the actual day-ahead price and settles the deviation at
// the real-time price.
BacktestRecord run_hour(const OfferCurve& curve, Date date, int hour, double actual_da, double actual_rt,
                        double actual_wind);

using WindScenarioTable = std::map<HourKey, std::vector<double>>;
using ActualWindTable = std::map<HourKey, double>;

struct BacktestInputs {
  PriceHistory history;              // also the source of actual prices
  WindScenarioTable wind_scenarios;  // forecast scenarios per simulated hour
  ActualWindTable actual_wind;
  Date start;
  Date end;  // inclusive
  int lookback_days = 50;
  bool clamp_negative_prices = false;
  unsigned threads = 1;
};

// Builds the day-ahead offer from the hour's scenario set.
using StrategyFactory = std::function<OfferCurve(const ScenarioSet&)>;

struct BacktestResult {
  std::vector<BacktestRecord> records;
  std::vector<SkippedHour> skipped;
};

// Replays every hour of [start, end]. Scenario sets use only prices from
// days strictly before the operating day. Hours lacking data are skipped and
// listed in `skipped`.
BacktestResult run_period(const BacktestInputs& inputs, const StrategyFactory& strategy);

// Hours of [start, end] whose scenario set or actuals cannot be assembled.
std::vector<SkippedHour> find_data_gaps(const BacktestInputs& inputs);

struct BacktestSummary {
  double total_regret = 0.0;
  // Mean over days of the sample standard deviation of hourly regret; a day
  // with a single record contributes 0.
  double mean_daily_regret_std = 0.0;
  std::size_t days = 0;
  std::size_t hours = 0;
};

BacktestSummary aggregate(std::span<const BacktestRecord> records);

// Header: date,hour,p_max_wind (several rows per hour)
WindScenarioTable load_wind_scenario_table_csv(const std::string& path);
WindScenarioTable read_wind_scenario_table_csv(std::istream& in);
// Header: date,hour,actual_wind
ActualWindTable load_actual_wind_csv(const std::string& path);
ActualWindTable read_actual_wind_csv(std::istream& in);

// Header: date,hour,actual_da,actual_rt,actual_wind,cleared_mw,profit,ideal_profit,regret
void write_records_csv(std::span<const BacktestRecord> records, std::ostream& out);

}  // namespace windoffer
