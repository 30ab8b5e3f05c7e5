#include "windoffer/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <optional>
#include <ostream>
#include <thread>

#include "windoffer/csv.hpp"
#include "windoffer/errors.hpp"

namespace windoffer {

double ideal_profit(double actual_da, double actual_rt, double actual_wind) {
  return std::max(actual_da, actual_rt) * actual_wind;
}

BacktestRecord run_hour(const OfferCurve& curve, Date date, int hour, double actual_da, double actual_rt,
                        double actual_wind) {
  if (actual_wind < 0.0) throw ValidationError("actual wind must be >= 0");
  BacktestRecord rec;
  rec.date = date;
  rec.hour = hour;
  rec.actual_da = actual_da;
  rec.actual_rt = actual_rt;
  rec.actual_wind = actual_wind;
  rec.cleared_mw = clear(curve, actual_da).cleared_mw;
  rec.profit = settle_realtime(curve, actual_da, actual_rt, actual_wind);
  rec.ideal_profit = ideal_profit(actual_da, actual_rt, actual_wind);
  rec.regret = rec.ideal_profit - rec.profit;
  return rec;
}

namespace {

struct HourInputs {
  HourKey key;
  std::optional<ScenarioSet> scenarios;
  PricePair actual_prices;
  double actual_wind = 0.0;
  std::string missing;
};

std::vector<HourKey> simulated_hours(const BacktestInputs& in) {
  if (in.end < in.start) throw ValidationError("backtest date range is empty");
  std::vector<HourKey> hours;
  for (Date d = in.start; d <= in.end; d += std::chrono::days{1}) {
    for (int h = 0; h < 24; ++h) hours.push_back(HourKey{d, h});
  }
  return hours;
}

HourInputs gather(const BacktestInputs& in, const HourKey& key) {
  HourInputs out;
  out.key = key;
  std::vector<std::string> problems;
  const auto prices = in.history.find(key.date, key.hour);
  if (prices) {
    out.actual_prices = *prices;
  } else {
    problems.push_back("no actual prices");
  }
  const auto wind = in.actual_wind.find(key);
  if (wind != in.actual_wind.end()) {
    out.actual_wind = wind->second;
  } else {
    problems.push_back("no actual wind");
  }
  const auto forecast = in.wind_scenarios.find(key);
  if (forecast == in.wind_scenarios.end() || forecast->second.empty()) {
    problems.push_back("no wind scenarios");
  } else {
    try {
      auto set = build_historical_scenarios(in.history, forecast->second, key.date, key.hour, in.lookback_days);
      out.scenarios = in.clamp_negative_prices ? set.with_clamped_prices() : std::move(set);
    } catch (const MissingDataError& e) {
      problems.push_back(e.what());
    }
  }
  for (std::size_t i = 0; i < problems.size(); ++i) out.missing += (i ? "; " : "") + problems[i];
  return out;
}

}  // namespace

std::vector<SkippedHour> find_data_gaps(const BacktestInputs& inputs) {
  std::vector<SkippedHour> gaps;
  for (const auto& key : simulated_hours(inputs)) {
    auto h = gather(inputs, key);
    if (!h.missing.empty()) gaps.push_back(SkippedHour{key.date, key.hour, h.missing});
  }
  return gaps;
}

BacktestResult run_period(const BacktestInputs& inputs, const StrategyFactory& strategy) {
  const auto hours = simulated_hours(inputs);
  std::vector<std::optional<BacktestRecord>> records(hours.size());
  std::vector<std::string> missing(hours.size());
  std::vector<std::exception_ptr> errors(hours.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < hours.size();) {
      try {
        auto h = gather(inputs, hours[i]);
        if (!h.missing.empty()) {
          missing[i] = h.missing;
          continue;
        }
        const OfferCurve curve = strategy(*h.scenarios);
        records[i] = run_hour(curve, h.key.date, h.key.hour, h.actual_prices.lambda_da, h.actual_prices.lambda_rt,
                              h.actual_wind);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, inputs.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  BacktestResult result;
  for (std::size_t i = 0; i < hours.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    if (records[i]) {
      result.records.push_back(*records[i]);
    } else {
      result.skipped.push_back(SkippedHour{hours[i].date, hours[i].hour, missing[i]});
    }
  }
  return result;
}

BacktestSummary aggregate(std::span<const BacktestRecord> records) {
  if (records.empty()) throw ValidationError("cannot aggregate an empty record list");
  BacktestSummary summary;
  std::map<Date, std::vector<double>> by_day;
  for (const auto& r : records) {
    summary.total_regret += r.regret;
    by_day[r.date].push_back(r.regret);
  }
  double std_sum = 0.0;
  for (const auto& [day, regrets] : by_day) {
    if (regrets.size() < 2) continue;
    double mean = 0.0;
    for (double x : regrets) mean += x;
    mean /= static_cast<double>(regrets.size());
    double ss = 0.0;
    for (double x : regrets) ss += (x - mean) * (x - mean);
    std_sum += std::sqrt(ss / static_cast<double>(regrets.size() - 1));
  }
  summary.days = by_day.size();
  summary.hours = records.size();
  summary.mean_daily_regret_std = std_sum / static_cast<double>(by_day.size());
  return summary;
}

WindScenarioTable read_wind_scenario_table_csv(std::istream& in) {
  const auto table = csv::read(in);
  const auto date = table.column("date", "wind scenario CSV");
  const auto hour = table.column("hour", "wind scenario CSV");
  const auto wind = table.column("p_max_wind", "wind scenario CSV");
  WindScenarioTable out;
  for (const auto& row : table.rows) {
    const int h = csv::parse_int(row.fields[hour], row.line, "hour");
    const double w = csv::parse_double(row.fields[wind], row.line, "p_max_wind");
    if (h < 0 || h > 23) throw ValidationError("line " + std::to_string(row.line) + ": hour out of range");
    if (w < 0.0) throw ValidationError("line " + std::to_string(row.line) + ": negative p_max_wind");
    out[HourKey{parse_date(row.fields[date]), h}].push_back(w);
  }
  return out;
}

WindScenarioTable load_wind_scenario_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open wind scenarios '" + path + "'");
  try {
    return read_wind_scenario_table_csv(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

ActualWindTable read_actual_wind_csv(std::istream& in) {
  const auto table = csv::read(in);
  const auto date = table.column("date", "actual wind CSV");
  const auto hour = table.column("hour", "actual wind CSV");
  const auto wind = table.column("actual_wind", "actual wind CSV");
  ActualWindTable out;
  for (const auto& row : table.rows) {
    const int h = csv::parse_int(row.fields[hour], row.line, "hour");
    const double w = csv::parse_double(row.fields[wind], row.line, "actual_wind");
    if (h < 0 || h > 23) throw ValidationError("line " + std::to_string(row.line) + ": hour out of range");
    if (w < 0.0) throw ValidationError("line " + std::to_string(row.line) + ": negative actual_wind");
    if (!out.emplace(HourKey{parse_date(row.fields[date]), h}, w).second) {
      throw ValidationError("line " + std::to_string(row.line) + ": duplicate hour");
    }
  }
  return out;
}

ActualWindTable load_actual_wind_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open actual wind '" + path + "'");
  try {
    return read_actual_wind_csv(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_records_csv(std::span<const BacktestRecord> records, std::ostream& out) {
  out << "date,hour,actual_da,actual_rt,actual_wind,cleared_mw,profit,ideal_profit,regret\n";
  for (const auto& r : records) {
    out << format_date(r.date) << ',' << r.hour << ',' << csv::format_double(r.actual_da) << ','
        << csv::format_double(r.actual_rt) << ',' << csv::format_double(r.actual_wind) << ','
        << csv::format_double(r.cleared_mw) << ',' << csv::format_double(r.profit) << ','
        << csv::format_double(r.ideal_profit) << ',' << csv::format_double(r.regret) << '\n';
  }
}

}  // namespace windoffer
