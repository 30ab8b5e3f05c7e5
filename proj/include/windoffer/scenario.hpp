#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace windoffer {

// One joint sample of day-ahead price, real-time price ($/MWh) and the
// maximum dispatchable wind power (MW).
struct Scenario {
  double lambda_da = 0.0;
  double lambda_rt = 0.0;
  double p_max_wind = 0.0;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Canonical order: ascending lambda_da, ties by lambda_rt, then p_max_wind.
bool canonical_less(const Scenario& a, const Scenario& b);

// Immutable, validated, canonically sorted set of equiprobable scenarios.
class ScenarioSet {
 public:
  explicit ScenarioSet(std::vector<Scenario> scenarios);

  std::span<const Scenario> scenarios() const { return scenarios_; }
  std::size_t size() const { return scenarios_.size(); }
  const Scenario& operator[](std::size_t i) const { return scenarios_[i]; }
  double weight() const { return 1.0 / static_cast<double>(scenarios_.size()); }

  double max_wind() const;
  double max_lambda_da() const;
  double max_lambda_rt() const;
  bool has_negative_prices() const;

  // Copy with negative prices replaced by zero.
  ScenarioSet with_clamped_prices() const;

  auto begin() const { return scenarios_.begin(); }
  auto end() const { return scenarios_.end(); }

 private:
  std::vector<Scenario> scenarios_;
};

// Mean and covariance of (lambda_da, lambda_rt, p_max_wind).
struct GaussianSpec {
  std::array<double, 3> mean{};
  std::array<std::array<double, 3>, 3> covariance{};

  // Throws ValidationError unless the covariance is finite, symmetric and
  // positive semidefinite (eigenvalues >= -1e-9).
  void validate() const;

  // Synthetic case: means 30/30/100, unit variances of 100, and the given
  // real-time price / wind covariance (all other covariances zero).
  static GaussianSpec synthetic_case(double cov_rt_wind);
};

// Draws n scenarios from the multivariate normal. Negative wind draws are
// clamped to 0 MW. Same (spec, n, seed) always yields the same set.
ScenarioSet sample_gaussian(const GaussianSpec& spec, std::size_t n, std::uint64_t seed);

// Raw draws before clamping and sorting, in draw order. Exposed for
// statistical tests.
std::vector<Scenario> sample_gaussian_raw(const GaussianSpec& spec, std::size_t n, std::uint64_t seed);

ScenarioSet load_scenarios_csv(const std::string& path);
ScenarioSet read_scenarios_csv(std::istream& in);
void write_scenarios_csv(const ScenarioSet& set, std::ostream& out);

// Calendar handling for the historical price series.
using Date = std::chrono::sys_days;

Date parse_date(const std::string& iso);  // YYYY-MM-DD
std::string format_date(Date d);

struct HourKey {
  Date date;
  int hour = 0;

  friend auto operator<=>(const HourKey&, const HourKey&) = default;
};

struct PricePair {
  double lambda_da = 0.0;
  double lambda_rt = 0.0;
};

// Hourly day-ahead and real-time price history keyed by (date, hour).
class PriceHistory {
 public:
  void add(Date date, int hour, PricePair prices);
  std::optional<PricePair> find(Date date, int hour) const;
  std::size_t size() const { return prices_.size(); }

 private:
  std::map<HourKey, PricePair> prices_;
};

// Header: date,hour,lambda_da,lambda_rt
PriceHistory load_price_history_csv(const std::string& path);
PriceHistory read_price_history_csv(std::istream& in);

// Header: p_max_wind
std::vector<double> load_wind_scenarios_csv(const std::string& path);
std::vector<double> read_wind_scenarios_csv(std::istream& in);

// Pairs the (DA, RT) prices at target_hour on each of the lookback_days
// calendar days before target_date (oldest first) with the wind values by
// cyclic assignment: scenario k takes price day k mod days and wind value
// k mod |wind|, for max(days, |wind|) scenarios. Throws MissingDataError
// listing every absent date.
ScenarioSet build_historical_scenarios(const PriceHistory& history, std::span<const double> wind_scenarios,
                                       Date target_date, int target_hour, int lookback_days = 50);

// The unsorted pairing, in k order. build_historical_scenarios sorts it.
std::vector<Scenario> pair_historical_scenarios(const PriceHistory& history, std::span<const double> wind_scenarios,
                                                Date target_date, int target_hour, int lookback_days);

}  // namespace windoffer
