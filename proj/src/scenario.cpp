#include "windoffer/scenario.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <fstream>

#include "windoffer/csv.hpp"
#include "windoffer/errors.hpp"

namespace windoffer {

bool canonical_less(const Scenario& a, const Scenario& b) {
  if (a.lambda_da != b.lambda_da) return a.lambda_da < b.lambda_da;
  if (a.lambda_rt != b.lambda_rt) return a.lambda_rt < b.lambda_rt;
  return a.p_max_wind < b.p_max_wind;
}

ScenarioSet::ScenarioSet(std::vector<Scenario> scenarios) : scenarios_(std::move(scenarios)) {
  if (scenarios_.empty()) throw ValidationError("scenario set is empty");
  for (std::size_t i = 0; i < scenarios_.size(); ++i) {
    const auto& s = scenarios_[i];
    if (!std::isfinite(s.lambda_da) || !std::isfinite(s.lambda_rt) || !std::isfinite(s.p_max_wind)) {
      throw ValidationError("scenario " + std::to_string(i) + " has a non-finite field");
    }
    if (s.p_max_wind < 0.0) {
      throw ValidationError("scenario " + std::to_string(i) + " has negative p_max_wind");
    }
  }
  std::stable_sort(scenarios_.begin(), scenarios_.end(), canonical_less);
}

double ScenarioSet::max_wind() const {
  double m = 0.0;
  for (const auto& s : scenarios_) m = std::max(m, s.p_max_wind);
  return m;
}

double ScenarioSet::max_lambda_da() const { return scenarios_.back().lambda_da; }

double ScenarioSet::max_lambda_rt() const {
  double m = scenarios_.front().lambda_rt;
  for (const auto& s : scenarios_) m = std::max(m, s.lambda_rt);
  return m;
}

bool ScenarioSet::has_negative_prices() const {
  return std::any_of(scenarios_.begin(), scenarios_.end(),
                     [](const Scenario& s) { return s.lambda_da < 0.0 || s.lambda_rt < 0.0; });
}

ScenarioSet ScenarioSet::with_clamped_prices() const {
  std::vector<Scenario> out = scenarios_;
  for (auto& s : out) {
    s.lambda_da = std::max(0.0, s.lambda_da);
    s.lambda_rt = std::max(0.0, s.lambda_rt);
  }
  return ScenarioSet(std::move(out));
}

void GaussianSpec::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(mean[i])) throw ValidationError("gaussian mean has a non-finite entry");
    for (int j = 0; j < 3; ++j) {
      if (!std::isfinite(covariance[i][j])) throw ValidationError("covariance matrix has a non-finite entry");
      if (std::abs(covariance[i][j] - covariance[j][i]) > 1e-9 * (1.0 + std::abs(covariance[i][j]))) {
        throw ValidationError("covariance matrix is not symmetric");
      }
    }
  }
  Eigen::Matrix3d cov;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cov(i, j) = covariance[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  if (eig.eigenvalues().minCoeff() < -1e-9) {
    std::ostringstream msg;
    msg << "covariance matrix is not positive semidefinite (min eigenvalue " << eig.eigenvalues().minCoeff()
        << "): [";
    for (int i = 0; i < 3; ++i) {
      msg << (i ? "; " : "") << covariance[i][0] << ", " << covariance[i][1] << ", " << covariance[i][2];
    }
    msg << "]";
    throw ValidationError(msg.str());
  }
}

GaussianSpec GaussianSpec::synthetic_case(double cov_rt_wind) {
  GaussianSpec spec;
  spec.mean = {30.0, 30.0, 100.0};
  spec.covariance = {{{100.0, 0.0, 0.0}, {0.0, 100.0, cov_rt_wind}, {0.0, cov_rt_wind, 100.0}}};
  return spec;
}

std::vector<Scenario> sample_gaussian_raw(const GaussianSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ValidationError("sample count must be at least 1");
  spec.validate();

  // Symmetric square-root factor F = V sqrt(Lambda) V^T; unlike Cholesky it
  // exists for singular (e.g. all-zero) covariances.
  Eigen::Matrix3d cov;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cov(i, j) = spec.covariance[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Eigen::Vector3d root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::Matrix3d factor = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Scenario> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Eigen::Vector3d z;
    for (int i = 0; i < 3; ++i) z(i) = normal(rng);
    Eigen::Vector3d x = factor * z;
    out.push_back(Scenario{spec.mean[0] + x(0), spec.mean[1] + x(1), spec.mean[2] + x(2)});
  }
  return out;
}

ScenarioSet sample_gaussian(const GaussianSpec& spec, std::size_t n, std::uint64_t seed) {
  auto draws = sample_gaussian_raw(spec, n, seed);
  for (auto& s : draws) s.p_max_wind = std::max(0.0, s.p_max_wind);
  return ScenarioSet(std::move(draws));
}

ScenarioSet read_scenarios_csv(std::istream& in) {
  const auto table = csv::read(in);
  const auto da = table.column("lambda_da", "scenario CSV");
  const auto rt = table.column("lambda_rt", "scenario CSV");
  const auto wind = table.column("p_max_wind", "scenario CSV");
  std::vector<Scenario> scenarios;
  scenarios.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    Scenario s{csv::parse_double(row.fields[da], row.line, "lambda_da"),
               csv::parse_double(row.fields[rt], row.line, "lambda_rt"),
               csv::parse_double(row.fields[wind], row.line, "p_max_wind")};
    if (s.p_max_wind < 0.0) {
      throw ValidationError("line " + std::to_string(row.line) + ": negative p_max_wind " + row.fields[wind]);
    }
    scenarios.push_back(s);
  }
  if (scenarios.empty()) throw ValidationError("scenario CSV has no data rows");
  return ScenarioSet(std::move(scenarios));
}

ScenarioSet load_scenarios_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
  try {
    return read_scenarios_csv(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_scenarios_csv(const ScenarioSet& set, std::ostream& out) {
  out << "lambda_da,lambda_rt,p_max_wind\n";
  for (const auto& s : set) {
    out << csv::format_double(s.lambda_da) << ',' << csv::format_double(s.lambda_rt) << ','
        << csv::format_double(s.p_max_wind) << '\n';
  }
}

Date parse_date(const std::string& iso) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (iso.size() != 10 || std::sscanf(iso.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
    throw ValidationError("invalid ISO-8601 date '" + iso + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw ValidationError("invalid calendar date '" + iso + "'");
  return Date(ymd);
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

void PriceHistory::add(Date date, int hour, PricePair prices) {
  if (hour < 0 || hour > 23) throw ValidationError("hour out of range 0-23: " + std::to_string(hour));
  if (!prices_.emplace(HourKey{date, hour}, prices).second) {
    throw ValidationError("duplicate price entry for " + format_date(date) + " hour " + std::to_string(hour));
  }
}

std::optional<PricePair> PriceHistory::find(Date date, int hour) const {
  const auto it = prices_.find(HourKey{date, hour});
  if (it == prices_.end()) return std::nullopt;
  return it->second;
}

PriceHistory read_price_history_csv(std::istream& in) {
  const auto table = csv::read(in);
  const auto date = table.column("date", "price history CSV");
  const auto hour = table.column("hour", "price history CSV");
  const auto da = table.column("lambda_da", "price history CSV");
  const auto rt = table.column("lambda_rt", "price history CSV");
  PriceHistory history;
  for (const auto& row : table.rows) {
    try {
      history.add(parse_date(row.fields[date]), csv::parse_int(row.fields[hour], row.line, "hour"),
                  PricePair{csv::parse_double(row.fields[da], row.line, "lambda_da"),
                            csv::parse_double(row.fields[rt], row.line, "lambda_rt")});
    } catch (const ValidationError& e) {
      const std::string what = e.what();
      if (what.rfind("line ", 0) == 0) throw;
      throw ValidationError("line " + std::to_string(row.line) + ": " + what);
    }
  }
  return history;
}

PriceHistory load_price_history_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open price history '" + path + "'");
  try {
    return read_price_history_csv(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::vector<double> read_wind_scenarios_csv(std::istream& in) {
  const auto table = csv::read(in);
  const auto wind = table.column("p_max_wind", "wind scenario CSV");
  std::vector<double> out;
  for (const auto& row : table.rows) {
    const double w = csv::parse_double(row.fields[wind], row.line, "p_max_wind");
    if (w < 0.0) throw ValidationError("line " + std::to_string(row.line) + ": negative p_max_wind");
    out.push_back(w);
  }
  if (out.empty()) throw ValidationError("wind scenario CSV has no data rows");
  return out;
}

std::vector<double> load_wind_scenarios_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open wind scenarios '" + path + "'");
  try {
    return read_wind_scenarios_csv(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::vector<Scenario> pair_historical_scenarios(const PriceHistory& history, std::span<const double> wind_scenarios,
                                                Date target_date, int target_hour, int lookback_days) {
  if (lookback_days < 1) throw ValidationError("lookback_days must be at least 1");
  if (target_hour < 0 || target_hour > 23) throw ValidationError("target hour out of range 0-23");
  if (wind_scenarios.empty()) throw ValidationError("wind scenario list is empty");

  std::vector<PricePair> days;
  std::string missing;
  for (int back = lookback_days; back >= 1; --back) {
    const Date day = target_date - std::chrono::days{back};
    if (auto p = history.find(day, target_hour)) {
      days.push_back(*p);
    } else {
      missing += (missing.empty() ? "" : ", ") + format_date(day);
    }
  }
  if (!missing.empty()) {
    throw MissingDataError("price history missing hour " + std::to_string(target_hour) + " on: " + missing);
  }

  const std::size_t count = std::max(days.size(), wind_scenarios.size());
  std::vector<Scenario> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto& p = days[k % days.size()];
    out.push_back(Scenario{p.lambda_da, p.lambda_rt, wind_scenarios[k % wind_scenarios.size()]});
  }
  return out;
}

ScenarioSet build_historical_scenarios(const PriceHistory& history, std::span<const double> wind_scenarios,
                                       Date target_date, int target_hour, int lookback_days) {
  return ScenarioSet(pair_historical_scenarios(history, wind_scenarios, target_date, target_hour, lookback_days));
}

}  // namespace windoffer
