#pragma once

// Independent reference computations and fixtures used only by tests. None
// of these share code paths with the solver's LP / branch-and-bound machinery.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "windoffer/scenario.hpp"

namespace oracle {

// max over alpha of alpha - 1/((1-beta) n) * sum max(0, alpha - x) on a grid
// of spacing `step` spanning [min, max] of the profits, plus the profits
// themselves.
double epigraph_cvar_scan(const std::vector<double>& profits, double beta, double step);

// Maximum expected day-ahead objective profit over curves with at most
// `segments` segments, by dynamic programming over price groups and the
// candidate cleared levels {0, cap, each p_max}.
double max_expected_profit(const windoffer::ScenarioSet& scenarios, std::size_t segments);

// Random instance with integer-valued prices in [0, 60] and wind in [0, 150].
windoffer::ScenarioSet random_instance(std::uint64_t seed, std::size_t n);

// Synthetic backtest inputs as CSV text: hourly prices from history_start
// for history_days + sim_days days, `winds` forecast scenarios per simulated
// hour and one actual wind value per simulated hour. Simulation starts on
// the day after the history. Prices are nonnegative.
struct BacktestCsv {
  std::string history;
  std::string wind_scenarios;
  std::string actual_wind;
  std::string sim_start;
  std::string sim_end;
};
BacktestCsv synthetic_backtest(std::uint64_t seed, int history_days, int sim_days, int winds);

// Minimal LP-file reader for the exporter's output, and an evaluator.
struct LinearTerm {
  double coef = 0.0;
  std::string var;
};

struct LpConstraint {
  std::string name;
  std::vector<LinearTerm> terms;
  std::string op;
  double rhs = 0.0;
};

struct LpModel {
  bool maximize = true;
  std::vector<LinearTerm> objective;
  std::vector<LinearTerm> quadratic;  // coefficient applies to var^2, already divided by 2
  std::vector<LpConstraint> constraints;
  std::map<std::string, std::pair<double, double>> bounds;  // explicit bounds only
  std::vector<std::string> binaries;
};

LpModel parse_lp(std::istream& in);

struct Evaluation {
  double objective = 0.0;
  double max_violation = 0.0;  // over constraints, bounds and integrality
  std::string worst;           // name of the most violated item
};

// Variables not in `values` are taken as 0.
Evaluation evaluate(const LpModel& model, const std::map<std::string, double>& values);

}  // namespace oracle
