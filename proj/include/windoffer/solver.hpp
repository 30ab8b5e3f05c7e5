#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "windoffer/market.hpp"
#include "windoffer/risk.hpp"
#include "windoffer/scenario.hpp"

namespace windoffer {

// b[i] is the position (in canonical scenario order) of the lowest-priced
// scenario in which segment i clears; b[i] == |Omega| means it never clears.
struct BreakpointVector {
  std::vector<std::size_t> positions;

  bool is_nondecreasing() const;
  friend auto operator<=>(const BreakpointVector&, const BreakpointVector&) = default;
};

struct SolveOptions {
  std::size_t n_segments = 6;
  double beta = 0.0;
  // Applied to the optimal curve before the report is assembled.
  double min_segment_width_mw = 0.0;
  double time_budget_s = 60.0;
  unsigned threads = 1;
  // Branch-and-bound pruning; off means full enumeration.
  bool prune = true;

  void validate() const;
};

struct SolveReport {
  OfferCurve curve;
  BreakpointVector breakpoints;
  double beta = 0.0;
  // CVaR of the per-scenario day-ahead objective profits of `curve`.
  double objective = 0.0;
  std::vector<ClearingOutcome> per_scenario;
  std::vector<std::size_t> tail_indices;
  std::size_t nodes_explored = 0;
  bool proof = false;
};

// Total offered quantity cap: the largest wind scenario.
double quantity_cap(const ScenarioSet& scenarios);

// Curve with segment i priced at the day-ahead price of scenario b[i]
// (never-clearing segments at max day-ahead price + 1) and quantity q[i].
OfferCurve curve_from_breakpoints(const ScenarioSet& scenarios, const BreakpointVector& b,
                                  std::span<const double> quantities);

// Evaluates `curve` on every scenario and fills objective, per-scenario
// outcomes and tail indices. Leaves search statistics untouched.
void fill_report(const ScenarioSet& scenarios, const OfferCurve& curve, double beta, SolveReport& report);

// Globally optimal CVaR offer curve. Requires nonnegative prices (throws
// SolverRefusal otherwise). Results do not depend on opts.threads.
SolveReport solve_exact(const ScenarioSet& scenarios, const SolveOptions& opts);

// Exhaustive enumeration over all nondecreasing breakpoint vectors and all
// quantity vectors on the grid {0, step, 2 step, ...} summing to at most the
// cap. Test oracle for small instances; refuses oversized grids.
SolveReport solve_bruteforce(const ScenarioSet& scenarios, const SolveOptions& opts, double quantity_step);

// Single zero-priced segment sized at the `percentile` order statistic of
// the wind scenarios: sorted index min(floor(percentile * n), n - 1).
OfferCurve percentile_strategy(const ScenarioSet& scenarios, double percentile);

// JSON document: objective, beta, segments, tail_indices, nodes_explored, proof.
void write_report_json(const SolveReport& report, std::ostream& out);

// CSV with every scenario and whether it lies in the CVaR tail:
// index,lambda_da,lambda_rt,p_max_wind,profit,in_tail
void write_plot_data_csv(const ScenarioSet& scenarios, const SolveReport& report, std::ostream& out);

}  // namespace windoffer
