#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

#include "windoffer/scenario.hpp"
#include "windoffer/solver.hpp"

namespace windoffer {

struct MiqpExportConfig {
  // Price-scale constant of the indicator constraints; 0 selects
  // 2 * (max |lambda_da| + 1).
  double big_m = 0.0;
  double epsilon = 1e-4;
  // Coefficient of the l2 penalty on offer prices and quantities; 0 omits it.
  double l2_weight = 0.0;
  // Emit the scenario row-sum, price-order and nesting families. They do not
  // change the optimum, only the search space.
  bool include_redundant = true;

  // Resolves big_m and checks it exceeds the largest offer/market price gap
  // the native solver can produce.
  MiqpExportConfig resolved(const ScenarioSet& scenarios) const;
};

// Instantiated counts per constraint family, for verification and the CLI
// completion message.
struct MiqpModelStats {
  std::size_t scenarios = 0;
  std::size_t segments = 0;
  std::size_t binaries = 0;
  std::size_t continuous = 0;
  std::size_t cvar_rows = 0;
  std::size_t shortfall_rows = 0;
  std::size_t linearization_rows = 0;
  std::size_t indicator_upper_rows = 0;
  std::size_t indicator_lower_rows = 0;
  std::size_t scenario_rowsum_rows = 0;
  std::size_t price_order_rows = 0;
  std::size_t nesting_rows = 0;
  std::size_t cap_rows = 0;
};

// Writes the full mixed-integer model in LP file format. Variable names:
// lam_s{i}, p_s{i}, u_w{w}_s{i}, w_w{w}_s{i}, d_w{w}, alpha, s_w{w}, with
// scenarios in canonical order and both indices 0-based. The shortfall
// relaxation d <= min(0, p_max - cleared) is exact for nonnegative
// real-time prices.
MiqpModelStats write_miqp(const ScenarioSet& scenarios, const SolveOptions& opts, const MiqpExportConfig& config,
                          std::ostream& out);

// As write_miqp, to a file. Throws ValidationError if the path is not writable.
MiqpModelStats export_miqp(const ScenarioSet& scenarios, const SolveOptions& opts, const MiqpExportConfig& config,
                           const std::string& path);

}  // namespace windoffer
