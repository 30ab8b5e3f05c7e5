#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace windoffer {

// CVaR risk-aversion factor. beta = 0 is the plain expectation; beta -> 1
// approaches the worst case.
class RiskSpec {
 public:
  explicit RiskSpec(double beta);

  double beta() const { return beta_; }
  // (1 - beta) * n, snapped to the nearest integer when within 1e-9 of it.
  double tail_count(std::size_t n) const;

 private:
  double beta_;
};

// Mean of the worst (1 - beta) probability mass of equiprobable profits.
// The marginal scenario is weighted fractionally when (1 - beta) * n is not
// an integer.
double cvar(std::span<const double> profits, RiskSpec spec);

// Smallest profit v with P(profit <= v) >= 1 - beta.
double value_at_risk(std::span<const double> profits, RiskSpec spec);

// Indices (ascending) of scenarios whose profit is <= value_at_risk. Ties at
// the threshold are all included.
std::vector<std::size_t> active_samples(std::span<const double> profits, RiskSpec spec);

}  // namespace windoffer
