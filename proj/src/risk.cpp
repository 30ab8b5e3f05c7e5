#include "windoffer/risk.hpp"

#include <algorithm>
#include <cmath>

#include "windoffer/errors.hpp"

namespace windoffer {
namespace {

void require_nonempty(std::span<const double> profits) {
  if (profits.empty()) throw ValidationError("risk measure of an empty profit list");
}

std::vector<double> sorted_copy(std::span<const double> profits) {
  std::vector<double> v(profits.begin(), profits.end());
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

RiskSpec::RiskSpec(double beta) : beta_(beta) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw ValidationError("beta must satisfy 0 <= beta < 1, got " + std::to_string(beta));
  }
}

double RiskSpec::tail_count(std::size_t n) const {
  const double t = (1.0 - beta_) * static_cast<double>(n);
  const double r = std::round(t);
  return std::abs(t - r) <= 1e-9 * std::max(1.0, t) && r >= 1.0 ? r : t;
}

double cvar(std::span<const double> profits, RiskSpec spec) {
  require_nonempty(profits);
  const auto v = sorted_copy(profits);
  const double tail = spec.tail_count(v.size());
  double remaining = tail;
  double sum = 0.0;
  for (double x : v) {
    const double w = std::min(1.0, remaining);
    sum += w * x;
    remaining -= w;
    if (remaining <= 0.0) break;
  }
  return sum / tail;
}

double value_at_risk(std::span<const double> profits, RiskSpec spec) {
  require_nonempty(profits);
  const auto v = sorted_copy(profits);
  const double tail = spec.tail_count(v.size());
  auto k = static_cast<std::size_t>(std::ceil(tail - 1e-9));
  k = std::clamp<std::size_t>(k, 1, v.size());
  return v[k - 1];
}

std::vector<std::size_t> active_samples(std::span<const double> profits, RiskSpec spec) {
  const double threshold = value_at_risk(profits, spec);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < profits.size(); ++i) {
    if (profits[i] <= threshold) out.push_back(i);
  }
  return out;
}

}  // namespace windoffer
