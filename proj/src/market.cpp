#include "windoffer/market.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "windoffer/csv.hpp"
#include "windoffer/errors.hpp"

namespace windoffer {

OfferCurve::OfferCurve(std::vector<Segment> segments, std::optional<std::size_t> max_segments)
    : segments_(std::move(segments)) {
  if (max_segments && segments_.size() > *max_segments) {
    throw ValidationError("offer curve has " + std::to_string(segments_.size()) + " segments, limit is " +
                          std::to_string(*max_segments));
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!std::isfinite(s.price) || !std::isfinite(s.quantity)) {
      throw ValidationError("offer segment " + std::to_string(i) + " is not finite");
    }
    if (s.quantity < 0.0) throw ValidationError("offer segment " + std::to_string(i) + " has negative quantity");
    if (i > 0 && s.price < segments_[i - 1].price) {
      throw ValidationError("offer segment prices must be nondecreasing (segment " + std::to_string(i) + ")");
    }
  }
}

double OfferCurve::total_quantity() const {
  double total = 0.0;
  for (const auto& s : segments_) total += s.quantity;
  return total;
}

ClearingOutcome clear(const OfferCurve& curve, double lambda_da) {
  ClearingOutcome out;
  out.indicator.assign(curve.size(), 0);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto& seg = curve.segments()[i];
    if (seg.price > lambda_da) break;
    out.indicator[i] = 1;
    out.cleared_mw += seg.quantity;
  }
  return out;
}

double shortfall(double cleared_mw, double p_max_wind) { return std::min(0.0, p_max_wind - cleared_mw); }

ClearingOutcome evaluate(const OfferCurve& curve, const Scenario& scenario) {
  auto out = clear(curve, scenario.lambda_da);
  out.shortfall_mw = shortfall(out.cleared_mw, scenario.p_max_wind);
  out.da_objective_profit = scenario.lambda_da * out.cleared_mw + scenario.lambda_rt * out.shortfall_mw;
  return out;
}

double da_objective_profit(const Scenario& scenario, const OfferCurve& curve) {
  return evaluate(curve, scenario).da_objective_profit;
}

double settle_realtime(const OfferCurve& curve, double actual_da, double actual_rt, double actual_wind) {
  const double cleared = clear(curve, actual_da).cleared_mw;
  return actual_da * cleared + actual_rt * (actual_wind - cleared);
}

OfferCurve postprocess(const OfferCurve& curve, double min_width_mw) {
  if (!(min_width_mw >= 0.0)) throw ValidationError("minimum segment width must be >= 0");
  std::vector<Segment> kept;
  for (const auto& s : curve.segments()) {
    if (s.quantity >= min_width_mw) kept.push_back(s);
  }
  return OfferCurve(std::move(kept));
}

void write_offer_curve_csv(const OfferCurve& curve, std::ostream& out) {
  out << "segment,price_dollars_per_mwh,quantity_mw,cumulative_mw\n";
  double cumulative = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto& s = curve.segments()[i];
    cumulative += s.quantity;
    out << i << ',' << csv::format_double(s.price) << ',' << csv::format_double(s.quantity) << ','
        << csv::format_double(cumulative) << '\n';
  }
}

}  // namespace windoffer
