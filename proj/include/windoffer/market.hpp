#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "windoffer/scenario.hpp"

namespace windoffer {

// One block of the offer step function: `quantity` MW offered at `price`.
struct Segment {
  double price = 0.0;
  double quantity = 0.0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

// Day-ahead offer curve. Prices are nondecreasing, quantities nonnegative.
class OfferCurve {
 public:
  OfferCurve() = default;
  // Throws ValidationError on decreasing prices, negative or non-finite
  // values, or more than max_segments segments.
  explicit OfferCurve(std::vector<Segment> segments, std::optional<std::size_t> max_segments = std::nullopt);

  std::span<const Segment> segments() const { return segments_; }
  std::size_t size() const { return segments_.size(); }
  bool empty() const { return segments_.empty(); }
  double total_quantity() const;

  friend bool operator==(const OfferCurve&, const OfferCurve&) = default;

 private:
  std::vector<Segment> segments_;
};

struct ClearingOutcome {
  std::vector<std::uint8_t> indicator;  // per segment, a prefix of ones
  double cleared_mw = 0.0;
  double shortfall_mw = 0.0;  // <= 0 when power is bought back
  double da_objective_profit = 0.0;
};

// Segments priced at or below lambda_da clear in full (equality inclusive).
// Only indicator and cleared_mw are populated.
ClearingOutcome clear(const OfferCurve& curve, double lambda_da);

// min(0, p_max_wind - cleared_mw)
double shortfall(double cleared_mw, double p_max_wind);

// Day-ahead revenue less real-time buyback of any shortfall. Excess wind is
// not credited.
double da_objective_profit(const Scenario& scenario, const OfferCurve& curve);

// clear() plus shortfall and objective profit for one scenario.
ClearingOutcome evaluate(const OfferCurve& curve, const Scenario& scenario);

// Realized two-settlement profit: cleared volume at the day-ahead price, the
// deviation (actual_wind - cleared) settled at the real-time price.
double settle_realtime(const OfferCurve& curve, double actual_da, double actual_rt, double actual_wind);

// Drops segments narrower than min_width_mw, preserving order.
OfferCurve postprocess(const OfferCurve& curve, double min_width_mw);

// Header: segment,price_dollars_per_mwh,quantity_mw,cumulative_mw
void write_offer_curve_csv(const OfferCurve& curve, std::ostream& out);

}  // namespace windoffer
