#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "oracles.hpp"
#include "windoffer/errors.hpp"
#include "windoffer/miqp_export.hpp"

using namespace windoffer;

namespace {

struct Exported {
  MiqpModelStats stats;
  oracle::LpModel model;
  std::string text;
};

Exported export_model(const ScenarioSet& set, std::size_t segments, double beta, MiqpExportConfig cfg = {}) {
  SolveOptions opts;
  opts.n_segments = segments;
  opts.beta = beta;
  std::ostringstream out;
  Exported e;
  e.stats = write_miqp(set, opts, cfg, out);
  e.text = out.str();
  std::istringstream in(e.text);
  e.model = oracle::parse_lp(in);
  return e;
}

std::size_t count_prefix(const oracle::LpModel& m, const std::string& prefix) {
  std::size_t k = 0;
  for (const auto& c : m.constraints) k += c.name.rfind(prefix, 0) == 0;
  return k;
}

// Point in the exported variable space that encodes a native solution.
std::map<std::string, double> encode(const ScenarioSet& set, const SolveReport& r, std::size_t segments) {
  std::map<std::string, double> v;
  const auto segs = r.curve.segments();
  std::vector<Segment> padded(segs.begin(), segs.end());
  while (padded.size() < segments) padded.push_back({set.max_lambda_da() + 1.0, 0.0});
  std::vector<double> profits;
  for (std::size_t i = 0; i < segments; ++i) {
    v["lam_s" + std::to_string(i)] = padded[i].price;
    v["p_s" + std::to_string(i)] = padded[i].quantity;
  }
  for (std::size_t w = 0; w < set.size(); ++w) {
    double cleared = 0;
    for (std::size_t i = 0; i < segments; ++i) {
      const bool u = padded[i].price <= set[w].lambda_da;
      v["u_w" + std::to_string(w) + "_s" + std::to_string(i)] = u;
      v["w_w" + std::to_string(w) + "_s" + std::to_string(i)] = u ? padded[i].quantity : 0.0;
      cleared += u ? padded[i].quantity : 0.0;
    }
    const double d = std::min(0.0, set[w].p_max_wind - cleared);
    v["d_w" + std::to_string(w)] = d;
    profits.push_back(set[w].lambda_da * cleared + set[w].lambda_rt * d);
  }
  const double alpha = value_at_risk(profits, RiskSpec(r.beta));
  v["alpha"] = alpha;
  for (std::size_t w = 0; w < set.size(); ++w) v["s_w" + std::to_string(w)] = std::max(0.0, alpha - profits[w]);
  return v;
}

// Best objective of the exported model over all binary assignments and all
// offer quantities on a grid, evaluating every candidate point against the
// parsed file. Offer prices take the lowest value the indicator rows allow.
double desk_optimum(const ScenarioSet& set, const Exported& e, std::size_t segments, double step) {
  const std::size_t n = set.size();
  const double m = 2.0 * (set.max_lambda_da() + 1.0);
  const double eps = 1e-4;
  const double cap = set.max_wind();
  const auto levels = static_cast<std::size_t>(std::floor(cap / step + 1e-9));
  double best = -std::numeric_limits<double>::infinity();

  std::vector<std::size_t> q(segments, 0);
  const std::size_t bits = n * segments;
  for (std::size_t mask = 0; mask < (std::size_t{1} << bits); ++mask) {
    auto u = [&](std::size_t w, std::size_t i) { return (mask >> (w * segments + i)) & 1; };
    std::map<std::string, double> v;
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < segments; ++i) {
      double lam = -std::numeric_limits<double>::infinity();
      for (std::size_t w = 0; w < n; ++w) lam = std::max(lam, set[w].lambda_da + m * eps - (u(w, i) ? m : 0.0));
      if (e.stats.price_order_rows > 0) lam = std::max(lam, prev);
      prev = lam;
      v["lam_s" + std::to_string(i)] = lam;
    }
    std::fill(q.begin(), q.end(), 0);
    while (true) {
      std::size_t used = 0;
      for (auto x : q) used += x;
      if (used <= levels) {
        std::vector<double> profits;
        for (std::size_t i = 0; i < segments; ++i) v["p_s" + std::to_string(i)] = double(q[i]) * step;
        for (std::size_t w = 0; w < n; ++w) {
          double cleared = 0;
          for (std::size_t i = 0; i < segments; ++i) {
            const double wv = u(w, i) ? double(q[i]) * step : 0.0;
            v["u_w" + std::to_string(w) + "_s" + std::to_string(i)] = double(u(w, i));
            v["w_w" + std::to_string(w) + "_s" + std::to_string(i)] = wv;
            cleared += wv;
          }
          const double d = std::min(0.0, set[w].p_max_wind - cleared);
          v["d_w" + std::to_string(w)] = d;
          profits.push_back(set[w].lambda_da * cleared + set[w].lambda_rt * d);
        }
        for (double alpha : profits) {
          v["alpha"] = alpha;
          for (std::size_t w = 0; w < n; ++w) v["s_w" + std::to_string(w)] = std::max(0.0, alpha - profits[w]);
          const auto ev = oracle::evaluate(e.model, v);
          if (ev.max_violation <= 1e-9) best = std::max(best, ev.objective);
        }
      }
      std::size_t k = 0;
      while (k < segments && ++q[k] > levels) q[k++] = 0;
      if (k == segments) break;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("one scenario and one segment") {
  ScenarioSet set({{30, 30, 100}});
  auto e = export_model(set, 1, 0.0);
  CHECK(e.stats.binaries == 1);
  CHECK(e.model.binaries.size() == 1);
  CHECK(e.stats.indicator_upper_rows == 1);
  CHECK(e.stats.indicator_lower_rows == 1);
  CHECK(count_prefix(e.model, "ind_hi") == 1);
  CHECK(count_prefix(e.model, "ind_lo") == 1);
  CHECK(count_prefix(e.model, "rowsum") == 0);
}

TEST_CASE("family counts for four scenarios and three segments") {
  auto set = oracle::random_instance(4, 4);
  auto e = export_model(set, 3, 0.5);
  CHECK(e.stats.binaries == 12);
  CHECK(e.model.binaries.size() == 12);
  CHECK(e.stats.scenario_rowsum_rows == 3);
  CHECK(e.stats.price_order_rows == 2);
  CHECK(e.stats.nesting_rows == 8);
  CHECK(count_prefix(e.model, "rowsum_w") == 3);
  CHECK(count_prefix(e.model, "order_s") == 2);
  CHECK(count_prefix(e.model, "nest_w") == 8);
  CHECK(count_prefix(e.model, "cvar_w") == 4);
  CHECK(count_prefix(e.model, "short_w") == 4);
  CHECK(count_prefix(e.model, "lin_") == 36);
  CHECK(count_prefix(e.model, "cap") == 1);

  MiqpExportConfig lean;
  lean.include_redundant = false;
  auto l = export_model(set, 3, 0.5, lean);
  CHECK(count_prefix(l.model, "rowsum_w") + count_prefix(l.model, "order_s") + count_prefix(l.model, "nest_w") == 0);
  CHECK(l.model.constraints.size() == e.model.constraints.size() - 13);
}

TEST_CASE("native solutions are feasible in the exported model") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    auto set = oracle::random_instance(seed * 31, 2 + seed % 5);
    const std::size_t segments = 1 + seed % 3;
    const double beta = seed % 2 ? 0.75 : 0.0;
    SolveOptions opts;
    opts.n_segments = segments;
    opts.beta = beta;
    auto r = solve_exact(set, opts);
    auto e = export_model(set, segments, beta);
    auto ev = oracle::evaluate(e.model, encode(set, r, segments));
    INFO("worst: " << ev.worst);
    CHECK(ev.max_violation <= 1e-6);
    CHECK(ev.objective == doctest::Approx(r.objective).epsilon(1e-6));
  }
}

TEST_CASE("redundant families do not change the optimum") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto set = oracle::random_instance(seed * 7, 2 + seed % 3);
    const std::size_t segments = 1 + seed % 2;
    const double beta = seed % 2 ? 0.5 : 0.0;
    const double step = set.max_wind() / 8.0;
    auto full = export_model(set, segments, beta);
    MiqpExportConfig lean_cfg;
    lean_cfg.include_redundant = false;
    auto lean = export_model(set, segments, beta, lean_cfg);
    const double a = desk_optimum(set, full, segments, step);
    const double b = desk_optimum(set, lean, segments, step);
    CHECK(a == doctest::Approx(b).epsilon(1e-9));

    SolveOptions opts;
    opts.n_segments = segments;
    opts.beta = beta;
    CHECK(a == doctest::Approx(solve_bruteforce(set, opts, step).objective).epsilon(1e-9));
  }
}

TEST_CASE("l2 term and configuration checks") {
  ScenarioSet set({{10, 20, 50}, {20, 5, 80}});
  MiqpExportConfig cfg;
  cfg.l2_weight = 0.25;
  auto e = export_model(set, 2, 0.0, cfg);
  CHECK(e.text.find("lam_s0 ^ 2") != std::string::npos);
  CHECK(e.model.quadratic.size() == 4);
  CHECK(e.model.quadratic[0].coef == doctest::Approx(-0.25));

  MiqpExportConfig bad_eps;
  bad_eps.epsilon = 1.5;
  CHECK_THROWS_AS(export_model(set, 1, 0.0, bad_eps), ValidationError);
  MiqpExportConfig small_m;
  small_m.big_m = 5.0;
  CHECK_THROWS_AS(export_model(set, 1, 0.0, small_m), ValidationError);
  CHECK(MiqpExportConfig{}.resolved(set).big_m == 42.0);

  SolveOptions opts;
  CHECK_THROWS_AS(export_miqp(set, opts, {}, "/nonexistent-dir/model.lp"), ValidationError);
}
