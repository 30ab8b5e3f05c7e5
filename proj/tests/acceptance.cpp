// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "windoffer/backtest.hpp"
#include "windoffer/cli.hpp"
#include "windoffer/miqp_export.hpp"
#include "windoffer/risk.hpp"
#include "windoffer/solver.hpp"

namespace fs = std::filesystem;
using namespace windoffer;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const Outcome& o) {
  std::printf("criterion %2d  %-34s %s  %s\n", id, title, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Every solver output produced by the suite, for the structural checks.
struct Solved {
  ScenarioSet scenarios;
  SolveReport report;
  std::size_t segments;
};
std::vector<Solved> fixture_outputs;

SolveReport solve_and_keep(const ScenarioSet& set, const SolveOptions& opts) {
  auto r = solve_exact(set, opts);
  fixture_outputs.push_back({set, r, opts.n_segments});
  return r;
}

SolveOptions options(std::size_t segments, double beta) {
  SolveOptions o;
  o.n_segments = segments;
  o.beta = beta;
  o.time_budget_s = 600;
  return o;
}

ScenarioSet case_fixture(double cov) {
  return sample_gaussian(GaussianSpec::synthetic_case(cov), 250, 20191001).with_clamped_prices();
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  const double betas[] = {0.0, 0.3, 0.5, 0.75, 0.9};
  int count = 0, bad = 0;
  double worst_gap_use = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const std::size_t n = 3 + seed % 6;
    const std::size_t segments = 1 + (seed / 6) % 2;
    auto set = oracle::random_instance(seed, n);
    const auto opts = options(segments, betas[seed % 5]);
    const double step = quantity_cap(set) / 50.0;
    auto exact = solve_and_keep(set, opts);
    auto brute = solve_bruteforce(set, opts, step);
    const double allowance = set.max_lambda_da() * double(segments) * step;
    const double diff = exact.objective - brute.objective;
    if (diff < -1e-9 || diff > allowance + 1e-9) ++bad;
    if (allowance > 0) worst_gap_use = std::max(worst_gap_use, diff / allowance);
    ++count;
  }
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = bad == 0 && count >= 200 && elapsed < 60.0;
  o.detail = fmt("%d instances, %d outside [brute, brute + gap], max gap used %.3f, %.1f s", count, bad,
                 worst_gap_use, elapsed);
  return o;
}

Outcome expectation_equivalence() {
  int bad = 0;
  double worst = 0;
  for (std::uint64_t seed = 1000; seed < 1050; ++seed) {
    auto set = oracle::random_instance(seed, 5 + seed % 26);
    const std::size_t segments = 1 + seed % 4;
    auto r = solve_and_keep(set, options(segments, 0.0));
    const double expected = oracle::max_expected_profit(set, segments);
    const double rel = std::abs(r.objective - expected) / std::max(1.0, std::abs(expected));
    worst = std::max(worst, rel);
    if (rel > 1e-6) ++bad;
  }
  return {bad == 0, fmt("50 instances, %d mismatches, max relative error %.2e", bad, worst)};
}

Outcome dual_consistency() {
  std::mt19937_64 rng(314159);
  std::uniform_real_distribution<double> value(-2000.0, 5000.0);
  std::uniform_real_distribution<double> beta_dist(0.0, 0.99);
  int bad = 0, fractional = 0;
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 2 + k % 97;
    std::vector<double> x(n);
    for (auto& v : x) v = value(rng);
    const double beta = k % 4 == 0 ? 1.0 - 4.0 / double(n + 3) : beta_dist(rng);
    const RiskSpec spec(beta);
    const double t = spec.tail_count(n);
    if (std::abs(t - std::round(t)) > 1e-9) ++fractional;
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    const double epi = oracle::epigraph_cvar_scan(x, beta, 1e-4 * (*hi - *lo));
    const double err = std::abs(epi - cvar(x, spec));
    worst = std::max(worst, err);
    if (err > 1e-3) ++bad;
  }
  return {bad == 0 && fractional > 0,
          fmt("100 vectors (%d with fractional tail), %d mismatches, max error %.2e", fractional, bad, worst)};
}

Outcome constraint_invariants() {
  std::size_t violations = 0;
  for (const auto& f : fixture_outputs) {
    const auto& set = f.scenarios;
    const auto& r = f.report;
    if (r.curve.size() > f.segments) ++violations;
    const auto segs = r.curve.segments();
    for (std::size_t i = 1; i < segs.size(); ++i) violations += segs[i - 1].price > segs[i].price;
    if (r.curve.total_quantity() > set.max_wind() + 1e-9) ++violations;
    for (std::size_t w = 0; w < set.size(); ++w) {
      const auto out = clear(r.curve, set[w].lambda_da);
      if (out.cleared_mw > set.max_wind() + 1e-9) ++violations;
      for (std::size_t i = 1; i < out.indicator.size(); ++i) violations += out.indicator[i] > out.indicator[i - 1];
      if (w > 0) {
        const auto before = clear(r.curve, set[w - 1].lambda_da);
        for (std::size_t i = 0; i < out.indicator.size(); ++i) violations += out.indicator[i] < before.indicator[i];
      }
    }
  }
  return {violations == 0 && !fixture_outputs.empty(),
          fmt("%zu solver outputs checked, %zu violations", fixture_outputs.size(), violations)};
}

Outcome case1_total_offer() {
  const auto set = case_fixture(-80.0);
  const auto neutral = solve_and_keep(set, options(2, 0.0));
  const auto averse = solve_and_keep(set, options(2, 0.9));
  const double q0 = neutral.curve.total_quantity(), q9 = averse.curve.total_quantity();
  return {neutral.proof && averse.proof && q9 <= q0 - 1.0,
          fmt("250 scenarios, 2 segments: offered %.3f MW at beta 0, %.3f MW at beta 0.9", q0, q9)};
}

Outcome case2_tail_clustering() {
  const auto set = case_fixture(80.0);
  const auto r = solve_and_keep(set, options(2, 0.9));
  double full[3] = {0, 0, 0}, tail[3] = {0, 0, 0};
  for (const auto& s : set) {
    full[0] += s.lambda_da;
    full[1] += s.lambda_rt;
    full[2] += s.p_max_wind;
  }
  for (auto i : r.tail_indices) {
    tail[0] += set[i].lambda_da;
    tail[1] += set[i].lambda_rt;
    tail[2] += set[i].p_max_wind;
  }
  bool below = !r.tail_indices.empty();
  for (int k = 0; k < 3; ++k) {
    full[k] /= double(set.size());
    tail[k] /= double(r.tail_indices.size());
    below = below && tail[k] < full[k];
  }
  return {below && r.proof, fmt("%zu active samples; means da %.2f<%.2f rt %.2f<%.2f wind %.2f<%.2f",
                                r.tail_indices.size(), tail[0], full[0], tail[1], full[1], tail[2], full[2])};
}

Outcome regret_arithmetic() {
  const Date day = parse_date("2019-10-01");
  // hindsight 200 (DA 2, RT 1, 100 MW); 50 MW cleared day-ahead earns 2 * 50 + 1 * 50 = 150
  const auto rec = run_hour(OfferCurve({{0.0, 50.0}}), day, 12, 2.0, 1.0, 100.0);
  const bool exact = rec.ideal_profit == 200.0 && rec.profit == 150.0 && rec.regret == 50.0;
  const bool formula = ideal_profit(10, 20, 100) == 2000.0 && ideal_profit(30, 30, 50) == 1500.0;
  return {exact && formula, fmt("ideal %.0f - profit %.0f = regret %.0f; max(10, 20) * 100 MW = %.0f", rec.ideal_profit,
                                rec.profit, rec.regret, ideal_profit(10, 20, 100))};
}

Outcome miqp_soundness() {
  int infeasible = 0, mismatched = 0, miscounted = 0;
  double worst_violation = 0, worst_gap = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto set = oracle::random_instance(seed * 101, 1 + seed % 6);
    const std::size_t n = set.size();
    const std::size_t segments = 1 + seed % 3;
    const double beta = (seed % 4) * 0.25;
    const auto opts = options(segments, beta);
    const auto r = solve_and_keep(set, opts);

    std::ostringstream text;
    const auto stats = write_miqp(set, opts, MiqpExportConfig{}, text);
    std::istringstream in(text.str());
    const auto model = oracle::parse_lp(in);

    auto count = [&](const std::string& prefix) {
      std::size_t k = 0;
      for (const auto& c : model.constraints) k += c.name.rfind(prefix, 0) == 0;
      return k;
    };
    const std::size_t nN = n * segments;
    const bool counts = model.binaries.size() == nN && stats.binaries == nN && count("rowsum_w") == n - 1 &&
                        count("order_s") == segments - 1 && count("nest_w") == n * (segments - 1) &&
                        count("ind_hi") == nN && count("ind_lo") == nN && count("lin_") == 3 * nN &&
                        count("cvar_w") == n && count("short_w") == n && count("cap") == 1 &&
                        stats.scenario_rowsum_rows == n - 1 && stats.price_order_rows == segments - 1 &&
                        stats.nesting_rows == n * (segments - 1);
    if (!counts) ++miscounted;

    // Native solution in the exported variables.
    std::map<std::string, double> v;
    std::vector<Segment> segs(r.curve.segments().begin(), r.curve.segments().end());
    while (segs.size() < segments) segs.push_back({set.max_lambda_da() + 1.0, 0.0});
    std::vector<double> profits;
    for (std::size_t i = 0; i < segments; ++i) {
      v["lam_s" + std::to_string(i)] = segs[i].price;
      v["p_s" + std::to_string(i)] = segs[i].quantity;
    }
    for (std::size_t w = 0; w < n; ++w) {
      double cleared = 0;
      for (std::size_t i = 0; i < segments; ++i) {
        const bool u = segs[i].price <= set[w].lambda_da;
        const std::string tag = "_w" + std::to_string(w) + "_s" + std::to_string(i);
        v["u" + tag] = u;
        v["w" + tag] = u ? segs[i].quantity : 0.0;
        cleared += u ? segs[i].quantity : 0.0;
      }
      v["d_w" + std::to_string(w)] = std::min(0.0, set[w].p_max_wind - cleared);
      profits.push_back(set[w].lambda_da * cleared + set[w].lambda_rt * v["d_w" + std::to_string(w)]);
    }
    const double alpha = value_at_risk(profits, RiskSpec(beta));
    v["alpha"] = alpha;
    for (std::size_t w = 0; w < n; ++w) v["s_w" + std::to_string(w)] = std::max(0.0, alpha - profits[w]);

    const auto ev = oracle::evaluate(model, v);
    worst_violation = std::max(worst_violation, ev.max_violation);
    if (ev.max_violation > 1e-6) ++infeasible;
    const double gap = std::abs(ev.objective - r.objective);
    worst_gap = std::max(worst_gap, gap);
    if (gap > 1e-6 * std::max(1.0, std::abs(r.objective))) ++mismatched;
  }
  return {infeasible == 0 && mismatched == 0 && miscounted == 0,
          fmt("20 instances: %d infeasible (max violation %.1e), %d objective mismatches (max %.1e), %d count "
              "mismatches",
              infeasible, worst_violation, mismatched, worst_gap, miscounted)};
}

Outcome performance_budget() {
  std::vector<double> times;
  std::vector<std::size_t> nodes;
  bool proved = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto set = sample_gaussian(GaussianSpec::synthetic_case(-80.0), 50, seed).with_clamped_prices();
    auto opts = options(4, 0.9);
    opts.time_budget_s = 60;
    const auto t0 = Clock::now();
    const auto r = solve_and_keep(set, opts);
    times.push_back(seconds_since(t0));
    nodes.push_back(r.nodes_explored);
    proved = proved && r.proof;
  }
  auto sorted = times;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[2];
  std::string node_list;
  for (auto k : nodes) node_list += (node_list.empty() ? "" : ",") + std::to_string(k);
  return {proved && median < 60.0, fmt("median %.2f s over 5 seeds, nodes_explored [%s]", median, node_list.c_str())};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

// Byte comparison of every file in two output directories.
bool same_tree(const fs::path& a, const fs::path& b, std::size_t& files) {
  std::vector<fs::path> names;
  for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename());
  std::size_t other = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++other;
  if (names.size() != other || names.empty()) return false;
  for (const auto& n : names) {
    if (!fs::exists(b / n) || slurp(a / n) != slurp(b / n)) return false;
  }
  files += names.size();
  return true;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("windoffer-acceptance-" + std::to_string(std::random_device{}()));
  fs::create_directories(root);
  bool ok = true;
  std::size_t files = 0;

  for (const char* preset : {"case1", "case2"}) {
    const fs::path dir = root / preset;
    std::ofstream(root / (std::string(preset) + ".json"))
        << R"({"command": "sample", "preset": ")" << preset << R"(", "seed": 20191001, "n": 250})";
    ok = ok && run_cli({"sample", "--config", (root / (std::string(preset) + ".json")).string(), "--out",
                        dir.string()}) == 0;
    const auto scen = (dir / "scenarios.csv").string();
    for (const char* threads : {"1", "4"}) {
      ok = ok && run_cli({"solve", "--scenarios", scen, "--clamp-negative-prices", "--beta", "0,0.5,0.9", "--segments",
                          "2", "--time-budget", "600", "--threads", threads, "--out",
                          (dir / ("solve_t" + std::string(threads))).string()}) == 0;
    }
    ok = ok && same_tree(dir / "solve_t1", dir / "solve_t4", files);
  }

  const auto fx = oracle::synthetic_backtest(77, 50, 2, 20);
  const fs::path bt = root / "backtest";
  fs::create_directories(bt);
  std::ofstream(bt / "history.csv") << fx.history;
  std::ofstream(bt / "wind.csv") << fx.wind_scenarios;
  std::ofstream(bt / "actual.csv") << fx.actual_wind;
  std::ofstream(bt / "config.json") << R"({"command": "backtest", "history": ")" << (bt / "history.csv").string()
                                   << R"(", "wind_scenarios": ")" << (bt / "wind.csv").string()
                                   << R"(", "actual_wind": ")" << (bt / "actual.csv").string()
                                   << R"(", "start_date": ")" << fx.sim_start << R"(", "end_date": ")" << fx.sim_end
                                   << R"(", "lookback_days": 50, "betas": [0, 0.9], "percentiles": [0.25, 0.5],)"
                                   << R"( "segments": 3, "time_budget": 600})";
  for (const char* threads : {"1", "4"}) {
    ok = ok && run_cli({"backtest", "--config", (bt / "config.json").string(), "--threads", threads, "--out",
                        (bt / ("out_t" + std::string(threads))).string()}) == 0;
  }
  ok = ok && same_tree(bt / "out_t1", bt / "out_t4", files);

  std::error_code ec;
  fs::remove_all(root, ec);
  return {ok, fmt("solve (2 fixtures x 3 betas) and backtest (4 strategies x 48 hours): %zu files identical at 1 and 4 threads",
                  files)};
}

}  // namespace

int main() {
  // Criterion 4 inspects every solver output, so it runs last.
  struct Entry {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> entries{
      {1, "oracle equivalence", oracle_equivalence},
      {2, "beta 0 expectation equivalence", expectation_equivalence},
      {3, "CVaR dual consistency", dual_consistency},
      {5, "case 1 reduced total offer", case1_total_offer},
      {6, "case 2 tail clustering", case2_tail_clustering},
      {7, "regret arithmetic", regret_arithmetic},
      {8, "MIQP export soundness", miqp_soundness},
      {9, "performance budget", performance_budget},
      {10, "determinism across threads", determinism},
      {4, "constraint invariants", constraint_invariants},
  };
  std::map<int, std::pair<const char*, Outcome>> results;
  for (const auto& e : entries) {
    Outcome o;
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    results[e.id] = {e.title, o};
  }
  for (const auto& [id, r] : results) report(id, r.first, r.second);
  std::printf("%s: %d of %zu criteria failed\n", failures ? "FAIL" : "PASS", failures, entries.size());
  return failures ? 1 : 0;
}
