#include "windoffer/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <ostream>
#include <string>
#include <thread>

#include "windoffer/csv.hpp"
#include "windoffer/errors.hpp"
#include "windoffer/simplex.hpp"

namespace windoffer {

bool BreakpointVector::is_nondecreasing() const { return std::is_sorted(positions.begin(), positions.end()); }

void SolveOptions::validate() const {
  if (n_segments < 1) throw ValidationError("n_segments must be at least 1");
  RiskSpec{beta};
  if (!(min_segment_width_mw >= 0.0)) throw ValidationError("min_segment_width_mw must be >= 0");
  if (!(time_budget_s > 0.0)) throw ValidationError("time_budget_s must be positive");
}

double quantity_cap(const ScenarioSet& scenarios) { return scenarios.max_wind(); }

OfferCurve curve_from_breakpoints(const ScenarioSet& scenarios, const BreakpointVector& b,
                                  std::span<const double> quantities) {
  if (b.positions.size() != quantities.size()) throw ValidationError("breakpoint/quantity length mismatch");
  if (!b.is_nondecreasing()) throw ValidationError("breakpoint vector must be nondecreasing");
  const double never_price = scenarios.max_lambda_da() + 1.0;
  std::vector<Segment> segments;
  segments.reserve(b.positions.size());
  for (std::size_t i = 0; i < b.positions.size(); ++i) {
    const std::size_t pos = b.positions[i];
    if (pos > scenarios.size()) throw ValidationError("breakpoint out of range");
    segments.push_back(Segment{pos < scenarios.size() ? scenarios[pos].lambda_da : never_price, quantities[i]});
  }
  return OfferCurve(std::move(segments));
}

void fill_report(const ScenarioSet& scenarios, const OfferCurve& curve, double beta, SolveReport& report) {
  report.curve = curve;
  report.beta = beta;
  report.per_scenario.clear();
  std::vector<double> profits;
  for (const auto& s : scenarios) {
    report.per_scenario.push_back(evaluate(curve, s));
    profits.push_back(report.per_scenario.back().da_objective_profit);
  }
  report.objective = cvar(profits, RiskSpec{beta});
  report.tail_indices = active_samples(profits, RiskSpec{beta});
}

namespace {

using Clock = std::chrono::steady_clock;

// Search over strictly increasing sets of day-ahead price groups. For a
// node (g_1 < ... < g_j) the exact LP allows cumulative increments only at
// g_1..g_j; the bound LP additionally allows a free increment at every group
// after g_j, i.e. any nondecreasing completion. Both are column
// restrictions of the root LP, so every tableau is a warm start for the
// next.
class BreakpointSearch {
 public:
  struct Incumbent {
    double value = 0.0;
    std::vector<std::size_t> key;      // effective breakpoints, padded with |Omega|
    std::vector<std::size_t> groups;   // groups carrying positive quantity
    std::vector<double> increments;
  };

  BreakpointSearch(const ScenarioSet& scenarios, const SolveOptions& opts)
      : scenarios_(scenarios), opts_(opts), n_(scenarios.size()) {
    for (std::size_t w = 0; w < n_; ++w) {
      if (w == 0 || scenarios[w].lambda_da != scenarios[w - 1].lambda_da) group_start_.push_back(w);
      group_of_.push_back(group_start_.size() - 1);
    }
    groups_ = group_start_.size();
    cap_ = quantity_cap(scenarios);
    shift_ = scenarios.max_lambda_rt() * cap_ + 1.0;
    tail_weight_ = 1.0 / RiskSpec{opts.beta}.tail_count(n_);
    qty_tol_ = 1e-9 * std::max(1.0, cap_);
    build_lp();
    deadline_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(opts.time_budget_s));
  }

  std::size_t groups() const { return groups_; }
  std::size_t group_start(std::size_t g) const { return group_start_[g]; }
  double cap() const { return cap_; }

  Incumbent empty_incumbent() const {
    Incumbent inc;
    inc.key.assign(opts_.n_segments, n_);
    return inc;
  }

  struct Outcome {
    Incumbent best;
    std::size_t nodes = 0;
    bool aborted = false;
  };

  Outcome run() {
    Outcome out;
    out.best = empty_incumbent();
    if (cap_ <= 0.0) return out;

    DenseTableau root(rows_, cols_, a_, b_, c_);
    root.optimize();
    out.nodes = 1;

    // First-level subtrees run in fixed-size waves sharing the incumbent as
    // of the start of the wave, so the result and the node count are the
    // same for every thread count.
    constexpr std::size_t kWave = 8;
    const unsigned threads = std::max(1u, opts_.threads);
    bool stop = false;
    for (std::size_t first = 0; first < groups_ && !stop; first += kWave) {
      const std::size_t last = std::min(groups_, first + kWave);
      std::vector<TaskResult> results(last - first);
      const Incumbent snapshot = out.best;
      std::atomic<std::size_t> next{first};
      auto worker = [&] {
        for (std::size_t g; (g = next.fetch_add(1)) < last;) results[g - first] = run_task(root, g, snapshot);
      };
      if (threads == 1 || last - first == 1) {
        worker();
      } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < std::min<std::size_t>(threads, last - first); ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
      }
      for (auto& r : results) {
        out.nodes += r.nodes;
        if (better(r.best, out.best)) out.best = std::move(r.best);
        if (r.pruned_at_root && opts_.prune) stop = true;
        if (r.aborted) {
          out.aborted = true;
          stop = true;
        }
      }
    }
    return out;
  }

 private:
  struct TaskResult {
    Incumbent best;
    std::size_t nodes = 0;
    bool pruned_at_root = false;
    bool aborted = false;
  };

  struct TaskState {
    Incumbent best;
    std::size_t nodes = 0;
    bool aborted = false;
  };

  void build_lp() {
    // Columns: increments at each group, alpha + shift, tail excess per scenario.
    // Rows per scenario: both linear pieces of the concave profit function.
    rows_ = 2 * n_ + 1;
    cols_ = groups_ + 1 + n_;
    const std::size_t alpha = groups_;
    a_.assign(rows_ * cols_, 0.0);
    b_.assign(rows_, 0.0);
    c_.assign(cols_, 0.0);
    for (std::size_t w = 0; w < n_; ++w) {
      const auto& s = scenarios_[w];
      double* r0 = &a_[(2 * w) * cols_];
      double* r1 = &a_[(2 * w + 1) * cols_];
      r0[alpha] = r1[alpha] = 1.0;
      r0[alpha + 1 + w] = r1[alpha + 1 + w] = -1.0;
      for (std::size_t g = 0; g <= group_of_[w]; ++g) {
        r0[g] = -s.lambda_da;
        r1[g] = -(s.lambda_da - s.lambda_rt);
      }
      b_[2 * w] = shift_;
      b_[2 * w + 1] = shift_ + s.lambda_rt * s.p_max_wind;
    }
    for (std::size_t g = 0; g < groups_; ++g) a_[(rows_ - 1) * cols_ + g] = 1.0;
    b_[rows_ - 1] = cap_;
    c_[alpha] = 1.0;
    for (std::size_t w = 0; w < n_; ++w) c_[alpha + 1 + w] = -tail_weight_;
  }

  double tolerance(double value) const { return 1e-9 * std::max({1.0, std::abs(value), shift_}); }

  bool better(const Incumbent& cand, const Incumbent& best) const {
    const double tol = tolerance(best.value);
    if (cand.value > best.value + tol) return true;
    return cand.value >= best.value - tol && cand.key < best.key;
  }

  double bound_of(const DenseTableau& t) const { return t.objective() - shift_; }

  bool out_of_time(TaskState& st) const {
    if (Clock::now() > deadline_) st.aborted = true;
    return st.aborted;
  }

  // Applies pending column fixes, rebuilding from scratch if the warm start
  // runs into numerical trouble.
  void reoptimize(DenseTableau& t) const {
    try {
      t.reoptimize();
    } catch (const LpError&) {
      DenseTableau fresh(rows_, cols_, a_, b_, c_);
      for (std::size_t g = 0; g < groups_; ++g)
        if (t.is_fixed(g)) fresh.fix_at_zero(g);
      fresh.optimize();
      t = std::move(fresh);
    }
  }

  TaskResult run_task(const DenseTableau& root, std::size_t g1, const Incumbent& snapshot) const {
    TaskState st;
    st.best = snapshot;
    DenseTableau t = root;
    for (std::size_t g = 0; g < g1; ++g) t.fix_at_zero(g);
    if (g1 > 0) {
      reoptimize(t);
      ++st.nodes;
    }
    TaskResult res;
    if (opts_.prune && bound_of(t) < st.best.value - tolerance(st.best.value)) {
      res.pruned_at_root = true;
    } else if (!out_of_time(st)) {
      std::vector<std::size_t> prefix{g1};
      expand(prefix, t, st);
    }
    res.best = std::move(st.best);
    res.nodes = st.nodes;
    res.aborted = st.aborted;
    return res;
  }

  void expand(std::vector<std::size_t>& prefix, const DenseTableau& bound_tab, TaskState& st) const {
    const std::size_t last = prefix.back();
    if (prefix.size() == opts_.n_segments || last + 1 == groups_) {
      DenseTableau exact = bound_tab;
      for (std::size_t g = last + 1; g < groups_; ++g) exact.fix_at_zero(g);
      if (last + 1 < groups_) {
        reoptimize(exact);
        ++st.nodes;
      }
      record(prefix, exact, st);
      return;
    }
    DenseTableau sib = bound_tab;
    for (std::size_t g = last + 1; g < groups_; ++g) {
      if (out_of_time(st)) return;
      if (g > last + 1) {
        sib.fix_at_zero(g - 1);
        reoptimize(sib);
        ++st.nodes;
      }
      // Sibling bounds are nonincreasing in g: once one is pruned, all are.
      if (opts_.prune && bound_of(sib) < st.best.value - tolerance(st.best.value)) break;
      prefix.push_back(g);
      expand(prefix, sib, st);
      prefix.pop_back();
      if (st.aborted) return;
    }
  }

  void record(const std::vector<std::size_t>& prefix, const DenseTableau& exact, TaskState& st) const {
    Incumbent cand;
    cand.value = exact.objective() - shift_;
    for (std::size_t g : prefix) {
      const double q = exact.value(g);
      if (q > qty_tol_) {
        cand.groups.push_back(g);
        cand.increments.push_back(q);
        cand.key.push_back(group_start_[g]);
      }
    }
    cand.key.resize(opts_.n_segments, n_);
    if (better(cand, st.best)) st.best = std::move(cand);
  }

  const ScenarioSet& scenarios_;
  const SolveOptions& opts_;
  std::size_t n_;
  std::vector<std::size_t> group_start_;
  std::vector<std::size_t> group_of_;
  std::size_t groups_ = 0;
  double cap_ = 0.0;
  double shift_ = 0.0;
  double tail_weight_ = 0.0;
  double qty_tol_ = 0.0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_, b_, c_;
  Clock::time_point deadline_;
};

}  // namespace

SolveReport solve_exact(const ScenarioSet& scenarios, const SolveOptions& opts) {
  opts.validate();
  if (scenarios.has_negative_prices()) {
    throw SolverRefusal(
        "solve_exact requires nonnegative day-ahead and real-time prices; clamp them "
        "(--clamp-negative-prices) or use the MIQP exporter");
  }
  BreakpointSearch search(scenarios, opts);
  auto outcome = search.run();

  const std::size_t n = scenarios.size();
  const auto& best = outcome.best;
  BreakpointVector b;
  std::vector<double> quantities;
  double used = 0.0;
  for (std::size_t i = 0; i < best.groups.size(); ++i) {
    b.positions.push_back(search.group_start(best.groups[i]));
    double q = std::max(0.0, best.increments[i]);
    q = std::min(q, search.cap() - used);
    quantities.push_back(std::max(0.0, q));
    used += quantities.back();
  }
  b.positions.resize(opts.n_segments, n);
  quantities.resize(opts.n_segments, 0.0);

  SolveReport report;
  report.breakpoints = b;
  const OfferCurve raw = curve_from_breakpoints(scenarios, b, quantities);
  fill_report(scenarios, postprocess(raw, opts.min_segment_width_mw), opts.beta, report);
  report.nodes_explored = outcome.nodes;
  report.proof = !outcome.aborted;
  return report;
}

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r > 1e18 ? static_cast<std::size_t>(1e18) : static_cast<std::size_t>(std::llround(r));
}

}  // namespace

SolveReport solve_bruteforce(const ScenarioSet& scenarios, const SolveOptions& opts, double quantity_step) {
  opts.validate();
  if (!(quantity_step > 0.0)) throw ValidationError("quantity_step must be positive");
  const std::size_t n = scenarios.size();
  const std::size_t segs = opts.n_segments;
  const double cap = quantity_cap(scenarios);
  const auto levels = static_cast<std::size_t>(std::floor(cap / quantity_step + 1e-9));

  const std::size_t b_count = binomial(n + segs, segs);        // nondecreasing vectors over {0..n}
  const std::size_t q_count = binomial(levels + segs, segs);   // grid vectors with sum <= levels
  const double work = static_cast<double>(b_count) * static_cast<double>(q_count) * static_cast<double>(n);
  if (work > 5e8) {
    throw SolverRefusal("brute-force instance too large (" + std::to_string(b_count) + " breakpoint vectors x " +
                        std::to_string(q_count) + " quantity vectors)");
  }

  const RiskSpec risk{opts.beta};
  BreakpointVector b;
  b.positions.assign(segs, 0);
  std::vector<std::size_t> q(segs, 0);
  std::vector<double> quantities(segs, 0.0);
  std::vector<double> profits(n);
  std::vector<std::vector<std::uint8_t>> indicators(n);

  double best_value = -std::numeric_limits<double>::infinity();
  BreakpointVector best_b;
  std::vector<double> best_q;
  std::size_t evaluated = 0;

  auto evaluate_quantities = [&] {
    for (std::size_t i = 0; i < segs; ++i) quantities[i] = static_cast<double>(q[i]) * quantity_step;
    for (std::size_t w = 0; w < n; ++w) {
      double cleared = 0.0;
      for (std::size_t i = 0; i < segs; ++i)
        if (indicators[w][i]) cleared += quantities[i];
      const auto& s = scenarios[w];
      profits[w] = s.lambda_da * cleared + s.lambda_rt * shortfall(cleared, s.p_max_wind);
    }
    ++evaluated;
    const double v = cvar(profits, risk);
    if (v > best_value) {
      best_value = v;
      best_b = b;
      best_q = quantities;
    }
  };

  // Quantity vectors in lexicographic order with sum <= levels.
  auto enumerate_quantities = [&](auto&& self, std::size_t i, std::size_t remaining) -> void {
    if (i == segs) {
      evaluate_quantities();
      return;
    }
    for (std::size_t v = 0; v <= remaining; ++v) {
      q[i] = v;
      self(self, i + 1, remaining - v);
    }
  };

  auto enumerate_breakpoints = [&](auto&& self, std::size_t i, std::size_t lo) -> void {
    if (i == segs) {
      const OfferCurve curve = curve_from_breakpoints(scenarios, b, quantities);
      for (std::size_t w = 0; w < n; ++w) indicators[w] = clear(curve, scenarios[w].lambda_da).indicator;
      enumerate_quantities(enumerate_quantities, 0, levels);
      return;
    }
    for (std::size_t pos = lo; pos <= n; ++pos) {
      b.positions[i] = pos;
      self(self, i + 1, pos);
    }
  };
  enumerate_breakpoints(enumerate_breakpoints, 0, 0);

  SolveReport report;
  report.breakpoints = best_b;
  fill_report(scenarios, postprocess(curve_from_breakpoints(scenarios, best_b, best_q), opts.min_segment_width_mw),
              opts.beta, report);
  report.nodes_explored = evaluated;
  report.proof = true;
  return report;
}

OfferCurve percentile_strategy(const ScenarioSet& scenarios, double percentile) {
  if (!(percentile >= 0.0 && percentile <= 1.0)) throw ValidationError("percentile must lie in [0, 1]");
  std::vector<double> winds;
  for (const auto& s : scenarios) winds.push_back(s.p_max_wind);
  std::sort(winds.begin(), winds.end());
  const auto n = winds.size();
  const auto idx = std::min(static_cast<std::size_t>(std::floor(percentile * static_cast<double>(n) + 1e-9)), n - 1);
  return OfferCurve({Segment{0.0, winds[idx]}});
}

void write_report_json(const SolveReport& report, std::ostream& out) {
  nlohmann::ordered_json j;
  j["objective"] = report.objective;
  j["beta"] = report.beta;
  auto segments = nlohmann::ordered_json::array();
  for (const auto& s : report.curve.segments()) {
    segments.push_back({{"price", s.price}, {"quantity", s.quantity}});
  }
  j["segments"] = segments;
  j["tail_indices"] = report.tail_indices;
  j["nodes_explored"] = report.nodes_explored;
  j["proof"] = report.proof;
  out << j.dump(2) << '\n';
}

void write_plot_data_csv(const ScenarioSet& scenarios, const SolveReport& report, std::ostream& out) {
  std::vector<char> in_tail(scenarios.size(), 0);
  for (auto i : report.tail_indices) in_tail[i] = 1;
  out << "index,lambda_da,lambda_rt,p_max_wind,profit,in_tail\n";
  for (std::size_t w = 0; w < scenarios.size(); ++w) {
    const auto& s = scenarios[w];
    out << w << ',' << csv::format_double(s.lambda_da) << ',' << csv::format_double(s.lambda_rt) << ','
        << csv::format_double(s.p_max_wind) << ',' << csv::format_double(report.per_scenario[w].da_objective_profit)
        << ',' << (in_tail[w] ? 1 : 0) << '\n';
  }
}

}  // namespace windoffer
