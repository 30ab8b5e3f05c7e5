#include "windoffer/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "windoffer/backtest.hpp"
#include "windoffer/csv.hpp"
#include "windoffer/errors.hpp"
#include "windoffer/miqp_export.hpp"
#include "windoffer/scenario.hpp"
#include "windoffer/solver.hpp"

namespace windoffer::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Command-line values; each one set overrides the matching config key.
struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> beta;
  std::optional<std::size_t> segments;
  std::optional<double> min_segment_width;
  bool clamp_negative_prices = false;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
  std::optional<std::string> scenarios;
  std::optional<std::size_t> n;
  std::optional<double> time_budget;
};

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"sample", {"command", "seed", "n", "mean", "covariance", "preset", "out"}},
      {"solve",
       {"command", "scenarios", "betas", "segments", "min_segment_width", "clamp_negative_prices", "threads",
        "time_budget", "out"}},
      {"export-miqp",
       {"command", "scenarios", "beta", "segments", "big_m", "epsilon", "l2_weight", "include_redundant",
        "clamp_negative_prices", "out"}},
      {"backtest",
       {"command", "history", "wind_scenarios", "actual_wind", "start_date", "end_date", "lookback_days", "betas",
        "percentiles", "segments", "min_segment_width", "clamp_negative_prices", "threads", "time_budget", "out"}},
  };
  return keys;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(csv::parse_double(item, 0, "--beta"));
  if (out.empty()) throw ValidationError("empty --beta list");
  return out;
}

json load_config(const std::string& command, const Flags& flags) {
  json cfg = json::object();
  if (!flags.config.empty()) {
    std::ifstream in(flags.config);
    if (!in) throw ValidationError("cannot open config '" + flags.config + "'");
    try {
      cfg = json::parse(in);
    } catch (const json::exception& e) {
      throw ValidationError("config '" + flags.config + "': " + e.what());
    }
    if (!cfg.is_object()) throw ValidationError("config must be a JSON object");
  }
  if (cfg.contains("command") && cfg["command"] != command) {
    throw ValidationError("config command '" + cfg["command"].dump() + "' does not match '" + command + "'");
  }
  if (flags.seed) cfg["seed"] = *flags.seed;
  if (flags.beta) {
    const auto betas = parse_list(*flags.beta);
    if (command == "export-miqp") {
      if (betas.size() != 1) throw ValidationError("export-miqp takes a single --beta");
      cfg["beta"] = betas.front();
    } else {
      cfg["betas"] = betas;
    }
  }
  if (flags.segments) cfg["segments"] = *flags.segments;
  if (flags.min_segment_width) cfg["min_segment_width"] = *flags.min_segment_width;
  if (flags.clamp_negative_prices) cfg["clamp_negative_prices"] = true;
  if (flags.threads) cfg["threads"] = *flags.threads;
  if (flags.out) cfg["out"] = *flags.out;
  if (flags.scenarios) cfg["scenarios"] = *flags.scenarios;
  if (flags.n) cfg["n"] = *flags.n;
  if (flags.time_budget) cfg["time_budget"] = *flags.time_budget;

  const auto& allowed = allowed_keys().at(command);
  for (const auto& [key, value] : cfg.items()) {
    if (!allowed.count(key)) throw ValidationError("unknown config key '" + key + "' for command " + command);
  }
  return cfg;
}

template <typename T>
T get(const json& cfg, const std::string& key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config key '" + key + "' has the wrong type");
  }
}

template <typename T>
T require(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw ValidationError("missing required config key '" + key + "'");
  return get<T>(cfg, key, T{});
}

fs::path output_dir(const json& cfg) {
  const fs::path dir = require<std::string>(cfg, "out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << content;
}

std::string beta_tag(double beta) { return "beta_" + csv::format_double(beta); }

ScenarioSet load_input_scenarios(const json& cfg) {
  auto set = load_scenarios_csv(require<std::string>(cfg, "scenarios"));
  return get<bool>(cfg, "clamp_negative_prices", false) ? set.with_clamped_prices() : set;
}

SolveOptions solve_options(const json& cfg) {
  SolveOptions opts;
  opts.n_segments = get<std::size_t>(cfg, "segments", opts.n_segments);
  opts.min_segment_width_mw = get<double>(cfg, "min_segment_width", opts.min_segment_width_mw);
  opts.time_budget_s = get<double>(cfg, "time_budget", opts.time_budget_s);
  opts.threads = get<unsigned>(cfg, "threads", 1);
  opts.validate();
  return opts;
}

int cmd_sample(const json& cfg, std::ostream& out) {
  if (!cfg.contains("seed")) throw ValidationError("sample requires an explicit seed");
  const auto seed = get<std::uint64_t>(cfg, "seed", 0);
  const auto n = get<std::size_t>(cfg, "n", 250);
  GaussianSpec spec;
  const bool explicit_spec = cfg.contains("mean") || cfg.contains("covariance");
  const auto preset = get<std::string>(cfg, "preset", explicit_spec ? "" : "case1");
  if (preset == "case1") {
    spec = GaussianSpec::synthetic_case(-80.0);
  } else if (preset == "case2") {
    spec = GaussianSpec::synthetic_case(80.0);
  } else if (!preset.empty()) {
    throw ValidationError("unknown preset '" + preset + "' (expected case1 or case2)");
  } else {
    spec.mean = require<std::array<double, 3>>(cfg, "mean");
    spec.covariance = require<std::array<std::array<double, 3>, 3>>(cfg, "covariance");
  }
  if (!preset.empty() && explicit_spec) {
    throw ValidationError("preset and explicit mean/covariance are mutually exclusive");
  }
  const auto set = sample_gaussian(spec, n, seed);
  const auto dir = output_dir(cfg);
  std::ostringstream csv_out;
  write_scenarios_csv(set, csv_out);
  write_file(dir / "scenarios.csv", csv_out.str());

  std::array<double, 3> mean{};
  for (const auto& s : set) {
    mean[0] += s.lambda_da;
    mean[1] += s.lambda_rt;
    mean[2] += s.p_max_wind;
  }
  for (auto& m : mean) m /= static_cast<double>(set.size());
  std::array<std::array<double, 3>, 3> cov{};
  for (const auto& s : set) {
    const std::array<double, 3> x{s.lambda_da - mean[0], s.lambda_rt - mean[1], s.p_max_wind - mean[2]};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) cov[i][j] += x[i] * x[j];
  }
  const double denom = set.size() > 1 ? static_cast<double>(set.size() - 1) : 1.0;
  out << "wrote " << set.size() << " scenarios to " << (dir / "scenarios.csv").string() << '\n';
  out << "mean (lambda_da, lambda_rt, p_max_wind): " << mean[0] << ", " << mean[1] << ", " << mean[2] << '\n';
  out << "sample covariance:\n";
  for (int i = 0; i < 3; ++i) {
    out << "  " << cov[i][0] / denom << ", " << cov[i][1] / denom << ", " << cov[i][2] / denom << '\n';
  }
  return kOk;
}

int cmd_solve(const json& cfg, std::ostream& out) {
  const auto scenarios = load_input_scenarios(cfg);
  auto opts = solve_options(cfg);
  const auto betas = get<std::vector<double>>(cfg, "betas", {0.0});
  if (betas.empty()) throw ValidationError("betas list is empty");
  for (double b : betas) RiskSpec{b};
  const auto dir = output_dir(cfg);

  for (double beta : betas) {
    opts.beta = beta;
    const auto report = solve_exact(scenarios, opts);
    const std::string tag = beta_tag(beta);
    std::ostringstream curve_csv, report_json, plot_csv;
    write_offer_curve_csv(report.curve, curve_csv);
    write_report_json(report, report_json);
    write_plot_data_csv(scenarios, report, plot_csv);
    write_file(dir / ("curve_" + tag + ".csv"), curve_csv.str());
    write_file(dir / ("report_" + tag + ".json"), report_json.str());
    write_file(dir / ("plot_" + tag + ".csv"), plot_csv.str());
    out << tag << ": objective " << report.objective << ", offered " << report.curve.total_quantity() << " MW in "
        << report.curve.size() << " segments, nodes " << report.nodes_explored
        << (report.proof ? ", optimal" : ", time budget exhausted (best incumbent)") << '\n';
  }
  return kOk;
}

int cmd_export(const json& cfg, std::ostream& out) {
  if (!cfg.contains("out")) throw ValidationError("export-miqp requires an output directory (--out)");
  const auto scenarios = load_input_scenarios(cfg);
  SolveOptions opts;
  opts.n_segments = get<std::size_t>(cfg, "segments", opts.n_segments);
  opts.beta = get<double>(cfg, "beta", 0.0);
  MiqpExportConfig mc;
  mc.big_m = get<double>(cfg, "big_m", mc.big_m);
  mc.epsilon = get<double>(cfg, "epsilon", mc.epsilon);
  mc.l2_weight = get<double>(cfg, "l2_weight", mc.l2_weight);
  mc.include_redundant = get<bool>(cfg, "include_redundant", mc.include_redundant);
  const auto path = output_dir(cfg) / "model.lp";
  const auto stats = export_miqp(scenarios, opts, mc, path.string());
  out << "wrote " << path.string() << ": binaries " << stats.binaries << ", row-sum " << stats.scenario_rowsum_rows
      << ", price-order " << stats.price_order_rows << ", nesting " << stats.nesting_rows << '\n';
  return kOk;
}

json summary_json(const std::string& name, double parameter, const BacktestSummary& s,
                  const std::vector<SkippedHour>& skipped) {
  json j = json::object();
  j["strategy"] = name;
  j["beta_or_percentile"] = parameter;
  j["total_regret"] = s.total_regret;
  j["mean_daily_regret_std"] = s.mean_daily_regret_std;
  j["days"] = s.days;
  j["hours"] = s.hours;
  auto sk = json::array();
  for (const auto& h : skipped) sk.push_back({{"date", format_date(h.date)}, {"hour", h.hour}, {"reason", h.reason}});
  j["skipped"] = sk;
  return j;
}

int cmd_backtest(const json& cfg, std::ostream& out, std::ostream& err) {
  BacktestInputs in;
  in.start = parse_date(require<std::string>(cfg, "start_date"));
  in.end = parse_date(require<std::string>(cfg, "end_date"));
  if (in.end < in.start) throw ValidationError("backtest date range is empty");
  in.lookback_days = get<int>(cfg, "lookback_days", 50);
  in.clamp_negative_prices = get<bool>(cfg, "clamp_negative_prices", false);
  in.threads = get<unsigned>(cfg, "threads", 1);
  const auto betas = get<std::vector<double>>(cfg, "betas", {});
  const auto percentiles = get<std::vector<double>>(cfg, "percentiles", {});
  if (betas.empty() && percentiles.empty()) throw ValidationError("backtest needs at least one beta or percentile");
  for (double b : betas) RiskSpec{b};
  for (double p : percentiles)
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("percentile must lie in [0, 1]");
  auto opts = solve_options(cfg);
  opts.threads = 1;  // hours run in parallel instead
  const auto dir = output_dir(cfg);

  in.history = load_price_history_csv(require<std::string>(cfg, "history"));
  in.wind_scenarios = load_wind_scenario_table_csv(require<std::string>(cfg, "wind_scenarios"));
  in.actual_wind = load_actual_wind_csv(require<std::string>(cfg, "actual_wind"));

  const auto gaps = find_data_gaps(in);
  if (!gaps.empty()) {
    err << "missing data for " << gaps.size() << " hour(s):\n";
    for (const auto& g : gaps) err << "  " << format_date(g.date) << " hour " << g.hour << ": " << g.reason << '\n';
    return kMissingData;
  }

  struct Strategy {
    std::string name;
    double parameter;
    StrategyFactory factory;
  };
  std::vector<Strategy> strategies;
  for (double beta : betas) {
    strategies.push_back({"cvar_" + beta_tag(beta), beta, [opts, beta](const ScenarioSet& s) {
                            auto o = opts;
                            o.beta = beta;
                            return solve_exact(s, o).curve;
                          }});
  }
  for (double p : percentiles) {
    strategies.push_back({"percentile_" + csv::format_double(p), p,
                          [p](const ScenarioSet& s) { return percentile_strategy(s, p); }});
  }

  json comparison = json::object();
  auto rows = json::array();
  for (const auto& st : strategies) {
    const auto result = run_period(in, st.factory);
    if (result.records.empty()) throw MissingDataError("strategy " + st.name + " produced no records");
    std::ostringstream records_csv;
    write_records_csv(result.records, records_csv);
    write_file(dir / ("records_" + st.name + ".csv"), records_csv.str());
    const auto summary = aggregate(result.records);
    const auto sj = summary_json(st.name, st.parameter, summary, result.skipped);
    write_file(dir / ("summary_" + st.name + ".json"), sj.dump(2) + "\n");
    rows.push_back(sj);
    out << st.name << ": total regret " << summary.total_regret << ", mean daily regret std "
        << summary.mean_daily_regret_std << '\n';
  }
  comparison["strategies"] = rows;
  write_file(dir / "comparison.json", comparison.dump(2) + "\n");
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"CVaR day-ahead offer curves for a price-taking wind generator", "windoffer"};
  app.require_subcommand(1);
  Flags flags;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON config document");
    sub->add_option("--out", flags.out, "Output directory");
  };
  auto solver_flags = [&](CLI::App* sub) {
    sub->add_option("--scenarios", flags.scenarios, "Scenario CSV (lambda_da,lambda_rt,p_max_wind)");
    sub->add_option("--segments", flags.segments, "Number of offer curve segments");
    sub->add_flag("--clamp-negative-prices", flags.clamp_negative_prices, "Replace negative prices by zero");
  };

  auto* sample = app.add_subcommand("sample", "Draw synthetic Gaussian scenarios");
  common(sample);
  sample->add_option("--seed", flags.seed, "Random seed");
  sample->add_option("--n", flags.n, "Number of scenarios");

  auto* solve = app.add_subcommand("solve", "Compute optimal offer curves for a list of betas");
  common(solve);
  solver_flags(solve);
  solve->add_option("--beta", flags.beta, "Comma-separated beta list");
  solve->add_option("--min-segment-width", flags.min_segment_width, "Drop segments narrower than this (MW)");
  solve->add_option("--threads", flags.threads, "Worker threads");
  solve->add_option("--time-budget", flags.time_budget, "Per-solve time budget (s)");

  auto* exporter = app.add_subcommand("export-miqp", "Write the mixed-integer model in LP format");
  common(exporter);
  solver_flags(exporter);
  exporter->add_option("--beta", flags.beta, "Risk factor");

  auto* backtest = app.add_subcommand("backtest", "Hourly two-settlement regret replay");
  common(backtest);
  backtest->add_option("--beta", flags.beta, "Comma-separated beta list for the CVaR strategy");
  backtest->add_option("--segments", flags.segments, "Number of offer curve segments");
  backtest->add_option("--min-segment-width", flags.min_segment_width, "Drop segments narrower than this (MW)");
  backtest->add_flag("--clamp-negative-prices", flags.clamp_negative_prices, "Replace negative prices by zero");
  backtest->add_option("--threads", flags.threads, "Worker threads");
  backtest->add_option("--time-budget", flags.time_budget, "Per-solve time budget (s)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (sample->parsed()) return cmd_sample(load_config("sample", flags), out);
    if (solve->parsed()) return cmd_solve(load_config("solve", flags), out);
    if (exporter->parsed()) return cmd_export(load_config("export-miqp", flags), out);
    if (backtest->parsed()) return cmd_backtest(load_config("backtest", flags), out, err);
  } catch (const SolverRefusal& e) {
    err << "solver refusal: " << e.what() << '\n';
    return kSolverRefusal;
  } catch (const MissingDataError& e) {
    err << "missing data: " << e.what() << '\n';
    return kMissingData;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace windoffer::cli
