#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "windoffer/backtest.hpp"
#include "windoffer/errors.hpp"
#include "windoffer/miqp_export.hpp"
#include "windoffer/risk.hpp"
#include "windoffer/solver.hpp"

namespace py = pybind11;
using namespace windoffer;

namespace {

ScenarioSet make_set(const std::vector<std::tuple<double, double, double>>& rows) {
  std::vector<Scenario> out;
  out.reserve(rows.size());
  for (const auto& [da, rt, wind] : rows) out.push_back({da, rt, wind});
  return ScenarioSet(std::move(out));
}

std::string scenario_repr(const Scenario& s) {
  std::ostringstream out;
  out << "Scenario(lambda_da=" << s.lambda_da << ", lambda_rt=" << s.lambda_rt << ", p_max_wind=" << s.p_max_wind
      << ")";
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "CVaR day-ahead offer curves for a price-taking wind generator";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<SolverRefusal>(m, "SolverRefusal", PyExc_RuntimeError);
  py::register_exception<MissingDataError>(m, "MissingDataError", PyExc_LookupError);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<double, double, double>(), py::arg("lambda_da"), py::arg("lambda_rt"), py::arg("p_max_wind"))
      .def_readonly("lambda_da", &Scenario::lambda_da)
      .def_readonly("lambda_rt", &Scenario::lambda_rt)
      .def_readonly("p_max_wind", &Scenario::p_max_wind)
      .def("__eq__", [](const Scenario& a, const Scenario& b) { return a == b; })
      .def("__repr__", scenario_repr);

  py::class_<ScenarioSet>(m, "ScenarioSet")
      .def(py::init(&make_set), py::arg("rows"), "Rows of (lambda_da, lambda_rt, p_max_wind); sorted on construction.")
      .def("__len__", &ScenarioSet::size)
      .def("__getitem__",
           [](const ScenarioSet& s, std::size_t i) {
             if (i >= s.size()) throw py::index_error();
             return s[i];
           })
      .def("__iter__", [](const ScenarioSet& s) { return py::make_iterator(s.begin(), s.end()); },
           py::keep_alive<0, 1>())
      .def("to_list",
           [](const ScenarioSet& s) {
             std::vector<std::tuple<double, double, double>> rows;
             for (const auto& x : s) rows.emplace_back(x.lambda_da, x.lambda_rt, x.p_max_wind);
             return rows;
           })
      .def_property_readonly("weight", &ScenarioSet::weight)
      .def("max_wind", &ScenarioSet::max_wind)
      .def("has_negative_prices", &ScenarioSet::has_negative_prices)
      .def("with_clamped_prices", &ScenarioSet::with_clamped_prices);

  py::class_<GaussianSpec>(m, "GaussianSpec")
      .def(py::init<>())
      .def(py::init([](std::array<double, 3> mean, std::array<std::array<double, 3>, 3> cov) {
             return GaussianSpec{mean, cov};
           }),
           py::arg("mean"), py::arg("covariance"))
      .def_readwrite("mean", &GaussianSpec::mean)
      .def_readwrite("covariance", &GaussianSpec::covariance)
      .def("validate", &GaussianSpec::validate)
      .def_static("synthetic_case", &GaussianSpec::synthetic_case, py::arg("cov_rt_wind"));

  m.def("sample_gaussian", &sample_gaussian, py::arg("spec"), py::arg("n"), py::arg("seed"));
  m.def("load_scenarios_csv", &load_scenarios_csv, py::arg("path"));

  m.def("cvar", [](const std::vector<double>& x, double beta) { return cvar(x, RiskSpec(beta)); }, py::arg("profits"),
        py::arg("beta"));
  m.def("value_at_risk", [](const std::vector<double>& x, double beta) { return value_at_risk(x, RiskSpec(beta)); },
        py::arg("profits"), py::arg("beta"));
  m.def("active_samples",
        [](const std::vector<double>& x, double beta) { return active_samples(x, RiskSpec(beta)); },
        py::arg("profits"), py::arg("beta"));

  py::class_<Segment>(m, "Segment")
      .def(py::init<double, double>(), py::arg("price"), py::arg("quantity"))
      .def_readonly("price", &Segment::price)
      .def_readonly("quantity", &Segment::quantity)
      .def("__eq__", [](const Segment& a, const Segment& b) { return a == b; });

  py::class_<OfferCurve>(m, "OfferCurve")
      .def(py::init([](const std::vector<std::pair<double, double>>& segs) {
             std::vector<Segment> out;
             for (const auto& [p, q] : segs) out.push_back({p, q});
             return OfferCurve(std::move(out));
           }),
           py::arg("segments") = std::vector<std::pair<double, double>>{},
           "Segments as (price, quantity) pairs with nondecreasing prices.")
      .def_property_readonly("segments",
                             [](const OfferCurve& c) { return std::vector<Segment>(c.segments().begin(), c.segments().end()); })
      .def("total_quantity", &OfferCurve::total_quantity)
      .def("__len__", &OfferCurve::size)
      .def("__eq__", [](const OfferCurve& a, const OfferCurve& b) { return a == b; });

  py::class_<ClearingOutcome>(m, "ClearingOutcome")
      .def_readonly("indicator", &ClearingOutcome::indicator)
      .def_readonly("cleared_mw", &ClearingOutcome::cleared_mw)
      .def_readonly("shortfall_mw", &ClearingOutcome::shortfall_mw)
      .def_readonly("da_objective_profit", &ClearingOutcome::da_objective_profit);

  m.def("clear", &clear, py::arg("curve"), py::arg("lambda_da"));
  m.def("evaluate", &evaluate, py::arg("curve"), py::arg("scenario"));
  m.def("settle_realtime", &settle_realtime, py::arg("curve"), py::arg("actual_da"), py::arg("actual_rt"),
        py::arg("actual_wind"));
  m.def("postprocess", &postprocess, py::arg("curve"), py::arg("min_width_mw"));

  py::class_<SolveOptions>(m, "SolveOptions")
      .def(py::init([](std::size_t n_segments, double beta, double min_width, double budget, unsigned threads) {
             SolveOptions o;
             o.n_segments = n_segments;
             o.beta = beta;
             o.min_segment_width_mw = min_width;
             o.time_budget_s = budget;
             o.threads = threads;
             return o;
           }),
           py::arg("n_segments") = 6, py::arg("beta") = 0.0, py::arg("min_segment_width_mw") = 0.0,
           py::arg("time_budget_s") = 60.0, py::arg("threads") = 1)
      .def_readwrite("n_segments", &SolveOptions::n_segments)
      .def_readwrite("beta", &SolveOptions::beta)
      .def_readwrite("min_segment_width_mw", &SolveOptions::min_segment_width_mw)
      .def_readwrite("time_budget_s", &SolveOptions::time_budget_s)
      .def_readwrite("threads", &SolveOptions::threads);

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("curve", &SolveReport::curve)
      .def_property_readonly("breakpoints", [](const SolveReport& r) { return r.breakpoints.positions; })
      .def_readonly("beta", &SolveReport::beta)
      .def_readonly("objective", &SolveReport::objective)
      .def_readonly("per_scenario", &SolveReport::per_scenario)
      .def_readonly("tail_indices", &SolveReport::tail_indices)
      .def_readonly("nodes_explored", &SolveReport::nodes_explored)
      .def_readonly("proof", &SolveReport::proof)
      .def("to_json", [](const SolveReport& r) {
        std::ostringstream out;
        write_report_json(r, out);
        return out.str();
      });

  m.def("solve_exact", &solve_exact, py::arg("scenarios"), py::arg("options"),
        py::call_guard<py::gil_scoped_release>());
  m.def("solve_bruteforce", &solve_bruteforce, py::arg("scenarios"), py::arg("options"), py::arg("quantity_step"),
        py::call_guard<py::gil_scoped_release>());
  m.def("percentile_strategy", &percentile_strategy, py::arg("scenarios"), py::arg("percentile"));

  m.def(
      "export_miqp",
      [](const ScenarioSet& s, const SolveOptions& o, const std::string& path, double big_m, double epsilon,
         double l2_weight, bool include_redundant) {
        MiqpExportConfig cfg;
        cfg.big_m = big_m;
        cfg.epsilon = epsilon;
        cfg.l2_weight = l2_weight;
        cfg.include_redundant = include_redundant;
        const auto stats = export_miqp(s, o, cfg, path);
        py::dict d;
        d["binaries"] = stats.binaries;
        d["scenario_rowsum_rows"] = stats.scenario_rowsum_rows;
        d["price_order_rows"] = stats.price_order_rows;
        d["nesting_rows"] = stats.nesting_rows;
        d["indicator_rows"] = stats.indicator_upper_rows + stats.indicator_lower_rows;
        return d;
      },
      py::arg("scenarios"), py::arg("options"), py::arg("path"), py::arg("big_m") = 0.0, py::arg("epsilon") = 1e-4,
      py::arg("l2_weight") = 0.0, py::arg("include_redundant") = true);

  py::class_<BacktestRecord>(m, "BacktestRecord")
      .def_property_readonly("date", [](const BacktestRecord& r) { return format_date(r.date); })
      .def_readonly("hour", &BacktestRecord::hour)
      .def_readonly("actual_da", &BacktestRecord::actual_da)
      .def_readonly("actual_rt", &BacktestRecord::actual_rt)
      .def_readonly("actual_wind", &BacktestRecord::actual_wind)
      .def_readonly("cleared_mw", &BacktestRecord::cleared_mw)
      .def_readonly("profit", &BacktestRecord::profit)
      .def_readonly("ideal_profit", &BacktestRecord::ideal_profit)
      .def_readonly("regret", &BacktestRecord::regret);

  m.def("ideal_profit", &ideal_profit, py::arg("actual_da"), py::arg("actual_rt"), py::arg("actual_wind"));
  m.def(
      "run_hour",
      [](const OfferCurve& curve, const std::string& date, int hour, double da, double rt, double wind) {
        return run_hour(curve, parse_date(date), hour, da, rt, wind);
      },
      py::arg("curve"), py::arg("date"), py::arg("hour"), py::arg("actual_da"), py::arg("actual_rt"),
      py::arg("actual_wind"));
}
