#include "windoffer/miqp_export.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

#include "windoffer/csv.hpp"
#include "windoffer/errors.hpp"

namespace windoffer {
namespace {

using Term = std::pair<double, std::string>;

std::string u_name(std::size_t w, std::size_t i) { return "u_w" + std::to_string(w) + "_s" + std::to_string(i); }
std::string w_name(std::size_t w, std::size_t i) { return "w_w" + std::to_string(w) + "_s" + std::to_string(i); }
std::string p_name(std::size_t i) { return "p_s" + std::to_string(i); }
std::string lam_name(std::size_t i) { return "lam_s" + std::to_string(i); }
std::string d_name(std::size_t w) { return "d_w" + std::to_string(w); }
std::string s_name(std::size_t w) { return "s_w" + std::to_string(w); }

void write_terms(std::ostream& out, const std::vector<Term>& terms) {
  bool first = true;
  for (const auto& [coef, var] : terms) {
    if (coef == 0.0) continue;
    out << (coef < 0.0 ? " - " : (first ? " " : " + "));
    const double mag = std::abs(coef);
    if (mag != 1.0) out << csv::format_double(mag) << ' ';
    out << var;
    first = false;
  }
  if (first) out << " 0 " << terms.front().second;
}

void row(std::ostream& out, const std::string& name, const std::vector<Term>& terms, const char* op, double rhs) {
  out << ' ' << name << ':';
  write_terms(out, terms);
  out << ' ' << op << ' ' << csv::format_double(rhs) << '\n';
}

}  // namespace

MiqpExportConfig MiqpExportConfig::resolved(const ScenarioSet& scenarios) const {
  MiqpExportConfig out = *this;
  double max_abs = 0.0;
  double min_da = scenarios[0].lambda_da;
  for (const auto& s : scenarios) {
    max_abs = std::max(max_abs, std::abs(s.lambda_da));
    min_da = std::min(min_da, s.lambda_da);
  }
  if (out.big_m == 0.0) out.big_m = 2.0 * (max_abs + 1.0);
  const double widest_gap = scenarios.max_lambda_da() + 1.0 - min_da;
  if (!(out.big_m > widest_gap)) {
    throw ValidationError("big_m must exceed the largest offer/market price gap " + csv::format_double(widest_gap));
  }
  if (!(out.epsilon > 0.0 && out.epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
  if (!(out.l2_weight >= 0.0)) throw ValidationError("l2_weight must be >= 0");
  return out;
}

MiqpModelStats write_miqp(const ScenarioSet& scenarios, const SolveOptions& opts, const MiqpExportConfig& config,
                          std::ostream& out) {
  opts.validate();
  const auto cfg = config.resolved(scenarios);
  const std::size_t n = scenarios.size();
  const std::size_t segs = opts.n_segments;
  const double cap = quantity_cap(scenarios);
  // McCormick bound for w = u * p; p never exceeds the cap.
  const double power_m = std::max(cap, 1.0);
  const double tail_weight = 1.0 / RiskSpec{opts.beta}.tail_count(n);

  MiqpModelStats stats;
  stats.scenarios = n;
  stats.segments = segs;

  out << "\\ CVaR day-ahead offer curve, " << n << " scenarios, " << segs << " segments, beta "
      << csv::format_double(opts.beta) << '\n';
  out << "\\ big_m " << csv::format_double(cfg.big_m) << ", epsilon " << csv::format_double(cfg.epsilon)
      << ", power bound " << csv::format_double(power_m) << '\n';

  out << "Maximize\n obj:";
  std::vector<Term> objective{{1.0, "alpha"}};
  for (std::size_t w = 0; w < n; ++w) objective.emplace_back(-tail_weight, s_name(w));
  write_terms(out, objective);
  if (cfg.l2_weight > 0.0) {
    out << " + [";
    const std::string coef = csv::format_double(2.0 * cfg.l2_weight);
    for (std::size_t i = 0; i < segs; ++i) {
      out << " - " << coef << ' ' << lam_name(i) << " ^ 2 - " << coef << ' ' << p_name(i) << " ^ 2";
    }
    out << " ] / 2";
  }
  out << "\nSubject To\n";

  for (std::size_t w = 0; w < n; ++w) {
    const auto& s = scenarios[w];
    std::vector<Term> cvar_terms{{1.0, s_name(w)}, {-1.0, "alpha"}};
    std::vector<Term> short_terms{{1.0, d_name(w)}};
    for (std::size_t i = 0; i < segs; ++i) {
      cvar_terms.emplace_back(s.lambda_da, w_name(w, i));
      short_terms.emplace_back(1.0, w_name(w, i));
    }
    cvar_terms.emplace_back(s.lambda_rt, d_name(w));
    row(out, "cvar_w" + std::to_string(w), cvar_terms, ">=", 0.0);
    ++stats.cvar_rows;
    row(out, "short_w" + std::to_string(w), short_terms, "<=", s.p_max_wind);
    ++stats.shortfall_rows;
  }

  for (std::size_t w = 0; w < n; ++w) {
    for (std::size_t i = 0; i < segs; ++i) {
      const std::string tag = "_w" + std::to_string(w) + "_s" + std::to_string(i);
      row(out, "lin_p" + tag, {{1.0, w_name(w, i)}, {-1.0, p_name(i)}}, "<=", 0.0);
      row(out, "lin_u" + tag, {{1.0, w_name(w, i)}, {-power_m, u_name(w, i)}}, "<=", 0.0);
      row(out, "lin_lb" + tag, {{1.0, w_name(w, i)}, {-1.0, p_name(i)}, {-power_m, u_name(w, i)}}, ">=", -power_m);
      stats.linearization_rows += 3;
    }
  }

  for (std::size_t w = 0; w < n; ++w) {
    const double da = scenarios[w].lambda_da;
    for (std::size_t i = 0; i < segs; ++i) {
      const std::string tag = "_w" + std::to_string(w) + "_s" + std::to_string(i);
      // u <= 1 - (lam - da) / M
      row(out, "ind_hi" + tag, {{1.0, lam_name(i)}, {cfg.big_m, u_name(w, i)}}, "<=", cfg.big_m + da);
      // u >= eps + (da - lam) / M
      row(out, "ind_lo" + tag, {{1.0, lam_name(i)}, {cfg.big_m, u_name(w, i)}}, ">=", cfg.big_m * cfg.epsilon + da);
      ++stats.indicator_upper_rows;
      ++stats.indicator_lower_rows;
    }
  }

  if (cfg.include_redundant) {
    for (std::size_t w = 0; w + 1 < n; ++w) {
      std::vector<Term> terms;
      for (std::size_t i = 0; i < segs; ++i) terms.emplace_back(1.0, u_name(w, i));
      for (std::size_t i = 0; i < segs; ++i) terms.emplace_back(-1.0, u_name(w + 1, i));
      row(out, "rowsum_w" + std::to_string(w), terms, "<=", 0.0);
      ++stats.scenario_rowsum_rows;
    }
    for (std::size_t i = 0; i + 1 < segs; ++i) {
      row(out, "order_s" + std::to_string(i), {{1.0, lam_name(i)}, {-1.0, lam_name(i + 1)}}, "<=", 0.0);
      ++stats.price_order_rows;
    }
    for (std::size_t w = 0; w < n; ++w) {
      for (std::size_t i = 0; i + 1 < segs; ++i) {
        row(out, "nest_w" + std::to_string(w) + "_s" + std::to_string(i), {{1.0, u_name(w, i + 1)}, {-1.0, u_name(w, i)}},
            "<=", 0.0);
        ++stats.nesting_rows;
      }
    }
  }

  std::vector<Term> cap_terms;
  for (std::size_t i = 0; i < segs; ++i) cap_terms.emplace_back(1.0, p_name(i));
  row(out, "cap", cap_terms, "<=", cap);
  ++stats.cap_rows;

  out << "Bounds\n alpha free\n";
  for (std::size_t i = 0; i < segs; ++i) out << ' ' << lam_name(i) << " free\n";
  for (std::size_t w = 0; w < n; ++w) out << " -inf <= " << d_name(w) << " <= 0\n";
  out << "Binaries\n";
  for (std::size_t w = 0; w < n; ++w)
    for (std::size_t i = 0; i < segs; ++i) out << ' ' << u_name(w, i) << '\n';
  out << "End\n";

  stats.binaries = n * segs;
  stats.continuous = 2 * segs + n * segs + n + 1 + n;
  return stats;
}

MiqpModelStats export_miqp(const ScenarioSet& scenarios, const SolveOptions& opts, const MiqpExportConfig& config,
                           const std::string& path) {
  std::ostringstream buffer;
  const auto stats = write_miqp(scenarios, opts, config, buffer);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write model file '" + path + "'");
  out << buffer.str();
  if (!out) throw ValidationError("failed writing model file '" + path + "'");
  return stats;
}

}  // namespace windoffer
