#pragma once

// Report emission. Values are never rounded before this point; every function here
// formats from full-precision inputs.

#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gsdopt/config.hpp"
#include "gsdopt/design.hpp"
#include "gsdopt/optimizer.hpp"

namespace gsdopt {

struct Presentation {
  int probability_digits = 4;
  int size_digits = 1;
  int bound_digits = 4;
  int percent_digits = 1;

  /// Uses `digits` decimals everywhere.
  static Presentation uniform(int digits) { return {digits, digits, digits, digits}; }
};

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);  // "-0.0"
  return s;
}

inline std::string describe_family(const BoundaryFamily& f) {
  std::string s = family_name(f);
  if (const auto* hp = std::get_if<HaybittlePeto>(&f)) s += " (interim bound " + fixed(hp->interim_bound, 2) + ")";
  if (const auto* kd = std::get_if<KimDeMetsPower>(&f)) s += " (rho " + fixed(kd->rho, 3) + ")";
  if (const auto* h = std::get_if<HwangShihDeCani>(&f)) s += " (gamma " + fixed(h->gamma, 3) + ")";
  return s;
}

// ---------------------------------------------------------------------------
// Single-design reports

inline constexpr const char* kStageCsvHeader =
    "stage,rate,n,upper,lower,efficacy_h0,efficacy_mid,efficacy_h1,futility_h0,futility_mid,futility_h1";

/// One row per stage; columns are fixed by kStageCsvHeader.
inline std::string stage_csv(const DesignSpec& s, const OperatingCharacteristics& oc, const Presentation& p = {}) {
  std::ostringstream out;
  out << kStageCsvHeader << '\n';
  const bool fut = oc.boundaries.has_futility();
  for (std::size_t k = 0; k < s.rates.size(); ++k) {
    out << (k + 1) << ',' << fixed(s.rates[k], p.probability_digits) << ',' << fixed(oc.n_per_stage[k], p.size_digits)
        << ',' << fixed(oc.boundaries.upper[k], p.bound_digits) << ','
        << (fut ? fixed((*oc.boundaries.lower)[k], p.bound_digits) : std::string()) << ',';
    for (const auto* h : {&oc.h0, &oc.mid, &oc.h1}) out << fixed(h->efficacy[k], p.probability_digits) << ',';
    out << fixed(oc.h0.futility[k], p.probability_digits) << ',' << fixed(oc.mid.futility[k], p.probability_digits)
        << ',' << fixed(oc.h1.futility[k], p.probability_digits) << '\n';
  }
  return out.str();
}

inline std::string human_table(const DesignSpec& s, const OperatingCharacteristics& oc, const Presentation& p = {}) {
  std::ostringstream out;
  const bool two = s.sidedness() == Sidedness::TwoSidedSymmetric;
  out << s.stages << "-stage design, " << (two ? "two-sided" : "one-sided") << " alpha " << fixed(s.alpha, 4)
      << ", power " << fixed(1.0 - s.beta, 2) << ", boundary " << describe_family(s.boundary_rule.family);
  if (s.futility.mode != FutilityMode::None) {
    out << ", " << detail::futility_mode_name(s.futility.mode) << " futility ("
        << describe_family(*s.futility.spending) << " beta-spending)";
  }
  out << '\n';
  if (const auto* b = std::get_if<BinaryEndpoint>(&s.endpoint.kind)) {
    out << "Endpoint: binary, p_control " << fixed(b->p_control, 4) << ", p_treatment " << fixed(b->p_treatment, 4);
  } else {
    const auto& c = std::get<ContinuousEndpoint>(s.endpoint.kind);
    out << "Endpoint: continuous, delta* " << fixed(c.delta_star, 4) << ", sigma " << fixed(c.sigma, 4);
  }
  out << ", allocation " << fixed(s.endpoint.allocation_ratio, 2) << ":1\n";
  out << "Fixed-design size " << fixed(oc.n_fixed, p.size_digits) << ", drift " << fixed(oc.drift, 4) << "\n\n";

  char line[256];
  std::snprintf(line, sizeof line, "%-6s %-8s %-10s %-8s %-8s %-9s %-9s %-9s\n", "Stage", "Rate", "N", "Upper",
                "Lower", "Eff H0", "Eff H0/H1", "Eff H1");
  out << line;
  const bool fut = oc.boundaries.has_futility();
  for (std::size_t k = 0; k < s.rates.size(); ++k) {
    std::snprintf(line, sizeof line, "%-6zu %-8s %-10s %-8s %-8s %-9s %-9s %-9s\n", k + 1,
                  fixed(s.rates[k], 3).c_str(), fixed(oc.n_per_stage[k], p.size_digits).c_str(),
                  fixed(oc.boundaries.upper[k], p.bound_digits).c_str(),
                  fut ? fixed((*oc.boundaries.lower)[k], p.bound_digits).c_str() : "-",
                  fixed(oc.h0.efficacy[k], p.probability_digits).c_str(),
                  fixed(oc.mid.efficacy[k], p.probability_digits).c_str(),
                  fixed(oc.h1.efficacy[k], p.probability_digits).c_str());
    out << line;
  }
  if (fut) {
    out << "\nFutility stops:\n";
    for (std::size_t k = 0; k < s.rates.size(); ++k) {
      std::snprintf(line, sizeof line, "%-6zu %-9s %-9s %-9s\n", k + 1,
                    fixed(oc.h0.futility[k], p.probability_digits).c_str(),
                    fixed(oc.mid.futility[k], p.probability_digits).c_str(),
                    fixed(oc.h1.futility[k], p.probability_digits).c_str());
      out << line;
    }
  }
  out << '\n';
  std::snprintf(line, sizeof line, "%-10s %-10s %-10s %-10s\n", "MSS", "ESS(H0)", "ESS(H0/H1)", "ESS(H1)");
  out << line;
  std::snprintf(line, sizeof line, "%-10s %-10s %-10s %-10s\n", fixed(oc.n_max, p.size_digits).c_str(),
                fixed(oc.h0.ess, p.size_digits).c_str(), fixed(oc.mid.ess, p.size_digits).c_str(),
                fixed(oc.h1.ess, p.size_digits).c_str());
  out << line;
  std::snprintf(line, sizeof line, "%-10s %-10s %-10s %-10s\n", "MIF", "EIF(H0)", "EIF(H0/H1)", "EIF(H1)");
  out << line;
  std::snprintf(line, sizeof line, "%-10s %-10s %-10s %-10s\n", fixed(oc.mif, 4).c_str(),
                fixed(oc.h0.eif, 4).c_str(), fixed(oc.mid.eif, 4).c_str(), fixed(oc.h1.eif, 4).c_str());
  out << line;
  out << "Type I error " << fixed(oc.h0.rejection, 6) << ", power " << fixed(oc.h1.rejection, 6);
  if (fut) out << ", type I error ignoring futility " << fixed(oc.type_one_error_nonbinding, 6);
  out << '\n';
  for (const auto& w : oc.warnings) {
    out << "warning [" << w.code << "]" << (w.stage >= 0 ? " stage " + std::to_string(w.stage + 1) : "") << ": "
        << w.message << '\n';
  }
  return out.str();
}

namespace detail {

inline json hypothesis_json(const HypothesisReport& h) {
  json j;
  j["drift"] = h.drift;
  j["efficacy"] = h.efficacy;
  j["futility"] = h.futility;
  j["continuation"] = h.exits.continuation;
  j["rejection"] = h.rejection;
  j["ess"] = h.ess;
  j["eif"] = h.eif;
  j["normalization_error"] = h.exits.normalization_error;
  return j;
}

}  // namespace detail

/// Full nested report. The "design" block is a valid input document.
inline json report_json(const DesignSpec& s, const OperatingCharacteristics& oc) {
  json j;
  j["format_version"] = kReportFormatVersion;
  j["design"] = design_to_json(s);
  j["boundaries"]["upper"] = oc.boundaries.upper;
  j["boundaries"]["lower"] = oc.boundaries.lower ? json(*oc.boundaries.lower) : json(nullptr);
  j["drift"] = oc.drift;
  j["n_fixed"] = oc.n_fixed;
  j["n_max"] = oc.n_max;
  j["n_per_stage"] = oc.n_per_stage;
  j["mif"] = oc.mif;
  j["type_one_error_ignoring_futility"] = oc.type_one_error_nonbinding;
  for (const auto* h : {&oc.h0, &oc.mid, &oc.h1}) {
    j["hypotheses"][hypothesis_name(h->hypothesis)] = detail::hypothesis_json(*h);
  }
  j["warnings"] = json::array();
  for (const auto& w : oc.warnings) {
    j["warnings"].push_back({{"code", w.code}, {"message", w.message}, {"stage", w.stage >= 0 ? json(w.stage + 1) : json(nullptr)}});
  }
  return j;
}

inline json optimization_json(const OptimResult& r) {
  json j;
  j["rates"] = r.rates.vector();
  j["objective"] = r.objective;
  j["ess_h1"] = r.ess_h1;
  j["equal_spacing_objective"] = r.equal_spacing_objective;
  j["evaluations"] = r.evaluations;
  j["restarts"] = r.restarts_used;
  j["sweeps"] = r.sweeps;
  j["converged"] = r.converged;
  j["restart_log"] = json::array();
  for (const auto& rec : r.per_restart_log) {
    j["restart_log"].push_back({{"start", rec.start},
                                {"final", rec.final_rates},
                                {"objective", rec.objective},
                                {"evaluations", rec.evaluations},
                                {"converged", rec.converged}});
  }
  return j;
}

// ---------------------------------------------------------------------------
// Case-study layout: stagewise efficacy stops, then the sample-size summary.

struct CaseStudyColumn {
  std::string label;  // e.g. "Original"
  DesignSpec spec;
  OperatingCharacteristics oc;
};

inline std::string case_study_table(const std::string& title, const std::vector<CaseStudyColumn>& cols,
                                    const Presentation& p = {}) {
  std::ostringstream out;
  char line[512];
  out << title << "\n\nProbabilities of stopping for efficacy (information rates in brackets)\n";
  std::snprintf(line, sizeof line, "%-8s", "Stage");
  out << line;
  for (const auto& c : cols) {
    std::snprintf(line, sizeof line, " | %-18s %-8s %-8s", (c.label + " N (t)").c_str(), "H0", "H1");
    out << line;
  }
  out << '\n';
  std::size_t K = 0;
  for (const auto& c : cols) K = std::max(K, c.spec.rates.size());
  for (std::size_t k = 0; k < K; ++k) {
    std::snprintf(line, sizeof line, "%-8zu", k + 1);
    out << line;
    for (const auto& c : cols) {
      if (k >= c.spec.rates.size()) {
        std::snprintf(line, sizeof line, " | %-18s %-8s %-8s", "", "", "");
      } else {
        const std::string n = fixed(c.oc.n_per_stage[k], p.size_digits) + " (" + fixed(c.spec.rates[k], 3) + ")";
        std::snprintf(line, sizeof line, " | %-18s %-8s %-8s", n.c_str(),
                      fixed(c.oc.h0.efficacy[k], p.probability_digits).c_str(),
                      fixed(c.oc.h1.efficacy[k], p.probability_digits).c_str());
      }
      out << line;
    }
    out << '\n';
  }
  out << "\nMaximum and expected sample sizes\n";
  std::snprintf(line, sizeof line, "%-10s %-8s %-8s %-10s %-8s\n", "Timing", "MSS", "ESS H0", "ESS H0/H1", "ESS H1");
  out << line;
  for (const auto& c : cols) {
    std::snprintf(line, sizeof line, "%-10s %-8s %-8s %-10s %-8s\n", c.label.c_str(),
                  fixed(c.oc.n_max, p.size_digits).c_str(), fixed(c.oc.h0.ess, p.size_digits).c_str(),
                  fixed(c.oc.mid.ess, p.size_digits).c_str(), fixed(c.oc.h1.ess, p.size_digits).c_str());
    out << line;
  }
  return out.str();
}

inline std::string case_study_csv(const std::vector<CaseStudyColumn>& cols, const Presentation& p = {}) {
  std::ostringstream out;
  out << "timing,stage,rate,n,efficacy_h0,efficacy_mid,efficacy_h1,mss,ess_h0,ess_mid,ess_h1\n";
  for (const auto& c : cols) {
    for (std::size_t k = 0; k < c.spec.rates.size(); ++k) {
      out << c.label << ',' << (k + 1) << ',' << fixed(c.spec.rates[k], p.probability_digits) << ','
          << fixed(c.oc.n_per_stage[k], p.size_digits) << ',' << fixed(c.oc.h0.efficacy[k], p.probability_digits)
          << ',' << fixed(c.oc.mid.efficacy[k], p.probability_digits) << ','
          << fixed(c.oc.h1.efficacy[k], p.probability_digits) << ',' << fixed(c.oc.n_max, p.size_digits) << ','
          << fixed(c.oc.h0.ess, p.size_digits) << ',' << fixed(c.oc.mid.ess, p.size_digits) << ','
          << fixed(c.oc.h1.ess, p.size_digits) << '\n';
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Reference tables: optimal rates per (beta, K) and the long-format figure data.

struct TableCell {
  double beta = 0.1;
  int stages = 1;
  std::optional<OptimResult> optimum;
  std::optional<OperatingCharacteristics> optimal, equal;
  std::string error;  // set when a solver failed for this cell
};

/// Rates in percent, one decimal, one row per K within each beta block.
inline std::string rate_table(const std::string& title, const std::vector<TableCell>& cells, const Presentation& p = {}) {
  std::ostringstream out;
  int kmax = 1;
  for (const auto& c : cells) kmax = std::max(kmax, c.stages);
  char buf[64];
  out << title << '\n';
  std::snprintf(buf, sizeof buf, "%-10s %-6s", "", "Stage");
  out << buf;
  static const char* ord[] = {"1st", "2nd", "3rd", "4th", "5th", "6th", "7th", "8th", "9th", "10th",
                              "11th", "12th", "13th", "14th", "15th", "16th", "17th", "18th", "19th", "20th"};
  for (int k = 0; k < kmax; ++k) {
    std::snprintf(buf, sizeof buf, " %6s", ord[k]);
    out << buf;
  }
  out << '\n';
  double last_beta = -1.0;
  for (const auto& c : cells) {
    const std::string label = c.beta != last_beta ? "beta=" + fixed(c.beta, 1) : "";
    last_beta = c.beta;
    std::snprintf(buf, sizeof buf, "%-10s %-6d", label.c_str(), c.stages);
    out << buf;
    if (!c.optimum) {
      out << "  failed: " << c.error << '\n';
      continue;
    }
    for (std::size_t k = 0; k < c.optimum->rates.size(); ++k) {
      std::snprintf(buf, sizeof buf, " %6s", fixed(100.0 * c.optimum->rates[k], p.percent_digits).c_str());
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

inline constexpr const char* kFigureCsvHeader = "family,beta,stages,schedule,metric,value";

/// Long-format MIF/EIF data behind the operating-characteristic figures.
inline std::string figure_csv(const std::string& family, const std::vector<TableCell>& cells, bool header = true) {
  std::ostringstream out;
  if (header) out << kFigureCsvHeader << '\n';
  for (const auto& c : cells) {
    for (const auto& [kind, oc] : {std::pair{"optimal", &c.optimal}, std::pair{"equal", &c.equal}}) {
      if (!*oc) continue;
      const auto& o = **oc;
      const std::pair<const char*, double> metrics[] = {
          {"MIF", o.mif}, {"EIF_H0", o.h0.eif}, {"EIF_H0/H1", o.mid.eif}, {"EIF_H1", o.h1.eif}};
      for (const auto& [m, v] : metrics) {
        out << family << ',' << fixed(c.beta, 2) << ',' << c.stages << ',' << kind << ',' << m << ','
            << fixed(v, 6) << '\n';
      }
    }
  }
  return out.str();
}

inline std::string rates_csv(const std::string& family, const std::vector<TableCell>& cells, bool header = true) {
  std::ostringstream out;
  if (header) out << "family,beta,stages,analysis,rate_percent\n";
  for (const auto& c : cells) {
    if (!c.optimum) continue;
    for (std::size_t k = 0; k < c.optimum->rates.size(); ++k) {
      out << family << ',' << fixed(c.beta, 2) << ',' << c.stages << ',' << (k + 1) << ','
          << fixed(100.0 * c.optimum->rates[k], 1) << '\n';
    }
  }
  return out.str();
}

}  // namespace gsdopt
