#pragma once

// Command implementations behind the gsdopt executable. Each command returns the
// process exit code: 0 success, 2 invalid configuration, 3 solver failure.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gsdopt/gsdopt.hpp"
#include "presets.hpp"

namespace gsdopt::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

inline constexpr const char* kOutDirEnv = "GSDOPT_OUT_DIR";

struct Formats {
  bool table = false, csv = false, json = false;
};

struct Options {
  std::string input;
  std::string out_dir;
  std::string formats = "table";
  std::optional<int> precision;
  // design overrides
  std::optional<double> beta;
  std::optional<std::string> family;
  std::optional<std::string> futility;
  std::optional<std::string> futility_family;
  // tables
  std::vector<std::string> families{"haybittle-peto", "pocock", "obrien-fleming"};
  std::vector<double> betas{0.1, 0.2};
  int max_stages = 9;
  unsigned jobs = 0;
  // case study
  std::string case_name;
  std::string variant = "both";
  // verify
  std::uint64_t paths = 1'000'000;
  std::uint64_t seed = SimConfig{}.seed;
  bool quiet = false;
};

inline Formats parse_formats(const std::string& list) {
  Formats f;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "table") {
      f.table = true;
    } else if (item == "csv") {
      f.csv = true;
    } else if (item == "json") {
      f.json = true;
    } else {
      throw SchemaError("--format", "unknown format '" + item + "', expected csv, json or table");
    }
  }
  if (!f.table && !f.csv && !f.json) throw SchemaError("--format", "at least one format is required");
  return f;
}

inline Presentation presentation(const Options& o) {
  return o.precision ? Presentation::uniform(*o.precision) : Presentation{};
}

inline std::filesystem::path out_dir(const Options& o) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "gsdopt-output";
}

inline void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw Error("cannot write " + (dir / name).string());
  out << content;
}

inline BoundaryFamily family_from_name(const std::string& name, const std::string& field) {
  if (name == "hp" || name == "haybittle-peto") return HaybittlePeto{};
  if (name == "pocock") return PocockSpending{};
  if (name == "obf" || name == "obrien-fleming") return OBrienFlemingSpending{};
  throw SchemaError(field, "unknown family '" + name + "', expected haybittle-peto, pocock or obrien-fleming");
}

// Beta-spending family used when futility is switched on from the command line.
inline BoundaryFamily default_futility_family(const BoundaryFamily& efficacy) {
  return is_spending_family(efficacy) ? efficacy : BoundaryFamily{OBrienFlemingSpending{}};
}

inline void apply_overrides(DesignSpec& s, const Options& o) {
  if (o.beta) s.beta = *o.beta;
  if (o.family) s.boundary_rule.family = family_from_name(*o.family, "--family");
  if (o.futility) {
    FutilityMode m;
    try {
      m = parse_futility_mode(*o.futility);
    } catch (const SchemaError&) {
      throw SchemaError("--futility", "expected none, binding or nonbinding");
    }
    s.futility.mode = m;
    if (m == FutilityMode::None) {
      s.futility.spending.reset();
    } else if (o.futility_family) {
      s.futility.spending = family_from_name(*o.futility_family, "--futility-family");
    } else if (!s.futility.spending) {
      s.futility.spending = default_futility_family(s.boundary_rule.family);
    }
  }
  try {
    validate(s);
  } catch (const DomainError& e) {
    throw SchemaError("(overrides)", e.what());
  }
}

inline DesignSpec load_input(const Options& o) {
  if (o.input.empty()) throw SchemaError("--input", "a configuration document is required");
  DesignSpec s = load_design_file(o.input);
  apply_overrides(s, o);
  return s;
}

inline const char* error_kind(const Error& e) {
  if (dynamic_cast<const GridResolutionError*>(&e)) return "grid-resolution";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "convergence";
  if (dynamic_cast<const InfeasibleDesignError*>(&e)) return "infeasible-design";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  return "error";
}

/// Runs a command body, mapping errors onto exit codes and diagnostics.
template <class F>
int guarded(F&& body, std::ostream& err) {
  try {
    return body();
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "error [" << error_kind(e) << "]: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error [io]: " << e.what() << '\n';
    return kExitSolver;
  }
}

// ---------------------------------------------------------------------------

inline int run_design(const Options& o, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        const Formats f = parse_formats(o.formats);
        const DesignSpec s = load_input(o);
        const OperatingCharacteristics oc = characterize(s);
        const Presentation p = presentation(o);
        const auto dir = out_dir(o);
        if (f.table) {
          const std::string t = human_table(s, oc, p);
          out << t;
          write_file(dir, "design.txt", t);
        }
        if (f.csv) write_file(dir, "design.csv", stage_csv(s, oc, p));
        if (f.json) write_file(dir, "design.json", report_json(s, oc).dump(2) + "\n");
        return kExitOk;
      },
      err);
}

inline int run_optimize(const Options& o, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        const Formats f = parse_formats(o.formats);
        const DesignSpec s = load_input(o);
        const OptimResult r = optimize_rates(s);
        const DesignSpec best = s.with_rates(r.rates);
        const OperatingCharacteristics oc = characterize(best);
        const OperatingCharacteristics eq = characterize(s.with_rates(InformationRates::equally_spaced(s.stages)));
        const Presentation p = presentation(o);
        const auto dir = out_dir(o);
        if (f.table) {
          std::ostringstream t;
          t << "Optimal information rates (%):";
          for (double v : r.rates.values()) t << ' ' << fixed(100.0 * v, p.percent_digits);
          t << "\nESS under H1: " << fixed(oc.h1.ess, p.size_digits) << " optimal, "
            << fixed(eq.h1.ess, p.size_digits) << " equally spaced (" << r.evaluations << " evaluations, "
            << r.restarts_used << " restarts, " << (r.converged ? "converged" : "NOT converged") << ")\n\n";
          t << human_table(best, oc, p);
          out << t.str();
          write_file(dir, "optimize.txt", t.str());
        }
        if (f.csv) write_file(dir, "optimize.csv", stage_csv(best, oc, p));
        if (f.json) {
          json j = report_json(best, oc);
          j["optimization"] = optimization_json(r);
          j["equal_spacing"] = report_json(s.with_rates(InformationRates::equally_spaced(s.stages)), eq);
          write_file(dir, "optimize.json", j.dump(2) + "\n");
        }
        return kExitOk;
      },
      err);
}

// ---------------------------------------------------------------------------

/// Base specification for the reference tables: one-sided 0.025, continuous endpoint.
/// The optimal rates do not depend on the effect size.
inline DesignSpec table_spec(const BoundaryFamily& family, double beta, int stages, FutilityMode futility) {
  DesignSpec s;
  s.stages = stages;
  s.alpha = 0.025;
  s.beta = beta;
  s.boundary_rule = {family, Sidedness::OneSided};
  if (futility != FutilityMode::None) s.futility = {futility, default_futility_family(family)};
  s.endpoint.kind = ContinuousEndpoint{0.5, 1.0};
  s.rates = InformationRates::equally_spaced(stages);
  return s;
}

inline TableCell compute_cell(const DesignSpec& s) {
  TableCell c;
  c.beta = s.beta;
  c.stages = s.stages;
  try {
    c.optimum = optimize_rates(s);
    c.optimal = characterize(s.with_rates(c.optimum->rates));
    c.equal = characterize(s);
  } catch (const Error& e) {
    c.error = std::string(error_kind(e)) + ": " + e.what();
  }
  return c;
}

inline int run_tables(const Options& o, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        const Formats f = parse_formats(o.formats);
        if (o.max_stages < 1 || o.max_stages > 20) throw SchemaError("--max-stages", "expected 1 to 20");
        FutilityMode fut = FutilityMode::None;
        if (o.futility) {
          try {
            fut = parse_futility_mode(*o.futility);
          } catch (const SchemaError&) {
            throw SchemaError("--futility", "expected none, binding or nonbinding");
          }
        }
        std::vector<std::pair<std::string, BoundaryFamily>> families;
        for (const auto& name : o.families) {
          const BoundaryFamily fam = family_from_name(name, "--family");
          families.emplace_back(family_name(fam), fam);
        }
        for (double b : o.betas) {
          if (!(b > 0.0 && b < 0.975)) throw SchemaError("--beta", "expected a value in (0, 0.975)");
        }

        std::vector<DesignSpec> specs;
        std::vector<std::size_t> owner;
        for (std::size_t fi = 0; fi < families.size(); ++fi) {
          for (double b : o.betas) {
            for (int k = 1; k <= o.max_stages; ++k) {
              specs.push_back(table_spec(families[fi].second, b, k, fut));
              owner.push_back(fi);
            }
          }
        }
        std::vector<TableCell> cells(specs.size());
        std::atomic<std::size_t> next{0};
        std::mutex log;
        auto worker = [&] {
          for (std::size_t i = next++; i < specs.size(); i = next++) {
            const auto t0 = std::chrono::steady_clock::now();
            cells[i] = compute_cell(specs[i]);
            const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (!o.quiet) {
              std::lock_guard lock(log);
              err << "[" << families[owner[i]].first << " beta=" << fixed(specs[i].beta, 2) << " K=" << specs[i].stages
                  << "] " << (cells[i].error.empty() ? "ok" : cells[i].error) << " (" << fixed(sec, 1) << " s)\n";
            }
          }
        };
        unsigned jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
        jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, specs.size()));
        if (jobs <= 1) {
          worker();
        } else {
          std::vector<std::thread> pool;
          for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
          for (auto& t : pool) t.join();
        }

        const Presentation p = presentation(o);
        std::string text, rates, figures;
        json j = json::array();
        for (std::size_t fi = 0; fi < families.size(); ++fi) {
          std::vector<TableCell> mine;
          for (std::size_t i = 0; i < cells.size(); ++i) {
            if (owner[i] == fi) mine.push_back(cells[i]);
          }
          const std::string& name = families[fi].first;
          text += rate_table("Information rates (%) for the optimal " + name + " design, one-sided alpha 0.025" +
                                 (fut != FutilityMode::None ? " with " + std::string(detail::futility_mode_name(fut)) +
                                                                  " futility"
                                                            : ""),
                             mine, p) +
                  "\n";
          rates += rates_csv(name, mine, fi == 0);
          figures += figure_csv(name, mine, fi == 0);
          for (const auto& c : mine) {
            json cj;
            cj["family"] = name;
            cj["beta"] = c.beta;
            cj["stages"] = c.stages;
            if (c.optimum) {
              cj["optimization"] = optimization_json(*c.optimum);
              cj["optimal"] = report_json(table_spec(families[fi].second, c.beta, c.stages, fut).with_rates(c.optimum->rates),
                                          *c.optimal);
              cj["equal_spacing"] = report_json(table_spec(families[fi].second, c.beta, c.stages, fut), *c.equal);
            } else {
              cj["error"] = c.error;
            }
            j.push_back(cj);
          }
        }
        const auto dir = out_dir(o);
        if (f.table) {
          out << text;
          write_file(dir, "tables.txt", text);
        }
        if (f.csv) {
          write_file(dir, "rates.csv", rates);
          write_file(dir, "figures.csv", figures);
        }
        if (f.json) write_file(dir, "tables.json", j.dump(2) + "\n");
        bool any_failed = false;
        for (const auto& c : cells) any_failed = any_failed || !c.optimum;
        return any_failed ? kExitSolver : kExitOk;
      },
      err);
}

// ---------------------------------------------------------------------------

inline DesignSpec preset(const std::string& name) {
  if (name == "hypress") return parse_design_text(presets::hypress);
  if (name == "adrenal") return parse_design_text(presets::adrenal);
  throw SchemaError("case-study", "unknown case study '" + name + "', expected hypress or adrenal");
}

inline std::string preset_title(const std::string& name) {
  const json j = json::parse(name == "hypress" ? presets::hypress : presets::adrenal);
  return j.value("name", name);
}

inline int run_case_study(const Options& o, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        const Formats f = parse_formats(o.formats);
        DesignSpec s = preset(o.case_name);
        apply_overrides(s, o);
        if (o.variant != "original" && o.variant != "optimal" && o.variant != "both") {
          throw SchemaError("--variant", "expected original, optimal or both");
        }
        std::vector<CaseStudyColumn> cols;
        if (o.variant != "optimal") cols.push_back({"Original", s, characterize(s)});
        std::optional<OptimResult> r;
        if (o.variant != "original") {
          r = optimize_rates(s);
          const DesignSpec best = s.with_rates(r->rates);
          cols.push_back({"Optimal", best, characterize(best)});
        }
        const Presentation p = presentation(o);
        const auto dir = out_dir(o);
        const std::string stem = o.case_name + (o.variant == "both" ? "" : "_" + o.variant);
        if (f.table) {
          const std::string t = case_study_table(preset_title(o.case_name), cols, p);
          out << t;
          write_file(dir, stem + ".txt", t);
        }
        if (f.csv) write_file(dir, stem + ".csv", case_study_csv(cols, p));
        if (f.json) {
          json j;
          j["case_study"] = o.case_name;
          for (const auto& c : cols) j[c.label == "Original" ? "original" : "optimal"] = report_json(c.spec, c.oc);
          if (r) j["optimization"] = optimization_json(*r);
          write_file(dir, stem + ".json", j.dump(2) + "\n");
        }
        return kExitOk;
      },
      err);
}

// ---------------------------------------------------------------------------

struct VerifyRow {
  std::string hypothesis, quantity;
  int stage = 0;  // 0 for whole-design quantities
  double analytic = 0.0, estimate = 0.0, se = 0.0;
  bool agrees = false;
};

/// Analytic exit probabilities and expected sample sizes against Monte Carlo.
inline std::vector<VerifyRow> verify_design(const DesignSpec& s, const SimConfig& cfg) {
  const DesignSolution sol = solve_design(s);
  const SampleSizes sizes = sample_sizes(s, sol.drift, s.rates);
  const double n = static_cast<double>(cfg.paths);
  const bool two = s.sidedness() == Sidedness::TwoSidedSymmetric;
  std::vector<VerifyRow> rows;
  for (Hypothesis h : {Hypothesis::H0, Hypothesis::Mid, Hypothesis::H1}) {
    const std::string name = hypothesis_name(h);
    const StageDistribution dist{s.rates, detail::effect_fraction(h) * sol.drift};
    const StageProbabilities an = propagate(dist, sol.bounds, s.sidedness());
    const McStageProbabilities mc = mc_exit_probabilities(dist, sol.bounds, s.sidedness(), cfg, sizes.n_per_stage);
    for (std::size_t k = 0; k < s.rates.size(); ++k) {
      auto add = [&](const char* q, double a, double e) {
        rows.push_back({name, q, static_cast<int>(k + 1), a, e, std::sqrt(std::max(e * (1.0 - e), 0.0) / n),
                        within_se(a, e, n)});
      };
      add("upper", an.upper[k], mc.upper[k]);
      if (two || sol.bounds.has_futility()) add(two ? "lower" : "futility", an.lower[k], mc.lower[k]);
    }
    const double ess = s.rates.size() == 1 ? sizes.n_max : expected_sample_size(an, sizes.n_per_stage);
    const double tol = std::max(3.0 * mc.se_ess, 1e-9 * sizes.n_max);
    rows.push_back({name, "ess", 0, ess, mc.ess, mc.se_ess, std::abs(ess - mc.ess) <= tol});
  }
  return rows;
}

inline int run_verify(const Options& o, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        const Formats f = parse_formats(o.formats);
        const DesignSpec s = load_input(o);
        if (o.paths == 0) throw SchemaError("--paths", "must be positive");
        SimConfig cfg;
        cfg.paths = o.paths;
        cfg.seed = o.seed;
        const auto rows = verify_design(s, cfg);
        int ok = 0;
        for (const auto& r : rows) ok += r.agrees;
        std::ostringstream t, c;
        char line[256];
        std::snprintf(line, sizeof line, "%-7s %-6s %-9s %-12s %-12s %-10s %s\n", "Hyp", "Stage", "Quantity",
                      "Analytic", "Monte Carlo", "SE", "Within 3 SE");
        t << "Monte Carlo check with " << o.paths << " paths, seed " << o.seed << "\n" << line;
        c << "hypothesis,stage,quantity,analytic,monte_carlo,se,agrees\n";
        for (const auto& r : rows) {
          const int d = r.quantity == "ess" ? 3 : 6;
          std::snprintf(line, sizeof line, "%-7s %-6s %-9s %-12s %-12s %-10s %s\n", r.hypothesis.c_str(),
                        r.stage ? std::to_string(r.stage).c_str() : "-", r.quantity.c_str(),
                        fixed(r.analytic, d).c_str(), fixed(r.estimate, d).c_str(), fixed(r.se, d + 1).c_str(),
                        r.agrees ? "yes" : "NO");
          t << line;
          c << r.hypothesis << ',' << r.stage << ',' << r.quantity << ',' << fixed(r.analytic, 10) << ','
            << fixed(r.estimate, 10) << ',' << fixed(r.se, 10) << ',' << (r.agrees ? 1 : 0) << '\n';
        }
        t << ok << " of " << rows.size() << " quantities within 3 standard errors\n";
        const auto dir = out_dir(o);
        if (f.table) {
          out << t.str();
          write_file(dir, "verify.txt", t.str());
        }
        if (f.csv) write_file(dir, "verify.csv", c.str());
        if (f.json) {
          json j;
          j["design"] = design_to_json(s);
          j["paths"] = o.paths;
          j["seed"] = o.seed;
          j["rows"] = json::array();
          for (const auto& r : rows) {
            j["rows"].push_back({{"hypothesis", r.hypothesis},
                                 {"stage", r.stage},
                                 {"quantity", r.quantity},
                                 {"analytic", r.analytic},
                                 {"monte_carlo", r.estimate},
                                 {"se", r.se},
                                 {"agrees", r.agrees}});
          }
          write_file(dir, "verify.json", j.dump(2) + "\n");
        }
        return kExitOk;
      },
      err);
}

}  // namespace gsdopt::app
