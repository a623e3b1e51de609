#pragma once

// Expected-sample-size minimization over the timing of interim analyses.
//
// With the boundary rule fixed, the schedule t_1 < ... < t_{K-1} < 1 determines the
// boundaries and the H1 drift theta, and
//
//   E[N | H1] = N_0 / (z_a + z_b)^2 * theta^2 (1 + sum_{k>=2} (t_k - t_{k-1}) / t_1 * P(reach k | H1)),
//
// so the minimizer does not depend on the standardized effect. The schedule is
// searched in an unconstrained stick-breaking parameterization with multi-start
// Nelder-Mead.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gsdopt/design.hpp"
#include "gsdopt/error.hpp"
#include "gsdopt/gauss.hpp"
#include "gsdopt/rates.hpp"

namespace gsdopt {

namespace detail {

inline constexpr double kIncrementFloor = 1e-3;

inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

inline double softplus_inverse(double y) {
  return y > 30.0 ? y + std::log1p(-std::exp(-y)) : std::log(std::expm1(y));
}

}  // namespace detail

/// Maps any finite vector to strictly increasing fractions in (0, 1).
///
/// Each coordinate sets one positive increment softplus(x_i) + c; a final reserved
/// increment softplus(0) + c keeps the last fraction below 1. The zero vector
/// decodes to equal spacing.
inline std::vector<double> decode(std::span<const double> x) {
  const std::size_t m = x.size();
  std::vector<double> d(m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(x[i])) throw DomainError("decode: coordinates must be finite");
    d[i] = detail::softplus(x[i]) + detail::kIncrementFloor;
  }
  d[m] = detail::softplus(0.0) + detail::kIncrementFloor;
  double total = 0.0;
  for (double v : d) total += v;
  std::vector<double> t(m);
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    acc += d[i];
    t[i] = acc / total;
  }
  return t;
}

/// Inverse of decode for strictly increasing fractions in (0, 1).
inline std::vector<double> encode(std::span<const double> t) {
  const std::size_t m = t.size();
  double prev = 0.0;
  for (double v : t) {
    if (!(v > prev) || !(v < 1.0)) {
      throw DomainError("encode: fractions must be strictly increasing inside (0, 1)");
    }
    prev = v;
  }
  if (m == 0) return {};
  const double last_gap = 1.0 - t[m - 1];
  const double d_last = detail::softplus(0.0) + detail::kIncrementFloor;
  std::vector<double> x(m);
  prev = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double y = d_last * (t[i] - prev) / last_gap - detail::kIncrementFloor;
    if (!(y > 0.0)) throw DomainError("encode: increment too small to represent");
    x[i] = detail::softplus_inverse(y);
    prev = t[i];
  }
  return x;
}

/// Scale-free expected sample size under H1,
/// theta^2 (1 + sum_{k>=2} (t_k - t_{k-1}) / t_1 P(reach k | H1)).
///
/// `interim` holds t_1..t_{K-1}; the stage count comes from its length. Returns +inf
/// when the candidate is invalid or a solver fails, so a simplex step retreats.
inline double objective(const DesignSpec& spec, std::span<const double> interim,
                        const QuadratureOptions& opts = {}) {
  if (interim.empty()) {
    const double zsum = spec.z_alpha() + spec.z_beta();
    return zsum * zsum;
  }
  try {
    const InformationRates rates = InformationRates::from_interims(interim);
    const DesignSpec s = spec.with_rates(rates);
    const DesignSolution sol = solve_design(s, opts);
    const StageProbabilities p = propagate({rates, sol.drift}, sol.bounds, s.sidedness(), opts);
    double sum = 0.0, prev = 0.0;
    for (std::size_t k = 0; k < rates.size(); ++k) {
      sum += (rates[k] - prev) * p.reach(k);
      prev = rates[k];
    }
    return sol.drift * sol.drift / rates.front() * sum;
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

/// Expected sample size under H1 in subjects for a scale-free objective value.
inline double objective_to_subjects(const DesignSpec& spec, double value) {
  const double zsum = spec.z_alpha() + spec.z_beta();
  return fixed_sample_size(spec) * value / (zsum * zsum);
}

struct NelderMeadOptions {
  double tolerance = 1e-8;  // relative spread of objective values over the simplex
  int max_evals = 2000;
  double initial_step = 0.25;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;  // false when the evaluation budget ran out
};

/// Nelder-Mead simplex minimization with the standard coefficients: reflection 1,
/// expansion 2, outside/inside contraction 0.5, shrink 0.5.
template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> start, const NelderMeadOptions& opt = {}) {
  const std::size_t n = start.size();
  if (n == 0) throw DomainError("nelder_mead: dimension must be at least 1");
  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    return f(x);
  };

  std::vector<std::vector<double>> pts(n + 1, start);
  std::vector<double> val(n + 1);
  val[0] = eval(pts[0]);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i + 1][i] += opt.initial_step;
    val[i + 1] = eval(pts[i + 1]);
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  auto along = [&](std::vector<double>& out, double coef, const std::vector<double>& worst) {
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coef * (centroid[j] - worst[j]);
  };

  while (true) {
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    const double spread = val[worst] - val[best];
    if (std::isfinite(spread) && spread <= opt.tolerance * std::max(std::abs(val[best]), 1e-300)) {
      res.converged = true;
      break;
    }
    if (res.evaluations >= opt.max_evals) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = pts[order[i]];
      for (std::size_t j = 0; j < n; ++j) centroid[j] += p[j] / static_cast<double>(n);
    }

    along(xr, 1.0, pts[worst]);
    const double fr = eval(xr);
    if (fr < val[best]) {
      along(xe, 2.0, pts[worst]);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
      continue;
    }
    if (fr < val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
      continue;
    }
    bool shrink = false;
    if (fr < val[worst]) {
      along(xc, 0.5, pts[worst]);
      const double fc = eval(xc);
      if (fc <= fr) {
        pts[worst] = xc;
        val[worst] = fc;
      } else {
        shrink = true;
      }
    } else {
      along(xc, -0.5, pts[worst]);
      const double fc = eval(xc);
      if (fc < val[worst]) {
        pts[worst] = xc;
        val[worst] = fc;
      } else {
        shrink = true;
      }
    }
    if (shrink) {
      const auto xb = pts[best];
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == best) continue;
        for (std::size_t j = 0; j < n; ++j) pts[i][j] = xb[j] + 0.5 * (pts[i][j] - xb[j]);
        val[i] = eval(pts[i]);
      }
    }
  }
  const std::size_t best =
      static_cast<std::size_t>(std::min_element(val.begin(), val.end()) - val.begin());
  res.x = pts[best];
  res.value = val[best];
  return res;
}

/// Deterministic family of starting schedules.
struct RestartGrid {
  double compress_toward_zero = 0.6;  // t_k -> 0.6 t_k
  double compress_toward_one = 0.4;   // t_k -> 0.4 + 0.6 t_k
  std::vector<double> skew_powers = {0.5, 2.0};  // t_k = (k/K)^p
  double perturbation = 0.05;         // shift applied to the incumbent between sweeps
};

struct OptimConfig {
  double simplex_tolerance = 1e-8;
  int max_evals = 0;  // per Nelder-Mead run; 0 selects 2000 (K - 1)
  double improvement_epsilon = 1e-7;  // relative
  double initial_step = 0.25;
  int max_sweeps = 10;
  RestartGrid restart_grid;
  QuadratureOptions quadrature;
};

struct RestartRecord {
  std::vector<double> start;  // interim fractions
  std::vector<double> final_rates;
  double objective = 0.0;
  int evaluations = 0;
  bool converged = false;
};

struct OptimResult {
  InformationRates rates;
  double objective = 0.0;    // scale-free theta^2 (1 + ...)
  double ess_h1 = 0.0;       // subjects
  double equal_spacing_objective = 0.0;
  int evaluations = 0;       // objective evaluations, cache hits excluded
  int restarts_used = 0;
  int sweeps = 0;
  bool converged = false;
  std::vector<RestartRecord> per_restart_log;
};

/// Systematic starting schedules for K stages (interim fractions only); equal spacing first.
inline std::vector<std::vector<double>> starting_schedules(int stages, const RestartGrid& g) {
  const int m = stages - 1;
  std::vector<std::vector<double>> out;
  std::vector<double> eq(m);
  for (int k = 0; k < m; ++k) eq[k] = static_cast<double>(k + 1) / stages;
  out.push_back(eq);
  std::vector<double> s(m);
  for (int k = 0; k < m; ++k) s[k] = g.compress_toward_zero * eq[k];
  out.push_back(s);
  for (int k = 0; k < m; ++k) s[k] = g.compress_toward_one + (1.0 - g.compress_toward_one) * eq[k];
  out.push_back(s);
  for (double p : g.skew_powers) {
    for (int k = 0; k < m; ++k) s[k] = std::pow(eq[k], p);
    out.push_back(s);
  }
  return out;
}

namespace detail {

inline bool valid_interims(const std::vector<double>& t) {
  double prev = 0.0;
  for (double v : t) {
    if (!(v > prev + 1e-4) || !(v < 1.0 - 1e-4)) return false;
    prev = v;
  }
  return true;
}

// Best-by-value with ties broken by the lexicographically smallest schedule.
inline bool better(double v, const std::vector<double>& t, double best_v, const std::vector<double>& best_t) {
  if (v != best_v) return v < best_v;
  return std::lexicographical_compare(t.begin(), t.end(), best_t.begin(), best_t.end());
}

}  // namespace detail

/// Interim schedule minimizing E[N | H1] for the spec's rule, errors and stage count.
///
/// Runs Nelder-Mead from every systematic start, then re-runs from the incumbent and
/// from the incumbent shifted by +-perturbation, sweeping until the best objective
/// improves by less than `improvement_epsilon` (relative). The rates in `spec` are
/// ignored apart from their count.
inline OptimResult optimize_rates(const DesignSpec& spec, const OptimConfig& cfg = {}) {
  const int K = spec.stages;
  if (K < 1) throw DomainError("optimize_rates: at least one stage is required");
  OptimResult out;
  if (K == 1) {
    out.rates = InformationRates({1.0});
    out.objective = out.equal_spacing_objective = objective(spec, {});
    out.ess_h1 = fixed_sample_size(spec);
    out.converged = true;
    return out;
  }
  {
    DesignSpec probe = spec.with_rates(InformationRates::equally_spaced(K));
    validate(probe);
  }

  std::map<std::vector<std::int64_t>, double> cache;
  auto eval_rates = [&](const std::vector<double>& t) {
    std::vector<std::int64_t> key(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) key[i] = std::llround(t[i] * 1e10);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    ++out.evaluations;
    const double v = objective(spec, t, cfg.quadrature);
    cache.emplace(std::move(key), v);
    return v;
  };
  auto f = [&](const std::vector<double>& x) { return eval_rates(decode(x)); };

  NelderMeadOptions nm;
  nm.tolerance = cfg.simplex_tolerance;
  nm.max_evals = cfg.max_evals > 0 ? cfg.max_evals : 2000 * (K - 1);
  nm.initial_step = cfg.initial_step;

  std::vector<double> best_t;
  double best_v = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  auto run_from = [&](const std::vector<double>& start) {
    NelderMeadResult r = nelder_mead(f, encode(start), nm);
    RestartRecord rec{start, decode(r.x), r.value, r.evaluations, r.converged};
    any_converged = any_converged || r.converged;
    if (best_t.empty() || detail::better(rec.objective, rec.final_rates, best_v, best_t)) {
      best_v = rec.objective;
      best_t = rec.final_rates;
    }
    out.per_restart_log.push_back(std::move(rec));
  };

  const auto starts = starting_schedules(K, cfg.restart_grid);
  out.equal_spacing_objective = eval_rates(starts.front());
  for (const auto& s : starts) run_from(s);
  out.sweeps = 1;

  for (int sweep = 1; sweep < cfg.max_sweeps; ++sweep) {
    const double before = best_v;
    const std::vector<double> incumbent = best_t;
    std::vector<std::vector<double>> next{incumbent};
    for (double sign : {1.0, -1.0}) {
      std::vector<double> s = incumbent;
      for (double& v : s) v += sign * cfg.restart_grid.perturbation;
      if (detail::valid_interims(s)) next.push_back(std::move(s));
    }
    for (const auto& s : next) run_from(s);
    out.sweeps = sweep + 1;
    if (!(before - best_v > cfg.improvement_epsilon * std::abs(before))) break;
  }

  // Equal spacing is always a candidate.
  if (out.equal_spacing_objective < best_v) {
    best_v = out.equal_spacing_objective;
    best_t = starts.front();
  }
  out.rates = InformationRates::from_interims(best_t);
  out.objective = best_v;
  out.ess_h1 = objective_to_subjects(spec, best_v);
  out.restarts_used = static_cast<int>(out.per_restart_log.size());
  out.converged = any_converged;
  return out;
}

}  // namespace gsdopt
