#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gsdopt/error.hpp"
#include "gsdopt/gauss.hpp"
#include "gsdopt/power.hpp"
#include "gsdopt/roots.hpp"
#include "gsdopt/spending.hpp"

namespace gsdopt {

/// Bounds are searched on [-kBoundCap, kBoundCap]; a bound pinned at the cap
/// corresponds to a spend increment too small to resolve.
inline constexpr double kBoundCap = 10.0;

enum class FutilityMode { None, Binding, NonBinding };

struct FutilityRule {
  FutilityMode mode = FutilityMode::None;
  std::optional<BoundaryFamily> spending;  // beta-spending family, absent when mode == None

  friend bool operator==(const FutilityRule&, const FutilityRule&) = default;
};

inline void validate_futility(const FutilityRule& f) {
  if (f.mode == FutilityMode::None) {
    if (f.spending) throw DomainError("futility: spending must be absent when mode is none");
    return;
  }
  if (!f.spending) throw DomainError("futility: a beta-spending family is required");
  if (!is_spending_family(*f.spending)) {
    throw DomainError("futility: beta-spending requires a spending family");
  }
  validate_family(*f.spending);
}

namespace detail {

// Efficacy bound at the recursion's current stage whose exit probability equals `target`.
inline double solve_upper(const StageRecursion& rec, Sidedness sided, double target,
                          std::vector<Warning>* warnings) {
  const bool two = sided == Sidedness::TwoSidedSymmetric;
  auto exitp = [&](double u) { return rec.prob_above(u) + (two ? rec.prob_below(-u) : 0.0); };
  const int stage = static_cast<int>(rec.stage());
  if (target < -1e-10) {
    throw InfeasibleDesignError("efficacy bound: earlier stages already spend more than the level at stage " +
                                std::to_string(stage + 1));
  }
  if (target <= exitp(kBoundCap)) {
    if (warnings) {
      warnings->push_back({"bound-capped",
                           "spend increment too small to resolve; efficacy bound capped at " +
                               std::to_string(kBoundCap),
                           stage});
    }
    return kBoundCap;
  }
  auto f = [&](double u) { return exitp(u) - target; };
  const double f0 = f(0.0);
  if (f0 < 0.0) {
    throw InfeasibleDesignError("efficacy bound: spend increment exceeds the available mass at stage " +
                                std::to_string(stage + 1));
  }
  return find_root(f, 0.0, kBoundCap, f0, f(kBoundCap), 1e-10, "efficacy bound").x;
}

inline double per_tail_level(double alpha, Sidedness s) { return alpha / sides(s); }

// Cumulative two-sided (or one-sided) spend target through stage k.
inline double efficacy_target(const BoundaryRule& rule, const InformationRates& rates, double alpha,
                              std::size_t k) {
  const double level = per_tail_level(alpha, rule.sidedness);
  return sides(rule.sidedness) * cumulative_spend(rule.family, level, rates[k]);
}

}  // namespace detail

/// Stagewise efficacy bounds whose incremental null exit probabilities follow the rule.
///
/// Two-sided designs spend alpha/2 per tail with symmetric bounds +-u_k. For
/// Haybittle-Peto the interim bounds are fixed and only the final bound is solved.
/// Each stage targets the cumulative spend, so the total is exactly `alpha` even
/// after a capped stage.
inline BoundarySet solve_efficacy_boundaries(const BoundaryRule& rule, const InformationRates& rates,
                                             double alpha, const QuadratureOptions& opts = {},
                                             std::vector<Warning>* warnings = nullptr) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("efficacy bounds: alpha must lie in (0, 1)");
  validate_family(rule.family);
  const std::size_t K = rates.size();
  const bool two = rule.sidedness == Sidedness::TwoSidedSymmetric;
  const auto* hp = std::get_if<HaybittlePeto>(&rule.family);

  BoundarySet out;
  out.upper.resize(K);
  StageRecursion rec({rates, 0.0}, opts);
  double spent = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    double u;
    if (hp && k + 1 < K) {
      u = hp->interim_bound;
    } else {
      const double cum = hp ? alpha : detail::efficacy_target(rule, rates, alpha, k);
      u = detail::solve_upper(rec, rule.sidedness, cum - spent, warnings);
    }
    out.upper[k] = u;
    spent += rec.prob_above(u) + (two ? rec.prob_below(-u) : 0.0);
    if (k + 1 < K) rec.advance(two ? -u : -kInf, u);
  }
  return out;
}

struct FutilitySolution {
  BoundarySet bounds;
  double drift = 0.0;  // theta = E[Z_1] under H1
  int iterations = 0;
  std::vector<Warning> warnings;
};

namespace detail {

struct FutilitySweep {
  BoundarySet bounds;
  double power = 0.0;
  int crossed_stage = -1;
  std::vector<Warning> warnings;
};

// Bounds implied by a fixed H1 drift: futility bounds spend beta under H1 stage by
// stage; with binding futility the efficacy bounds are re-solved on (l_k, u_k).
inline FutilitySweep futility_sweep(const BoundaryRule& rule, const FutilityRule& fut,
                                    const InformationRates& rates, double alpha, double beta,
                                    const BoundarySet& efficacy, double theta,
                                    const QuadratureOptions& opts) {
  const std::size_t K = rates.size();
  const bool binding = fut.mode == FutilityMode::Binding;
  const auto* hp = std::get_if<HaybittlePeto>(&rule.family);
  FutilitySweep s;
  s.bounds.upper = efficacy.upper;
  s.bounds.lower = std::vector<double>(K, 0.0);
  auto& lower = *s.bounds.lower;

  StageRecursion h1({rates, theta}, opts);
  std::optional<StageRecursion> h0;
  if (binding) h0.emplace(StageDistribution{rates, 0.0}, opts);
  double eff_spent = 0.0, fut_spent = 0.0, power = 0.0;

  for (std::size_t k = 0; k + 1 < K; ++k) {
    if (binding) {
      double u = hp ? hp->interim_bound : 0.0;
      if (!hp) {
        u = solve_upper(*h0, Sidedness::OneSided, efficacy_target(rule, rates, alpha, k) - eff_spent,
                        &s.warnings);
      }
      s.bounds.upper[k] = u;
      eff_spent += h0->prob_above(u);
    }
    const double u = s.bounds.upper[k];
    const double target = cumulative_spend(*fut.spending, beta, rates[k]) - fut_spent;
    double l;
    if (target >= h1.prob_below(u)) {
      s.crossed_stage = static_cast<int>(k);
      s.power = 1.0;
      return s;
    }
    if (target <= h1.prob_below(-kBoundCap)) {
      l = -kBoundCap;
      s.warnings.push_back({"futility-capped",
                            "beta-spend increment too small to resolve; futility bound capped at " +
                                std::to_string(-kBoundCap),
                            static_cast<int>(k)});
    } else {
      auto f = [&](double x) { return h1.prob_below(x) - target; };
      l = find_root(f, -kBoundCap, u, 1e-10, "futility bound").x;
    }
    lower[k] = l;
    fut_spent += h1.prob_below(l);
    power += h1.prob_above(u);
    h1.advance(l, u);
    if (binding) h0->advance(l, u);
  }
  if (binding) {
    s.bounds.upper[K - 1] = solve_upper(*h0, Sidedness::OneSided, alpha - eff_spent, &s.warnings);
  }
  lower[K - 1] = s.bounds.upper[K - 1];
  s.power = power + h1.prob_above(s.bounds.upper[K - 1]);
  return s;
}

}  // namespace detail

/// Futility bounds spending beta under H1, jointly with the drift that attains power 1 - beta.
///
/// The drift and the futility bounds depend on each other. For a trial drift the
/// bounds follow stage by stage; the drift is then updated until the design attains
/// power 1 - beta, iterating at most 100 times to a drift tolerance below 1e-8.
/// Non-binding designs keep `efficacy` (solved without futility); binding designs
/// re-solve the efficacy bounds with continuation regions (l_k, u_k).
inline FutilitySolution solve_futility_boundaries(const BoundaryRule& rule, const FutilityRule& fut,
                                                  const InformationRates& rates, double alpha,
                                                  double beta, const BoundarySet& efficacy,
                                                  const QuadratureOptions& opts = {}) {
  validate_futility(fut);
  FutilitySolution out;
  if (fut.mode == FutilityMode::None || rates.size() == 1) {
    out.bounds = efficacy.efficacy_only();
    out.drift = drift_for_power(rates, out.bounds, beta, rule.sidedness, opts);
    return out;
  }
  if (rule.sidedness != Sidedness::OneSided) {
    throw DomainError("futility bounds are only supported for one-sided designs");
  }
  const double sqrt_t1 = std::sqrt(rates.front());
  const double target = 1.0 - beta;
  int evals = 0;
  auto f = [&](double eta) {
    ++evals;
    return detail::futility_sweep(rule, fut, rates, alpha, beta, efficacy, eta * sqrt_t1, opts).power -
           target;
  };
  const double eta0 = drift_for_power(rates, efficacy.efficacy_only(), beta, rule.sidedness, opts) / sqrt_t1;
  const double hi_limit = 4.0 * eta0 + 5.0;
  const detail::Bracket br = detail::bracket_increasing(f, eta0, 1e-6, hi_limit);
  const RootResult r = find_root(f, br.lo, br.hi, br.flo, br.fhi, 1e-9, "futility drift", 100);

  detail::FutilitySweep s =
      detail::futility_sweep(rule, fut, rates, alpha, beta, efficacy, r.x * sqrt_t1, opts);
  if (s.crossed_stage >= 0) {
    throw InfeasibleDesignError("futility bound crosses the efficacy bound at stage " +
                                std::to_string(s.crossed_stage + 1));
  }
  // A root on the jump where the bounds start to cross misses the power target.
  if (std::abs(s.power - target) > 1e-6) {
    throw InfeasibleDesignError("futility bound meets the efficacy bound; power " + std::to_string(s.power) +
                                " cannot reach " + std::to_string(target));
  }
  out.bounds = std::move(s.bounds);
  out.drift = r.x * sqrt_t1;
  out.iterations = evals;
  out.warnings = std::move(s.warnings);
  return out;
}

}  // namespace gsdopt
