#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "gsdopt/boundaries.hpp"
#include "gsdopt/error.hpp"
#include "gsdopt/gauss.hpp"
#include "gsdopt/normal.hpp"
#include "gsdopt/power.hpp"
#include "gsdopt/rates.hpp"
#include "gsdopt/spending.hpp"

namespace gsdopt {

struct ContinuousEndpoint {
  double delta_star = 0.5;
  double sigma = 1.0;
  friend bool operator==(const ContinuousEndpoint&, const ContinuousEndpoint&) = default;
};

struct BinaryEndpoint {
  double p_control = 0.5;
  double p_treatment = 0.5;
  friend bool operator==(const BinaryEndpoint&, const BinaryEndpoint&) = default;
};

struct EndpointSpec {
  std::variant<ContinuousEndpoint, BinaryEndpoint> kind = ContinuousEndpoint{};
  double allocation_ratio = 1.0;  // treatment : control
  friend bool operator==(const EndpointSpec&, const EndpointSpec&) = default;
};

enum class Hypothesis { H0, Mid, H1 };

inline const char* hypothesis_name(Hypothesis h) {
  switch (h) {
    case Hypothesis::H0: return "H0";
    case Hypothesis::Mid: return "H0/H1";
    case Hypothesis::H1: return "H1";
  }
  return "?";
}

/// Declarative description of a group-sequential trial.
struct DesignSpec {
  int stages = 1;
  double alpha = 0.025;
  double beta = 0.1;
  BoundaryRule boundary_rule;
  FutilityRule futility;
  EndpointSpec endpoint;
  InformationRates rates;

  Sidedness sidedness() const { return boundary_rule.sidedness; }

  /// z_{1-alpha} with alpha taken per tail.
  double z_alpha() const { return normal_quantile(1.0 - alpha / sides(sidedness())); }
  double z_beta() const { return normal_quantile(1.0 - beta); }

  DesignSpec with_rates(InformationRates r) const {
    DesignSpec s = *this;
    s.rates = std::move(r);
    s.stages = s.rates.stages();
    return s;
  }

  friend bool operator==(const DesignSpec&, const DesignSpec&) = default;
};

inline void validate_endpoint(const EndpointSpec& e) {
  if (!(e.allocation_ratio > 0.0) || !std::isfinite(e.allocation_ratio)) {
    throw DomainError("endpoint: allocation_ratio must be positive");
  }
  if (const auto* c = std::get_if<ContinuousEndpoint>(&e.kind)) {
    if (!(c->sigma > 0.0)) throw DomainError("endpoint: sigma must be positive");
    if (!std::isfinite(c->delta_star)) throw DomainError("endpoint: delta_star must be finite");
  } else {
    const auto& b = std::get<BinaryEndpoint>(e.kind);
    if (!(b.p_control > 0.0 && b.p_control < 1.0) || !(b.p_treatment > 0.0 && b.p_treatment < 1.0)) {
      throw DomainError("endpoint: response probabilities must lie in (0, 1)");
    }
  }
}

inline void validate(const DesignSpec& s) {
  if (s.stages < 1) throw DomainError("stages: at least one analysis is required");
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw DomainError("alpha: must lie in (0, 1)");
  if (!(s.beta > 0.0 && s.beta < 1.0)) throw DomainError("beta: must lie in (0, 1)");
  if (!(s.alpha + s.beta < 1.0)) throw DomainError("alpha + beta must be below 1");
  if (s.rates.stages() != s.stages) throw DomainError("rates: length must equal the number of stages");
  validate_family(s.boundary_rule.family);
  validate_futility(s.futility);
  if (s.futility.mode != FutilityMode::None && s.sidedness() != Sidedness::OneSided) {
    throw DomainError("futility: only supported for one-sided designs");
  }
  validate_endpoint(s.endpoint);
}

namespace detail {

inline double effect_fraction(Hypothesis h) {
  switch (h) {
    case Hypothesis::H0: return 0.0;
    case Hypothesis::Mid: return 0.5;
    case Hypothesis::H1: return 1.0;
  }
  return 1.0;
}

// Total fixed-design size for two proportions: pooled variance under H0,
// unpooled under H1. r is treatment:control.
inline double binary_fixed_total(const BinaryEndpoint& b, double r, double z_alpha, double z_beta) {
  const double delta = b.p_treatment - b.p_control;
  if (delta == 0.0) throw DomainError("sample size: zero effect under H1");
  const double pbar = (b.p_control + r * b.p_treatment) / (1.0 + r);
  const double v0 = pbar * (1.0 - pbar) * (1.0 + r);
  const double v1 = r * b.p_control * (1.0 - b.p_control) + b.p_treatment * (1.0 - b.p_treatment);
  const double root = z_alpha * std::sqrt(v0) + z_beta * std::sqrt(v1);
  const double n_control = root * root / (r * delta * delta);
  return n_control * (1.0 + r);
}

}  // namespace detail

/// Fixed-design total sample size N_0.
inline double fixed_sample_size(const DesignSpec& spec) {
  const double r = spec.endpoint.allocation_ratio;
  const double za = spec.z_alpha(), zb = spec.z_beta();
  if (const auto* c = std::get_if<ContinuousEndpoint>(&spec.endpoint.kind)) {
    if (c->delta_star == 0.0) throw DomainError("sample size: zero effect under H1");
    const double ratio = c->sigma / c->delta_star;
    return ratio * ratio * (1.0 + r) * (1.0 + r) / r * (za + zb) * (za + zb);
  }
  return detail::binary_fixed_total(std::get<BinaryEndpoint>(spec.endpoint.kind), r, za, zb);
}

/// Standardized effect delta/sigma under the selected hypothesis.
///
/// Binary endpoints map to the effect that reproduces their fixed-design size through
/// the continuous formula, so it depends on the error rates. The mid hypothesis is
/// half the H1 effect (for binary endpoints: the treatment rate halfway between arms).
inline double standardized_effect(const DesignSpec& spec, Hypothesis h) {
  const double frac = detail::effect_fraction(h);
  if (frac == 0.0) return 0.0;
  const double r = spec.endpoint.allocation_ratio;
  if (const auto* c = std::get_if<ContinuousEndpoint>(&spec.endpoint.kind)) {
    return frac * c->delta_star / c->sigma;
  }
  const double n0 = fixed_sample_size(spec);
  const double zsum = spec.z_alpha() + spec.z_beta();
  const auto& b = std::get<BinaryEndpoint>(spec.endpoint.kind);
  const double sign = b.p_treatment >= b.p_control ? 1.0 : -1.0;
  return sign * frac * (1.0 + r) * zsum / std::sqrt(r * n0);
}

struct SampleSizes {
  double n_fixed = 0.0;
  double n_max = 0.0;
  std::vector<double> n_per_stage;
};

/// N_0, N_K = N_0 theta^2 / (t_1 (z_a + z_b)^2) and N_k = t_k N_K; real valued.
inline SampleSizes sample_sizes(const DesignSpec& spec, double theta, const InformationRates& rates) {
  if (!(theta > 0.0)) throw DomainError("sample size: drift must be positive");
  SampleSizes s;
  s.n_fixed = fixed_sample_size(spec);
  if (rates.size() == 1) {
    s.n_max = s.n_fixed;
  } else {
    const double zsum = spec.z_alpha() + spec.z_beta();
    s.n_max = s.n_fixed * theta * theta / (rates.front() * zsum * zsum);
  }
  s.n_per_stage.resize(rates.size());
  for (std::size_t k = 0; k < rates.size(); ++k) s.n_per_stage[k] = rates[k] * s.n_max;
  s.n_per_stage.back() = s.n_max;
  return s;
}

/// Boundaries plus the H1 drift of a fully specified design.
struct DesignSolution {
  BoundarySet bounds;           // with futility bounds when the design has them
  BoundarySet efficacy_bounds;  // futility-free efficacy bounds
  double drift = 0.0;           // theta = E[Z_1] under H1
  std::vector<Warning> warnings;
};

inline DesignSolution solve_design(const DesignSpec& spec, const QuadratureOptions& opts = {}) {
  validate(spec);
  DesignSolution sol;
  const InformationRates& rates = spec.rates;
  if (rates.size() == 1) {
    // Fixed design: closed form, so every inflation factor is exactly one.
    const double za = spec.z_alpha();
    sol.bounds.upper = {za};
    if (spec.futility.mode != FutilityMode::None) sol.bounds.lower = std::vector<double>{za};
    sol.efficacy_bounds.upper = {za};
    sol.drift = za + spec.z_beta();
    return sol;
  }
  sol.efficacy_bounds =
      solve_efficacy_boundaries(spec.boundary_rule, rates, spec.alpha, opts, &sol.warnings);
  if (spec.futility.mode == FutilityMode::None) {
    sol.bounds = sol.efficacy_bounds;
    sol.drift = drift_for_power(rates, sol.bounds, spec.beta, spec.sidedness(), opts);
    return sol;
  }
  FutilitySolution fs = solve_futility_boundaries(spec.boundary_rule, spec.futility, rates, spec.alpha,
                                                  spec.beta, sol.efficacy_bounds, opts);
  sol.bounds = std::move(fs.bounds);
  sol.drift = fs.drift;
  if (spec.futility.mode == FutilityMode::Binding) {
    sol.efficacy_bounds = sol.bounds.efficacy_only();
  }
  sol.warnings.insert(sol.warnings.end(), fs.warnings.begin(), fs.warnings.end());
  return sol;
}

/// Convenience overload using the spec's boundary rule and futility settings.
inline FutilitySolution solve_futility_boundaries(const DesignSpec& spec, const InformationRates& rates,
                                                  const BoundarySet& efficacy,
                                                  const QuadratureOptions& opts = {}) {
  return solve_futility_boundaries(spec.boundary_rule, spec.futility, rates, spec.alpha, spec.beta,
                                   efficacy, opts);
}

/// E[N] = sum_k N_k P(stop at k); all mass reaching the final analysis stops there.
inline double expected_sample_size(const StageProbabilities& p, std::span<const double> n_per_stage) {
  const std::size_t K = p.stages();
  double ess = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double stop = k + 1 < K ? p.reach(k) - p.reach(k + 1) : p.reach(k);
    ess += n_per_stage[k] * stop;
  }
  return ess;
}

inline double expected_sample_size(const DesignSpec& spec, double theta_under,
                                   const InformationRates& rates, const BoundarySet& bounds,
                                   double n_max, const QuadratureOptions& opts = {}) {
  if (rates.size() == 1) return n_max;
  std::vector<double> n(rates.size());
  for (std::size_t k = 0; k < n.size(); ++k) n[k] = rates[k] * n_max;
  n.back() = n_max;
  return expected_sample_size(propagate({rates, theta_under}, bounds, spec.sidedness(), opts), n);
}

struct HypothesisReport {
  Hypothesis hypothesis = Hypothesis::H1;
  double drift = 0.0;
  StageProbabilities exits;
  std::vector<double> efficacy;  // per-stage probability of stopping with rejection
  std::vector<double> futility;  // per-stage probability of stopping for futility
  double rejection = 0.0;
  double ess = 0.0;
  double eif = 0.0;
};

struct OperatingCharacteristics {
  BoundarySet boundaries;
  double drift = 0.0;
  double n_fixed = 0.0;
  double n_max = 0.0;
  std::vector<double> n_per_stage;
  HypothesisReport h0, mid, h1;
  double type_one_error_nonbinding = 0.0;  // null rejection ignoring futility bounds
  double mif = 1.0;
  std::vector<Warning> warnings;

  double ess_h0() const { return h0.ess; }
  double ess_mid() const { return mid.ess; }
  double ess_h1() const { return h1.ess; }
  const HypothesisReport& under(Hypothesis h) const {
    return h == Hypothesis::H0 ? h0 : (h == Hypothesis::Mid ? mid : h1);
  }
};

namespace detail {

inline HypothesisReport hypothesis_report(const DesignSpec& spec, const DesignSolution& sol,
                                          const SampleSizes& sizes, Hypothesis h,
                                          const QuadratureOptions& opts) {
  HypothesisReport r;
  r.hypothesis = h;
  r.drift = effect_fraction(h) * sol.drift;
  const std::size_t K = spec.rates.size();
  r.exits = propagate({spec.rates, r.drift}, sol.bounds, spec.sidedness(), opts);
  const bool futility = sol.bounds.has_futility();
  const bool two = spec.sidedness() == Sidedness::TwoSidedSymmetric;
  r.efficacy.resize(K);
  r.futility.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    r.efficacy[k] = r.exits.upper[k] + (two ? r.exits.lower[k] : 0.0);
    r.futility[k] = futility ? r.exits.lower[k] : 0.0;
  }
  r.rejection = rejection_probability(r.exits, spec.sidedness(), futility);
  r.ess = K == 1 ? sizes.n_max : expected_sample_size(r.exits, sizes.n_per_stage);
  r.eif = r.ess / sizes.n_fixed;
  return r;
}

}  // namespace detail

/// Full operating characteristics: bounds, drift, sizes, and stagewise exits,
/// expected sizes and inflation factors under H0, the mid hypothesis and H1.
inline OperatingCharacteristics characterize(const DesignSpec& spec, const QuadratureOptions& opts = {}) {
  DesignSolution sol = solve_design(spec, opts);
  const SampleSizes sizes = sample_sizes(spec, sol.drift, spec.rates);
  OperatingCharacteristics oc;
  oc.boundaries = sol.bounds;
  oc.drift = sol.drift;
  oc.n_fixed = sizes.n_fixed;
  oc.n_max = sizes.n_max;
  oc.n_per_stage = sizes.n_per_stage;
  oc.h0 = detail::hypothesis_report(spec, sol, sizes, Hypothesis::H0, opts);
  oc.mid = detail::hypothesis_report(spec, sol, sizes, Hypothesis::Mid, opts);
  oc.h1 = detail::hypothesis_report(spec, sol, sizes, Hypothesis::H1, opts);
  oc.mif = spec.rates.size() == 1 ? 1.0 : sizes.n_max / sizes.n_fixed;
  if (spec.rates.size() == 1) {
    oc.h0.eif = oc.mid.eif = oc.h1.eif = 1.0;
  }
  oc.type_one_error_nonbinding =
      sol.bounds.has_futility()
          ? rejection_probability(propagate({spec.rates, 0.0}, sol.bounds.efficacy_only(),
                                            spec.sidedness(), opts),
                                  spec.sidedness(), false)
          : oc.h0.rejection;
  oc.warnings = std::move(sol.warnings);
  return oc;
}

}  // namespace gsdopt
