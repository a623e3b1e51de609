#pragma once

#include <algorithm>
#include <cmath>

#include "gsdopt/error.hpp"
#include "gsdopt/gauss.hpp"
#include "gsdopt/normal.hpp"
#include "gsdopt/roots.hpp"

namespace gsdopt {

/// Probability of rejecting H0 (either tail for two-sided designs).
inline double rejection_probability(const StageProbabilities& p, Sidedness sided,
                                    bool has_futility) {
  double r = p.total_upper();
  if (sided == Sidedness::TwoSidedSymmetric && !has_futility) r += p.total_lower();
  return r;
}

inline double rejection_probability(const InformationRates& rates, const BoundarySet& bounds,
                                    Sidedness sided, double theta,
                                    const QuadratureOptions& opts = {}) {
  return rejection_probability(propagate({rates, theta}, bounds, sided, opts), sided,
                               bounds.has_futility());
}

namespace detail {

struct Bracket {
  double lo, hi, flo, fhi;
};

// Brackets an increasing function's root by geometric steps away from `guess`.
template <class F>
Bracket bracket_increasing(F&& f, double guess, double lo_limit, double hi_limit) {
  double a = std::clamp(guess, lo_limit, hi_limit);
  double fa = f(a);
  if (fa < 0.0) {
    for (double step = 0.02;; step *= 2.0) {
      const double b = std::min(a * (1.0 + step), hi_limit);
      const double fb = f(b);
      if (fb >= 0.0) return {a, b, fa, fb};
      if (b >= hi_limit) break;
      a = b;
      fa = fb;
    }
  } else {
    for (double step = 0.02;; step *= 2.0) {
      const double b = std::max(a / (1.0 + step), lo_limit);
      const double fb = f(b);
      if (fb <= 0.0) return {b, a, fb, fa};
      if (b <= lo_limit) break;
      a = b;
      fa = fb;
    }
  }
  throw ConvergenceError("drift_for_power: no drift in the search range attains the power");
}

}  // namespace detail

/// Drift theta = E[Z_1] at which the design rejects with probability 1 - beta.
///
/// H1 continuation regions respect the futility bounds when present (binding or not).
/// Internally the root is found in the full-information drift theta / sqrt(t_1).
inline double drift_for_power(const InformationRates& rates, const BoundarySet& bounds,
                              double beta, Sidedness sided = Sidedness::OneSided,
                              const QuadratureOptions& opts = {}) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("drift_for_power: beta must lie in (0, 1)");
  const double sqrt_t1 = std::sqrt(rates.front());
  const double z_beta = normal_quantile(1.0 - beta);
  const double target = 1.0 - beta;
  auto f = [&](double eta) {
    return rejection_probability(rates, bounds, sided, eta * sqrt_t1, opts) - target;
  };
  const double uk = bounds.upper.back();
  const double hi_limit = 3.0 * (std::max(uk, 1.0) + std::max(z_beta, 1.0));
  const double guess = std::max(uk + z_beta, 1e-3);
  const detail::Bracket br = detail::bracket_increasing(f, guess, 1e-6, hi_limit);
  const RootResult r = find_root(f, br.lo, br.hi, br.flo, br.fhi, 1e-11, "drift_for_power", 200, 1e-13);
  return r.x * sqrt_t1;
}

}  // namespace gsdopt
