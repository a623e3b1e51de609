#pragma once

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "gsdopt/error.hpp"

namespace gsdopt {

struct RootResult {
  double x = 0.0;
  int evaluations = 0;
};

/// Bracketed root of a monotone scalar function on [lo, hi] with known end values.
///
/// Backed by TOMS 748 (bracketing with secant/inverse-cubic steps), which keeps the
/// bisection guarantee while converging superlinearly. Terminates once the bracket
/// is narrower than `xtol` or a point with |f| <= `ftol` is found.
template <class F>
RootResult find_root(F&& f, double lo, double hi, double flo, double fhi, double xtol,
                     const std::string& what, int max_iter = 200, double ftol = 0.0) {
  if (std::abs(flo) <= ftol) return {lo, 0};
  if (std::abs(fhi) <= ftol) return {hi, 0};
  if (!std::isfinite(flo) || !std::isfinite(fhi) || (flo > 0.0) == (fhi > 0.0)) {
    throw ConvergenceError(what + ": root is not bracketed by [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
  }
  int evals = 0;
  auto g = [&](double x) {
    ++evals;
    const double v = f(x);
    return std::abs(v) <= ftol ? 0.0 : v;
  };
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
  auto tol = [xtol](double a, double b) { return std::abs(b - a) <= xtol; };
  std::pair<double, double> r;
  try {
    r = boost::math::tools::toms748_solve(g, lo, hi, flo, fhi, tol, iters);
  } catch (const std::exception& e) {
    throw ConvergenceError(what + ": " + e.what());
  }
  if (iters >= static_cast<std::uintmax_t>(max_iter) && std::abs(r.second - r.first) > xtol) {
    throw ConvergenceError(what + ": iteration limit reached");
  }
  return {0.5 * (r.first + r.second), evals};
}

template <class F>
RootResult find_root(F&& f, double lo, double hi, double xtol, const std::string& what,
                     int max_iter = 200) {
  const double flo = f(lo);
  const double fhi = f(hi);
  RootResult r = find_root(f, lo, hi, flo, fhi, xtol, what, max_iter);
  r.evaluations += 2;
  return r;
}

}  // namespace gsdopt
