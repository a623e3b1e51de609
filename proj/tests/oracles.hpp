#pragma once

// Reference computations that share no code with the library: a power-series normal
// CDF and exit probabilities by nested adaptive Gauss-Kronrod integration.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace gsdopt::oracle_ref {

// Phi(x) = 1/2 + phi(x) sum_n x^(2n+1) / (1 3 5 ... (2n+1)), summed in long double.
// Accurate to well below 1e-13 for |x| <= 7.
inline double series_cdf(double xd) {
  const long double x = xd;
  const long double pdf = std::exp(-x * x / 2) / std::sqrt(2 * 3.14159265358979323846264338327950288L);
  long double term = x, sum = x;
  for (int n = 1; n < 400; ++n) {
    term *= x * x / (2 * n + 1);
    sum += term;
    if (std::fabs(term) < 1e-30L * std::fabs(sum)) break;
  }
  return static_cast<double>(0.5L + pdf * sum);
}

inline double series_sf(double x) { return series_cdf(-x); }

struct Exits {
  std::vector<double> upper, lower;
};

// Exits of the canonical Z-process for K <= 3. `lo[k]` and `hi[k]` bound the
// continuation interval at interim k (use +-infinity for none). The final stage
// uses only hi[K-1] for the upper exit and lo[K-1] for the lower one.
inline Exits exits(const std::vector<double>& t, double drift, const std::vector<double>& lo,
                   const std::vector<double>& hi) {
  using boost::math::quadrature::gauss_kronrod;
  const std::size_t K = t.size();
  auto mean = [&](std::size_t k) { return drift * std::sqrt(t[k] / t[0]); };
  auto pdf = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); };
  auto clip_lo = [&](std::size_t k) { return std::isinf(lo[k]) ? mean(k) - 12.0 : lo[k]; };
  auto clip_hi = [&](std::size_t k) { return std::isinf(hi[k]) ? mean(k) + 12.0 : hi[k]; };

  // Probability, given Z_k = z, of continuing through k+1..j-1 and then exiting at j.
  std::function<double(std::size_t, double, std::size_t, bool)> ahead =
      [&](std::size_t k, double z, std::size_t j, bool up) -> double {
    const double rho = std::sqrt(t[k] / t[k + 1]);
    const double m = mean(k + 1) + rho * (z - mean(k));
    const double s = std::sqrt(1.0 - rho * rho);
    if (k + 1 == j) {
      if (up) return std::isinf(hi[j]) ? 0.0 : series_sf((hi[j] - m) / s);
      return std::isinf(lo[j]) ? 0.0 : series_cdf((lo[j] - m) / s);
    }
    auto f = [&](double w) { return pdf((w - m) / s) / s * ahead(k + 1, w, j, up); };
    return gauss_kronrod<double, 31>::integrate(f, clip_lo(k + 1), clip_hi(k + 1), 12, 1e-13);
  };

  Exits e;
  for (std::size_t j = 0; j < K; ++j) {
    for (bool up : {true, false}) {
      double p;
      if (j == 0) {
        const double b = up ? hi[0] : lo[0];
        p = std::isinf(b) ? 0.0 : (up ? series_sf(b - mean(0)) : series_cdf(b - mean(0)));
      } else {
        auto f = [&](double z) { return pdf(z - mean(0)) * ahead(0, z, j, up); };
        p = gauss_kronrod<double, 31>::integrate(f, clip_lo(0), clip_hi(0), 12, 1e-13);
      }
      (up ? e.upper : e.lower).push_back(p);
    }
  }
  return e;
}

}  // namespace gsdopt::oracle_ref
