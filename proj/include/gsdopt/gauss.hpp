#pragma once

// Recursive numerical integration over the canonical joint distribution of the
// sequential Z-statistics Z_1, ..., Z_K:
//
//   E[Z_k] = theta * sqrt(t_k / t_1),   Cov(Z_k, Z_k') = sqrt(t_k / t_k') for t_k <= t_k'.
//
// The sub-density of paths that have not stopped is carried forward on a Simpson
// grid, one stage at a time, using the independent increments of the score
// S_k = Z_k sqrt(t_k).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "gsdopt/error.hpp"
#include "gsdopt/normal.hpp"
#include "gsdopt/rates.hpp"

namespace gsdopt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sidedness { OneSided, TwoSidedSymmetric };

inline int sides(Sidedness s) { return s == Sidedness::OneSided ? 1 : 2; }

/// Per-stage stopping bounds on the Z scale. By convention lower[K-1] == upper[K-1].
struct BoundarySet {
  std::vector<double> upper;
  std::optional<std::vector<double>> lower;

  std::size_t stages() const { return upper.size(); }
  bool has_futility() const { return lower.has_value(); }

  /// Same efficacy bounds with the futility bounds dropped.
  BoundarySet efficacy_only() const { return BoundarySet{upper, std::nullopt}; }

  friend bool operator==(const BoundarySet&, const BoundarySet&) = default;
};

/// Canonical distribution of (Z_1, ..., Z_K) for a given schedule and drift.
struct StageDistribution {
  InformationRates rates;
  double drift = 0.0;  // theta = E[Z_1]

  std::size_t stages() const { return rates.size(); }
  double mean(std::size_t k) const { return drift * std::sqrt(rates[k] / rates.front()); }
  /// Drift at full information, E[Z_K].
  double final_drift() const { return drift / std::sqrt(rates.front()); }
  double correlation(std::size_t k, std::size_t j) const {
    const double a = rates[k], b = rates[j];
    return std::sqrt(std::min(a, b) / std::max(a, b));
  }
};

struct QuadratureOptions {
  double half_width = 6.5;     // grid extent in standard deviations around the stage mean
  int points_per_stage = 301;  // odd, Simpson
  double tolerance = 1e-8;     // probability normalization tolerance
  int max_refinements = 1;     // number of point doublings tried before failing
};

/// Composite Simpson rule on an equally spaced grid.
struct QuadratureGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  double half_width = 0.0;
  int points_per_stage = 0;

  static QuadratureGrid simpson(double lo, double hi, int points, double half_width = 0.0) {
    if (points < 3 || points % 2 == 0) {
      throw DomainError("QuadratureGrid: Simpson rule needs an odd number of points >= 3");
    }
    if (!(hi > lo)) throw DomainError("QuadratureGrid: empty interval");
    QuadratureGrid g;
    g.half_width = half_width;
    g.points_per_stage = points;
    g.nodes.resize(points);
    g.weights.resize(points);
    const double h = (hi - lo) / (points - 1);
    for (int j = 0; j < points; ++j) {
      g.nodes[j] = lo + h * j;
      g.weights[j] = (j == 0 || j == points - 1) ? h / 3.0 : (j % 2 == 1 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
    }
    g.nodes.back() = hi;
    return g;
  }

  /// Grid of the full +-half_width window around `center`.
  static QuadratureGrid centered(double center, double half_width, int points) {
    return simpson(center - half_width, center + half_width, points, half_width);
  }

  double spacing() const { return nodes.size() > 1 ? nodes[1] - nodes[0] : 0.0; }
};

/// Stage-by-stage forward recursion of the non-stopped sub-density.
///
/// `stage()` is the analysis currently being evaluated. The `prob_*` queries give
/// joint probabilities of reaching that stage and landing in a region; `advance`
/// conditions on the continuation interval and moves to the next analysis.
class StageRecursion {
 public:
  explicit StageRecursion(StageDistribution dist, const QuadratureOptions& opts = {},
                          int points = 0)
      : dist_(std::move(dist)), opts_(opts) {
    base_points_ = points > 0 ? points : opts.points_per_stage;
    if (base_points_ < 3 || base_points_ % 2 == 0) {
      throw DomainError("StageRecursion: points per stage must be odd and >= 3");
    }
    eta_ = dist_.final_drift();
  }

  std::size_t stage() const { return stage_; }
  std::size_t stages() const { return dist_.stages(); }
  const StageDistribution& distribution() const { return dist_; }

  /// Probability of reaching the current stage.
  double mass() const { return mass_; }

  double normalization_error() const { return norm_error_; }
  int max_points_used() const { return max_points_; }
  const QuadratureGrid& grid() const { return grid_; }
  const std::vector<double>& weighted_density() const { return w_density_; }

  /// P(reach stage, Z_stage >= u).
  double prob_above(double u) const {
    if (u == kInf) return 0.0;
    if (stage_ == 0) return normal_sf(u - dist_.mean(0));
    const Step s = step();
    double acc = 0.0;
    for (std::size_t i = 0; i < w_density_.size(); ++i) {
      if (w_density_[i] == 0.0) continue;
      acc += w_density_[i] * normal_sf((s.a * u - s.b * grid_.nodes[i] - s.c) / s.sigma);
    }
    return acc;
  }

  /// P(reach stage, Z_stage <= l).
  double prob_below(double l) const {
    if (l == -kInf) return 0.0;
    if (stage_ == 0) return normal_cdf(l - dist_.mean(0));
    const Step s = step();
    double acc = 0.0;
    for (std::size_t i = 0; i < w_density_.size(); ++i) {
      if (w_density_[i] == 0.0) continue;
      acc += w_density_[i] * normal_cdf((s.a * l - s.b * grid_.nodes[i] - s.c) / s.sigma);
    }
    return acc;
  }

  /// P(reach stage, l < Z_stage < u).
  double prob_between(double l, double u) const {
    if (!(u > l)) return 0.0;
    if (stage_ == 0) return normal_cdf(u - dist_.mean(0)) - normal_cdf(l - dist_.mean(0));
    const Step s = step();
    double acc = 0.0;
    for (std::size_t i = 0; i < w_density_.size(); ++i) {
      if (w_density_[i] == 0.0) continue;
      const double base = s.b * grid_.nodes[i] + s.c;
      const double hi = u == kInf ? 1.0 : normal_cdf((s.a * u - base) / s.sigma);
      const double lo = l == -kInf ? 0.0 : normal_cdf((s.a * l - base) / s.sigma);
      acc += w_density_[i] * (hi - lo);
    }
    return acc;
  }

  /// Keeps the paths with l < Z_stage < u and moves to the next analysis.
  void advance(double l, double u) {
    if (stage_ + 1 >= dist_.stages()) {
      throw DomainError("StageRecursion::advance called at the final stage");
    }
    const double exits = prob_above(u) + prob_below(l);
    const double mean = dist_.mean(stage_);
    const double lo = std::max(l, mean - opts_.half_width);
    const double hi = std::min(u, mean + opts_.half_width);

    if (!(hi > lo)) {
      grid_ = QuadratureGrid{};
      w_density_.clear();
    } else {
      const int n = points_for(stage_, hi - lo);
      QuadratureGrid next = QuadratureGrid::simpson(lo, hi, n, opts_.half_width);
      std::vector<double> dens(next.nodes.size(), 0.0);
      if (stage_ == 0) {
        for (std::size_t j = 0; j < dens.size(); ++j) dens[j] = normal_pdf(next.nodes[j] - mean);
      } else {
        transition(next, dens);
      }
      for (std::size_t j = 0; j < dens.size(); ++j) dens[j] *= next.weights[j];
      grid_ = std::move(next);
      w_density_ = std::move(dens);
      max_points_ = std::max(max_points_, n);
    }
    const double next_mass = std::accumulate(w_density_.begin(), w_density_.end(), 0.0);
    norm_error_ = std::max(norm_error_, std::abs(mass_ - exits - next_mass));
    mass_ = next_mass;
    ++stage_;
  }

  /// Records the normalization residual of the final stage.
  void close_final(double upper_exit, double lower_exit, double remaining) {
    norm_error_ = std::max(norm_error_, std::abs(mass_ - upper_exit - lower_exit - remaining));
  }

 private:
  struct Step {
    double a, b, sigma, c;
  };

  // Z_k sqrt(t_k) = Z_{k-1} sqrt(t_{k-1}) + X,  X ~ N(eta * dt, dt).
  Step step() const {
    const double tk = dist_.rates[stage_];
    const double tp = dist_.rates[stage_ - 1];
    const double dt = tk - tp;
    return {std::sqrt(tk), std::sqrt(tp), std::sqrt(dt), eta_ * dt};
  }

  // Grid spacing must resolve the transition kernels entering and leaving a stage.
  int points_for(std::size_t k, double width) const {
    const double base_h = 2.0 * opts_.half_width / (base_points_ - 1);
    double h = base_h;
    const double tk = dist_.rates[k];
    if (k > 0) h = std::min(h, 0.25 * std::sqrt((tk - dist_.rates[k - 1]) / tk));
    if (k + 1 < dist_.stages()) h = std::min(h, 0.25 * std::sqrt((dist_.rates[k + 1] - tk) / tk));
    if (h >= base_h) return base_points_;
    int n = static_cast<int>(std::ceil(std::min(width, 2.0 * opts_.half_width) / h)) + 1;
    n = std::clamp(n, base_points_, kMaxPoints);
    if (n % 2 == 0) ++n;
    return n;
  }

  // Gaussian kernel rows are generated by a multiplicative recurrence from the
  // peak outwards: exp(-(x+d)^2/2) = exp(-x^2/2) * R,  R <- R * exp(-d^2).
  // Four interleaved recurrences (stride 4d) keep the multiply chains independent.
  struct KernelSteps {
    double q, q6, q16;  // exp(-d^2), its 6th and 16th powers
  };

  // Row contributions below this absolute size are dropped.
  static constexpr double kKernelCutoff = 1e-20;

  static void kernel_tail(double* dens, std::ptrdiff_t js, std::ptrdiff_t dir, std::size_t avail,
                          double e0, double x, double step, const KernelSteps& ks, double ws) {
    const double tiny = kKernelCutoff / ws;
    double e[4], r[4];
    double ratio = std::exp(-0.5 * (2.0 * x * step + step * step));
    double prev = e0;
    for (int m = 0; m < 4; ++m) {
      e[m] = prev * ratio;
      prev = e[m];
      ratio *= ks.q;
      r[m] = ratio * ratio * ratio * ratio * ks.q6;
    }
    std::size_t s = 1;
    for (; s + 3 <= avail; s += 4) {
      if (e[0] < tiny) return;
      double* out = dens + js + dir * static_cast<std::ptrdiff_t>(s);
      for (int m = 0; m < 4; ++m) {
        out[dir * m] += ws * e[m];
        e[m] *= r[m];
        r[m] *= ks.q16;
      }
    }
    for (int m = 0; s + m <= avail; ++m) dens[js + dir * static_cast<std::ptrdiff_t>(s + m)] += ws * e[m];
  }

  void transition(const QuadratureGrid& next, std::vector<double>& dens) const {
    const Step s = step();
    const std::size_t n = next.nodes.size();
    const double h = next.spacing();
    const double d = s.a * h / s.sigma;
    const double scale = kInvSqrt2Pi * s.a / s.sigma;
    const double z0 = next.nodes.front();
    const double q = std::exp(-d * d);
    const double q2 = q * q, q4 = q2 * q2, q8 = q4 * q4;
    const KernelSteps ks{q, q4 * q2, q8 * q8};

    for (std::size_t i = 0; i < w_density_.size(); ++i) {
      const double wi = w_density_[i];
      if (wi == 0.0) continue;
      const double ws = wi * scale;
      const double x0 = (s.a * z0 - s.b * grid_.nodes[i] - s.c) / s.sigma;
      const double jr = std::round(-x0 / d);
      const std::size_t js =
          jr <= 0.0 ? 0 : (jr >= static_cast<double>(n - 1) ? n - 1 : static_cast<std::size_t>(jr));
      const double x = x0 + d * static_cast<double>(js);
      const double e0 = std::exp(-0.5 * x * x);
      if (e0 == 0.0) continue;
      dens[js] += ws * e0;
      const auto j = static_cast<std::ptrdiff_t>(js);
      kernel_tail(dens.data(), j, 1, n - 1 - js, e0, x, d, ks, ws);
      kernel_tail(dens.data(), j, -1, js, e0, x, -d, ks, ws);
    }
  }

  static constexpr int kMaxPoints = 4001;

  StageDistribution dist_;
  QuadratureOptions opts_;
  int base_points_ = 301;
  double eta_ = 0.0;
  std::size_t stage_ = 0;
  double mass_ = 1.0;
  double norm_error_ = 0.0;
  int max_points_ = 0;
  QuadratureGrid grid_;
  std::vector<double> w_density_;
};

/// Stagewise first-exit probabilities.
///
/// `lower` holds exits through the lower region: futility stops for one-sided
/// designs with futility bounds, lower-tail efficacy for symmetric two-sided designs.
/// `continuation[k]` is the probability of continuing past analysis k; at the final
/// analysis it is the mass left without a decision (acceptance without a lower bound).
struct StageProbabilities {
  std::vector<double> upper;
  std::vector<double> lower;
  std::vector<double> continuation;
  double normalization_error = 0.0;
  int points_per_stage = 0;

  std::size_t stages() const { return upper.size(); }
  double stop(std::size_t k) const { return upper[k] + lower[k]; }
  /// Probability of reaching analysis k.
  double reach(std::size_t k) const { return k == 0 ? 1.0 : continuation[k - 1]; }
  double total_upper() const { return std::accumulate(upper.begin(), upper.end(), 0.0); }
  double total_lower() const { return std::accumulate(lower.begin(), lower.end(), 0.0); }
  double total() const { return total_upper() + total_lower() + continuation.back(); }
};

/// Lower edge of the continuation region at stage k.
inline double continuation_floor(const BoundarySet& b, Sidedness sided, std::size_t k) {
  const std::size_t last = b.stages() - 1;
  if (b.lower) return k == last ? b.upper[last] : (*b.lower)[k];
  if (sided == Sidedness::TwoSidedSymmetric) return -b.upper[k];
  return -kInf;
}

inline void validate_bounds(const StageDistribution& dist, const BoundarySet& b, Sidedness sided) {
  const std::size_t K = dist.stages();
  if (b.upper.size() != K) throw DomainError("bounds: one efficacy bound per stage is required");
  for (double u : b.upper) {
    if (std::isnan(u)) throw DomainError("bounds: efficacy bound is NaN");
  }
  if (b.lower) {
    if (sided == Sidedness::TwoSidedSymmetric) {
      throw DomainError("bounds: futility bounds are only supported for one-sided designs");
    }
    if (b.lower->size() != K) throw DomainError("bounds: one futility bound per stage is required");
    for (std::size_t k = 0; k + 1 < K; ++k) {
      if (!((*b.lower)[k] < b.upper[k])) {
        throw DomainError("bounds: futility bound must lie below the efficacy bound at stage " +
                          std::to_string(k + 1));
      }
    }
  }
}

namespace detail {

inline StageProbabilities propagate_once(const StageDistribution& dist, const BoundarySet& b,
                                         Sidedness sided, const QuadratureOptions& opts,
                                         int points) {
  const std::size_t K = dist.stages();
  StageProbabilities out;
  out.upper.resize(K);
  out.lower.resize(K);
  out.continuation.resize(K);
  StageRecursion rec(dist, opts, points);
  for (std::size_t k = 0; k < K; ++k) {
    const double u = b.upper[k];
    const double c = continuation_floor(b, sided, k);
    out.upper[k] = rec.prob_above(u);
    out.lower[k] = rec.prob_below(c);
    if (k + 1 < K) {
      rec.advance(c, u);
      out.continuation[k] = rec.mass();
    } else {
      out.continuation[k] = rec.prob_between(c, u);
      rec.close_final(out.upper[k], out.lower[k], out.continuation[k]);
    }
  }
  out.normalization_error = std::max(rec.normalization_error(), std::abs(1.0 - out.total()));
  out.points_per_stage = std::max(points, rec.max_points_used());
  return out;
}

}  // namespace detail

/// Stagewise exit probabilities of the sequential Z-process under `dist`.
///
/// Retries with doubled grid resolution when the probability mass does not
/// normalize to `opts.tolerance`.
inline StageProbabilities propagate(const StageDistribution& dist, const BoundarySet& bounds,
                                    Sidedness sided = Sidedness::OneSided,
                                    const QuadratureOptions& opts = {}) {
  validate_bounds(dist, bounds, sided);
  int points = opts.points_per_stage;
  StageProbabilities res;
  for (int attempt = 0; attempt <= opts.max_refinements; ++attempt) {
    res = detail::propagate_once(dist, bounds, sided, opts, points);
    if (res.normalization_error <= opts.tolerance) return res;
    points = 2 * points - 1;
  }
  throw GridResolutionError("propagate: probability mass off by " +
                            std::to_string(res.normalization_error) + " after refinement");
}

}  // namespace gsdopt
