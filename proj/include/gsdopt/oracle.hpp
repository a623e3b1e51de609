#pragma once

// Monte Carlo check of the quadrature: simulates the sequential Z-process from
// independent Gaussian score increments and applies the stopping rule path by path.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <thread>
#include <vector>

#include "gsdopt/error.hpp"
#include "gsdopt/gauss.hpp"

namespace gsdopt {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Output block i of stream s under key k is a pure function of (i, s, k), so batches
/// can be generated in any order or on any thread and still reproduce exactly.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

  Philox4x32(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  std::uint32_t next_u32() {
    if (pos_ == 4) {
      buf_ = generate({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                       static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                      key_);
      ++block_;
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t a = next_u32() >> 5, b = next_u32() >> 6;
    return (static_cast<double>((a << 26) | b) + 0.5) * 0x1.0p-53;
  }

 private:
  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buf_{};
  int pos_ = 4;
};

/// Standard normals by the Box-Muller transform, two per pair of uniforms.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(rng_.uniform()));
    const double phi = 2.0 * std::numbers::pi * rng_.uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  Philox4x32 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

enum class RngKind { Philox4x32_10 };

struct SimConfig {
  std::uint64_t paths = 1'000'000;
  std::uint64_t seed = 20230917;
  RngKind rng = RngKind::Philox4x32_10;
  std::uint64_t batch_size = 1u << 16;  // batch b draws from stream b
  unsigned threads = 0;                 // 0: hardware concurrency
};

struct McStageProbabilities {
  std::vector<double> upper, lower;
  std::vector<double> se_upper, se_lower;
  double continuation = 0.0;  // paths still inside the final-stage continuation region
  double ess = 0.0;           // mean sample size at stopping, when sizes were supplied
  double se_ess = 0.0;
  std::uint64_t paths = 0;
};

namespace detail {

struct McTally {
  std::vector<std::uint64_t> upper, lower;
  std::vector<std::uint64_t> stopped;  // paths whose sample size is N_k
  std::uint64_t remaining = 0;
};

inline McTally simulate_batch(const StageDistribution& dist, const BoundarySet& bounds, Sidedness sided,
                              std::uint64_t seed,
                              std::uint64_t batch, std::uint64_t paths) {
  const std::size_t K = dist.stages();
  std::vector<double> mean_inc(K), sd_inc(K), inv_sqrt_t(K), floor(K);
  const double eta = dist.final_drift();
  double prev = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double dt = dist.rates[k] - prev;
    mean_inc[k] = eta * dt;
    sd_inc[k] = std::sqrt(dt);
    inv_sqrt_t[k] = 1.0 / std::sqrt(dist.rates[k]);
    floor[k] = continuation_floor(bounds, sided, k);
    prev = dist.rates[k];
  }
  McTally t;
  t.upper.assign(K, 0);
  t.lower.assign(K, 0);
  t.stopped.assign(K, 0);
  NormalStream normals(seed, batch);
  for (std::uint64_t p = 0; p < paths; ++p) {
    double score = 0.0;
    std::size_t stop = K;
    for (std::size_t k = 0; k < K; ++k) {
      score += mean_inc[k] + sd_inc[k] * normals.next();
      const double z = score * inv_sqrt_t[k];
      if (z >= bounds.upper[k]) {
        ++t.upper[k];
        stop = k;
        break;
      }
      if (z <= floor[k]) {
        ++t.lower[k];
        stop = k;
        break;
      }
    }
    if (stop == K) ++t.remaining;
    ++t.stopped[std::min(stop, K - 1)];
  }
  return t;
}

}  // namespace detail

/// Monte Carlo stagewise exit frequencies with binomial standard errors.
///
/// When `n_per_stage` is given, also returns the mean sample size at stopping and
/// its standard error. Batches are reduced in batch order, so results are
/// bit-identical for a given seed regardless of the thread count.
inline McStageProbabilities mc_exit_probabilities(const StageDistribution& dist, const BoundarySet& bounds,
                                                  Sidedness sided, const SimConfig& cfg,
                                                  const std::vector<double>& n_per_stage = {}) {
  validate_bounds(dist, bounds, sided);
  if (cfg.paths == 0 || cfg.batch_size == 0) throw DomainError("mc: paths and batch size must be positive");
  if (!n_per_stage.empty() && n_per_stage.size() != dist.stages()) {
    throw DomainError("mc: one sample size per stage is required");
  }
  const std::size_t K = dist.stages();
  const std::uint64_t batches = (cfg.paths + cfg.batch_size - 1) / cfg.batch_size;
  std::vector<detail::McTally> tallies(batches);
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t b = next++; b < batches; b = next++) {
      const std::uint64_t n = std::min(cfg.batch_size, cfg.paths - b * cfg.batch_size);
      tallies[b] = detail::simulate_batch(dist, bounds, sided, cfg.seed, b, n);
    }
  };
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, batches));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  std::vector<std::uint64_t> up(K, 0), lo(K, 0), stopped(K, 0);
  std::uint64_t remaining = 0;
  for (const auto& t : tallies) {
    for (std::size_t k = 0; k < K; ++k) {
      up[k] += t.upper[k];
      lo[k] += t.lower[k];
      stopped[k] += t.stopped[k];
    }
    remaining += t.remaining;
  }
  const double n = static_cast<double>(cfg.paths);
  McStageProbabilities out;
  out.paths = cfg.paths;
  auto se = [n](double p) { return std::sqrt(p * (1.0 - p) / n); };
  for (std::size_t k = 0; k < K; ++k) {
    out.upper.push_back(static_cast<double>(up[k]) / n);
    out.lower.push_back(static_cast<double>(lo[k]) / n);
    out.se_upper.push_back(se(out.upper.back()));
    out.se_lower.push_back(se(out.lower.back()));
  }
  out.continuation = static_cast<double>(remaining) / n;
  if (!n_per_stage.empty()) {
    // Weighting by stop frequencies keeps a single-stage design exact: N_1 with zero variance.
    double mean = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double w = static_cast<double>(stopped[k]) / n;
      mean += n_per_stage[k] * w;
      sq += n_per_stage[k] * n_per_stage[k] * w;
    }
    out.ess = mean;
    out.se_ess = std::sqrt(std::max(0.0, sq - mean * mean) / n);
  }
  return out;
}

/// Monte Carlo expected sample size with its standard error.
inline McStageProbabilities mc_expected_sample_size(const StageDistribution& dist, const BoundarySet& bounds,
                                                    Sidedness sided, const std::vector<double>& n_per_stage,
                                                    const SimConfig& cfg) {
  if (n_per_stage.empty()) throw DomainError("mc: sample sizes are required");
  return mc_exit_probabilities(dist, bounds, sided, cfg, n_per_stage);
}

/// True when an analytic value lies within `k` standard errors of a Monte Carlo
/// estimate. The standard error is the larger of the empirical one and the one
/// implied by the analytic probability, so zero-count cells are not overconfident.
inline bool within_se(double analytic, double estimate, double paths, double k = 3.0) {
  const double se_hat = std::sqrt(estimate * (1.0 - estimate) / paths);
  const double p = std::clamp(analytic, 0.0, 1.0);
  const double se_ref = std::sqrt(p * (1.0 - p) / paths);
  const double se = std::max(se_hat, se_ref);
  return std::abs(analytic - estimate) <= k * se;
}

}  // namespace gsdopt
