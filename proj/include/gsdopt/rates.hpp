#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gsdopt/error.hpp"

namespace gsdopt {

/// Strictly increasing schedule of information fractions t_1 < ... < t_K = 1.
class InformationRates {
 public:
  InformationRates() : t_{1.0} {}

  explicit InformationRates(std::vector<double> t) : t_(std::move(t)) {
    if (t_.empty()) throw DomainError("information rates: at least one stage is required");
    for (std::size_t k = 0; k < t_.size(); ++k) {
      if (!std::isfinite(t_[k]) || t_[k] <= 0.0) {
        throw DomainError("information rates: rates must be positive");
      }
      if (k > 0 && !(t_[k] > t_[k - 1])) {
        throw DomainError("rates not strictly increasing");
      }
    }
    if (t_.back() != 1.0) throw DomainError("information rates: final rate must equal 1");
  }

  /// Builds t = (interim..., 1) from the K-1 interim fractions.
  static InformationRates from_interims(std::span<const double> interim) {
    std::vector<double> t(interim.begin(), interim.end());
    t.push_back(1.0);
    return InformationRates(std::move(t));
  }

  static InformationRates equally_spaced(int stages) {
    if (stages < 1) throw DomainError("information rates: at least one stage is required");
    std::vector<double> t(static_cast<std::size_t>(stages));
    for (int k = 0; k < stages; ++k) t[k] = static_cast<double>(k + 1) / stages;
    t.back() = 1.0;
    return InformationRates(std::move(t));
  }

  std::size_t size() const { return t_.size(); }
  int stages() const { return static_cast<int>(t_.size()); }
  double operator[](std::size_t k) const { return t_[k]; }
  double front() const { return t_.front(); }
  std::span<const double> values() const { return t_; }
  std::span<const double> interim() const { return {t_.data(), t_.size() - 1}; }
  const std::vector<double>& vector() const { return t_; }

  friend bool operator==(const InformationRates&, const InformationRates&) = default;

 private:
  std::vector<double> t_;
};

}  // namespace gsdopt
