#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gsdopt/error.hpp"
#include "gsdopt/gauss.hpp"
#include "gsdopt/normal.hpp"

namespace gsdopt {

/// Classical Haybittle-Peto rule: fixed interim bound, final bound solved for the level.
struct HaybittlePeto {
  double interim_bound = 3.0;
  friend bool operator==(const HaybittlePeto&, const HaybittlePeto&) = default;
};

/// Lan-DeMets Pocock-type spending, a * ln(1 + (e - 1) t).
struct PocockSpending {
  friend bool operator==(const PocockSpending&, const PocockSpending&) = default;
};

/// Lan-DeMets O'Brien-Fleming-type spending, 2 (1 - Phi(z_{1-a/2} / sqrt(t))).
struct OBrienFlemingSpending {
  friend bool operator==(const OBrienFlemingSpending&, const OBrienFlemingSpending&) = default;
};

/// Kim-DeMets power family, a * t^rho.
struct KimDeMetsPower {
  double rho = 1.0;
  friend bool operator==(const KimDeMetsPower&, const KimDeMetsPower&) = default;
};

/// Hwang-Shih-DeCani family, a (1 - e^{-gamma t}) / (1 - e^{-gamma}).
struct HwangShihDeCani {
  double gamma = -4.0;
  friend bool operator==(const HwangShihDeCani&, const HwangShihDeCani&) = default;
};

/// User supplied cumulative spending, linearly interpolated through (0, 0).
/// Values are rescaled so that the last point maps onto the requested level.
struct CustomSpending {
  std::vector<std::pair<double, double>> table;
  friend bool operator==(const CustomSpending&, const CustomSpending&) = default;
};

using BoundaryFamily = std::variant<HaybittlePeto, PocockSpending, OBrienFlemingSpending,
                                    KimDeMetsPower, HwangShihDeCani, CustomSpending>;

struct BoundaryRule {
  BoundaryFamily family = OBrienFlemingSpending{};
  Sidedness sidedness = Sidedness::OneSided;
  friend bool operator==(const BoundaryRule&, const BoundaryRule&) = default;
};

inline bool is_spending_family(const BoundaryFamily& f) {
  return !std::holds_alternative<HaybittlePeto>(f);
}

inline std::string family_name(const BoundaryFamily& f) {
  struct V {
    std::string operator()(const HaybittlePeto&) const { return "haybittle-peto"; }
    std::string operator()(const PocockSpending&) const { return "pocock"; }
    std::string operator()(const OBrienFlemingSpending&) const { return "obrien-fleming"; }
    std::string operator()(const KimDeMetsPower&) const { return "kim-demets"; }
    std::string operator()(const HwangShihDeCani&) const { return "hwang-shih-decani"; }
    std::string operator()(const CustomSpending&) const { return "custom"; }
  };
  return std::visit(V{}, f);
}

inline void validate_family(const BoundaryFamily& f) {
  if (const auto* hp = std::get_if<HaybittlePeto>(&f)) {
    if (!(hp->interim_bound > 0.0) || !std::isfinite(hp->interim_bound)) {
      throw DomainError("haybittle-peto: interim bound must be positive and finite");
    }
  } else if (const auto* kd = std::get_if<KimDeMetsPower>(&f)) {
    if (!(kd->rho > 0.0)) throw DomainError("kim-demets: rho must be positive");
  } else if (const auto* hsd = std::get_if<HwangShihDeCani>(&f)) {
    if (hsd->gamma == 0.0 || !std::isfinite(hsd->gamma)) {
      throw DomainError("hwang-shih-decani: gamma must be nonzero");
    }
  } else if (const auto* cs = std::get_if<CustomSpending>(&f)) {
    const auto& tab = cs->table;
    if (tab.empty()) throw DomainError("custom spending: table is empty");
    double pt = 0.0, pv = 0.0;
    for (std::size_t i = 0; i < tab.size(); ++i) {
      const auto [t, v] = tab[i];
      if (!(t > pt) || t > 1.0) {
        throw DomainError("custom spending: information fractions must increase within (0, 1]");
      }
      if (v < pv) throw DomainError("custom spending: cumulative spend must be nondecreasing");
      pt = t;
      pv = v;
    }
    if (tab.back().first != 1.0) throw DomainError("custom spending: table must end at t = 1");
    if (!(tab.back().second > 0.0)) throw DomainError("custom spending: total spend must be positive");
  }
}

/// Cumulative error spent by information fraction t for total (per-tail) level `level`.
inline double cumulative_spend(const BoundaryFamily& f, double level, double t) {
  if (!(t > 0.0 && t <= 1.0)) throw DomainError("cumulative_spend: t must lie in (0, 1]");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("cumulative_spend: level must lie in (0, 1)");
  if (t == 1.0) return level;

  struct V {
    double level, t;
    double operator()(const HaybittlePeto&) const {
      throw DomainError("cumulative_spend: haybittle-peto is a fixed-bound rule, not a spending family");
    }
    double operator()(const PocockSpending&) const {
      return level * std::log1p((std::numbers::e - 1.0) * t);
    }
    double operator()(const OBrienFlemingSpending&) const {
      return 2.0 * normal_sf(normal_quantile(1.0 - level / 2.0) / std::sqrt(t));
    }
    double operator()(const KimDeMetsPower& kd) const { return level * std::pow(t, kd.rho); }
    double operator()(const HwangShihDeCani& h) const {
      return level * std::expm1(-h.gamma * t) / std::expm1(-h.gamma);
    }
    double operator()(const CustomSpending& c) const {
      const auto& tab = c.table;
      const double scale = level / tab.back().second;
      double t0 = 0.0, v0 = 0.0;
      for (const auto& [t1, v1] : tab) {
        if (t <= t1) return scale * (v0 + (v1 - v0) * (t - t0) / (t1 - t0));
        t0 = t1;
        v0 = v1;
      }
      return level;
    }
  };
  validate_family(f);
  return std::visit(V{level, t}, f);
}

inline double cumulative_spend(const BoundaryRule& rule, double level, double t) {
  return cumulative_spend(rule.family, level, t);
}

}  // namespace gsdopt
