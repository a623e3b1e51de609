#include <gtest/gtest.h>

#include <cmath>

#include "gsdopt/boundaries.hpp"
#include "gsdopt/oracle.hpp"
#include "gsdopt/power.hpp"
#include "oracles.hpp"

using namespace gsdopt;
namespace ref = gsdopt::oracle_ref;

namespace {

std::vector<BoundaryFamily> spending_families() {
  return {PocockSpending{}, OBrienFlemingSpending{}, KimDeMetsPower{1.5}, HwangShihDeCani{-4.0},
          CustomSpending{{{0.3, 0.1}, {0.7, 0.4}, {1.0, 1.0}}}};
}

double total_upper(const StageProbabilities& p) { return p.total_upper(); }

}  // namespace

TEST(Spending, ReachesLevelAtFullInformation) {
  for (const auto& f : spending_families()) {
    for (double level : {0.01, 0.025, 0.1}) EXPECT_EQ(cumulative_spend(f, level, 1.0), level) << family_name(f);
  }
}

TEST(Spending, ClosedFormsAtHalfInformation) {
  // Pocock-type alpha ln(1 + (e - 1) t), frozen from a 30-digit evaluation.
  EXPECT_NEAR(cumulative_spend(PocockSpending{}, 0.025, 0.5), 0.015502862674, 1e-12);
  // OBF-type 2 (1 - Phi(z_{1 - alpha/2} / sqrt(t))) at one-sided 0.025.
  const double z = 2.241402727604947;
  EXPECT_NEAR(cumulative_spend(OBrienFlemingSpending{}, 0.025, 0.5), 2.0 * ref::series_sf(z / std::sqrt(0.5)), 1e-12);
  EXPECT_NEAR(cumulative_spend(OBrienFlemingSpending{}, 0.025, 0.5), 0.00153, 1e-5);
  EXPECT_NEAR(cumulative_spend(KimDeMetsPower{2.0}, 0.025, 0.5), 0.00625, 1e-15);
  EXPECT_NEAR(cumulative_spend(HwangShihDeCani{1.0}, 0.025, 0.5),
              0.025 * (1 - std::exp(-0.5)) / (1 - std::exp(-1.0)), 1e-15);
}

TEST(Spending, NondecreasingInInformation) {
  for (const auto& f : spending_families()) {
    double prev = 0.0;
    for (double t = 0.01; t <= 1.0; t += 0.01) {
      const double v = cumulative_spend(f, 0.025, t);
      EXPECT_GE(v, prev) << family_name(f) << " t=" << t;
      prev = v;
    }
  }
}

TEST(Spending, RejectsInvalidParameters) {
  EXPECT_THROW(validate_family(KimDeMetsPower{-1.0}), DomainError);
  EXPECT_THROW(validate_family(CustomSpending{{{0.5, 0.6}, {0.4, 1.0}}}), DomainError);
}

TEST(EfficacyBounds, SingleStageIsFixedDesignQuantile) {
  const BoundarySet b = solve_efficacy_boundaries({PocockSpending{}, Sidedness::OneSided}, InformationRates({1.0}), 0.025);
  EXPECT_NEAR(b.upper[0], 1.959964, 1e-5);
}

TEST(EfficacyBounds, TwoStagePocockMatchesQuadratureOracle) {
  const BoundarySet b =
      solve_efficacy_boundaries({PocockSpending{}, Sidedness::OneSided}, InformationRates({0.5, 1.0}), 0.025);
  // Frozen from a 30-digit bivariate-normal root solve.
  EXPECT_NEAR(b.upper[0], 2.15699921834, 1e-7);
  EXPECT_NEAR(b.upper[1], 2.20097696716, 1e-7);
}

TEST(EfficacyBounds, TwoStagePocockMatchesMonteCarloBisection) {
  const InformationRates rates({0.5, 1.0});
  const BoundarySet solved = solve_efficacy_boundaries({PocockSpending{}, Sidedness::OneSided}, rates, 0.025);
  SimConfig cfg;
  cfg.paths = 2'000'000;
  auto null_level = [&](double u1, double u2) {
    const McStageProbabilities mc = mc_exit_probabilities({rates, 0.0}, BoundarySet{{u1, u2}, std::nullopt},
                                                          Sidedness::OneSided, cfg);
    return mc.upper[0] + mc.upper[1];
  };
  // Stage 1 alone spends A(0.5); bisect each bound on the simulated exit frequencies.
  double lo = 1.5, hi = 3.0;
  for (int i = 0; i < 30; ++i) {
    const double mid = 0.5 * (lo + hi);
    const auto mc = mc_exit_probabilities({rates, 0.0}, BoundarySet{{mid, 10.0}, std::nullopt}, Sidedness::OneSided, cfg);
    (mc.upper[0] > cumulative_spend(PocockSpending{}, 0.025, 0.5) ? lo : hi) = mid;
  }
  const double u1 = 0.5 * (lo + hi);
  lo = 1.5;
  hi = 3.0;
  for (int i = 0; i < 30; ++i) {
    const double mid = 0.5 * (lo + hi);
    (null_level(u1, mid) > 0.025 ? lo : hi) = mid;
  }
  const double u2 = 0.5 * (lo + hi);
  EXPECT_NEAR(solved.upper[0], 2.157, 0.005);
  EXPECT_NEAR(solved.upper[1], 2.201, 0.005);
  EXPECT_NEAR(solved.upper[0], u1, 0.005);
  EXPECT_NEAR(solved.upper[1], u2, 0.005);
}

TEST(EfficacyBounds, HaybittlePetoTwoSided) {
  const InformationRates rates({0.250, 0.658, 1.0});
  const BoundarySet b =
      solve_efficacy_boundaries({HaybittlePeto{3.0}, Sidedness::TwoSidedSymmetric}, rates, 0.05);
  EXPECT_EQ(b.upper[0], 3.0);
  EXPECT_EQ(b.upper[1], 3.0);
  const StageProbabilities p = propagate({rates, 0.0}, b, Sidedness::TwoSidedSymmetric);
  const double exits[] = {0.0027, 0.0024, 0.0449};
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(p.upper[k] + p.lower[k], exits[k], 1e-4);
}

TEST(EfficacyBounds, LevelExactForEveryFamily) {
  const InformationRates rates({0.2, 0.45, 0.7, 1.0});
  std::vector<BoundaryFamily> all = spending_families();
  all.push_back(HaybittlePeto{3.0});
  for (const auto& f : all) {
    for (Sidedness s : {Sidedness::OneSided, Sidedness::TwoSidedSymmetric}) {
      const BoundarySet b = solve_efficacy_boundaries({f, s}, rates, 0.05);
      const StageProbabilities p = propagate({rates, 0.0}, b, s);
      EXPECT_NEAR(rejection_probability(p, s, false), 0.05, 1e-8) << family_name(f);
    }
  }
}

TEST(EfficacyBounds, ObrienFlemingBoundsDecrease) {
  for (const auto& t : {std::vector<double>{0.1, 0.3, 0.5, 0.8, 1.0}, std::vector<double>{0.6, 0.65, 0.9, 1.0}}) {
    const BoundarySet b =
        solve_efficacy_boundaries({OBrienFlemingSpending{}, Sidedness::OneSided}, InformationRates(t), 0.025);
    for (std::size_t k = 1; k < b.upper.size(); ++k) EXPECT_GT(b.upper[k - 1], b.upper[k]);
  }
}

TEST(EfficacyBounds, TwoSidedPerTailEqualsOneSided) {
  const InformationRates rates({0.3, 0.55, 0.8, 1.0});
  for (const auto& f : spending_families()) {
    const BoundarySet one = solve_efficacy_boundaries({f, Sidedness::OneSided}, rates, 0.025);
    const BoundarySet two = solve_efficacy_boundaries({f, Sidedness::TwoSidedSymmetric}, rates, 0.05);
    // Paths absorbed at a lower bound can no longer cross an upper one, so the
    // per-tail bounds differ slightly; flat early spending (Pocock) shows it most.
    const double tol = std::holds_alternative<PocockSpending>(f) ? 5e-6 : 1e-6;
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(one.upper[k], two.upper[k], tol) << family_name(f);
  }
}

TEST(EfficacyBounds, TinySpendIncrementIsCappedWithWarning) {
  std::vector<Warning> w;
  const BoundarySet b = solve_efficacy_boundaries({OBrienFlemingSpending{}, Sidedness::OneSided},
                                                  InformationRates({0.005, 1.0}), 0.025, {}, &w);
  EXPECT_EQ(b.upper[0], kBoundCap);
  EXPECT_FALSE(w.empty());
}

namespace {

const BoundaryRule kObf{OBrienFlemingSpending{}, Sidedness::OneSided};

}  // namespace

TEST(FutilityBounds, NoneLeavesEfficacyUnchanged) {
  const InformationRates rates({0.5, 1.0});
  const BoundarySet eff = solve_efficacy_boundaries(kObf, rates, 0.025);
  const FutilitySolution s = solve_futility_boundaries(kObf, FutilityRule{}, rates, 0.025, 0.1, eff);
  EXPECT_FALSE(s.bounds.has_futility());
  EXPECT_EQ(s.bounds.upper, eff.upper);
}

TEST(FutilityBounds, NonBindingSpendsBetaUnderAlternative) {
  const InformationRates rates({0.5, 1.0});
  const BoundarySet eff = solve_efficacy_boundaries(kObf, rates, 0.025);
  const FutilityRule fut{FutilityMode::NonBinding, OBrienFlemingSpending{}};
  const FutilitySolution s = solve_futility_boundaries(kObf, fut, rates, 0.025, 0.1, eff);
  ASSERT_TRUE(s.bounds.has_futility());
  const auto& l = *s.bounds.lower;
  EXPECT_LT(l[0], s.bounds.upper[0]);
  EXPECT_EQ(s.bounds.upper, eff.upper);

  const StageProbabilities h1 = propagate({rates, s.drift}, s.bounds);
  EXPECT_NEAR(h1.lower[0], cumulative_spend(OBrienFlemingSpending{}, 0.1, 0.5), 1e-6);
  EXPECT_NEAR(h1.total_lower() + h1.continuation.back(), 0.1, 1e-6);
  EXPECT_NEAR(h1.total_upper(), 0.9, 1e-8);

  // Non-binding: true level respecting the futility bounds is below nominal.
  const StageProbabilities h0 = propagate({rates, 0.0}, s.bounds);
  EXPECT_LT(total_upper(h0), 0.025);
  EXPECT_NEAR(total_upper(propagate({rates, 0.0}, s.bounds.efficacy_only())), 0.025, 1e-8);

  SimConfig cfg;
  cfg.paths = 1'000'000;
  const auto mc = mc_exit_probabilities({rates, s.drift}, s.bounds, Sidedness::OneSided, cfg);
  for (int k = 0; k < 2; ++k) {
    EXPECT_TRUE(within_se(h1.upper[k], mc.upper[k], 1e6)) << "upper " << k;
    EXPECT_TRUE(within_se(h1.lower[k], mc.lower[k], 1e6)) << "lower " << k;
  }
}

TEST(FutilityBounds, BindingKeepsLevelWithContinuationRegions) {
  const InformationRates rates({0.5, 1.0});
  const BoundarySet eff = solve_efficacy_boundaries(kObf, rates, 0.025);
  const FutilityRule fut{FutilityMode::Binding, OBrienFlemingSpending{}};
  const FutilitySolution s = solve_futility_boundaries(kObf, fut, rates, 0.025, 0.1, eff);
  const StageProbabilities h0 = propagate({rates, 0.0}, s.bounds);
  EXPECT_NEAR(total_upper(h0), 0.025, 1e-6);
  EXPECT_LT(s.bounds.upper[1], eff.upper[1]);
  EXPECT_NEAR(propagate({rates, s.drift}, s.bounds).total_upper(), 0.9, 1e-8);
}

TEST(FutilityBounds, PocockThreeStageMatchesQuadratureOracle) {
  const InformationRates rates({0.3, 0.6, 1.0});
  const BoundaryRule rule{PocockSpending{}, Sidedness::OneSided};
  const BoundarySet eff = solve_efficacy_boundaries(rule, rates, 0.025);
  const FutilitySolution s =
      solve_futility_boundaries(rule, {FutilityMode::NonBinding, PocockSpending{}}, rates, 0.025, 0.2, eff);
  const auto& l = *s.bounds.lower;
  const ref::Exits e = ref::exits(rates.vector(), s.drift, {l[0], l[1], l[2]}, s.bounds.upper);
  double beta_spent = 0.0;
  for (int k = 0; k < 2; ++k) {
    beta_spent += e.lower[k];
    EXPECT_NEAR(beta_spent, cumulative_spend(PocockSpending{}, 0.2, rates[k]), 1e-7);
  }
  EXPECT_NEAR(e.upper[0] + e.upper[1] + e.upper[2], 0.8, 1e-7);
}

TEST(FutilityBounds, RejectsTwoSidedDesigns) {
  const BoundaryRule rule{OBrienFlemingSpending{}, Sidedness::TwoSidedSymmetric};
  const InformationRates rates({0.5, 1.0});
  const BoundarySet eff = solve_efficacy_boundaries(rule, rates, 0.05);
  EXPECT_THROW(solve_futility_boundaries(rule, {FutilityMode::NonBinding, PocockSpending{}}, rates, 0.05, 0.1, eff),
               DomainError);
}

TEST(DriftForPower, SingleStageIdentity) {
  const double theta = drift_for_power(InformationRates({1.0}), BoundarySet{{normal_quantile(0.975)}, std::nullopt}, 0.1);
  EXPECT_NEAR(theta, normal_quantile(0.975) + normal_quantile(0.9), 1e-9);
  EXPECT_NEAR(theta, 3.2416, 1e-4);
}

TEST(DriftForPower, IncreasingInPower) {
  const InformationRates rates({0.4, 0.7, 1.0});
  const BoundarySet b = solve_efficacy_boundaries(kObf, rates, 0.025);
  double prev = 0.0;
  for (double beta : {0.5, 0.3, 0.2, 0.1, 0.05}) {
    const double theta = drift_for_power(rates, b, beta);
    EXPECT_GT(theta, prev);
    EXPECT_NEAR(propagate({rates, theta}, b).total_upper(), 1.0 - beta, 1e-9);
    prev = theta;
  }
}

TEST(DriftForPower, PocockOptimalTwoStageAgreesWithMonteCarlo) {
  const InformationRates rates({0.484, 1.0});
  const BoundarySet b = solve_efficacy_boundaries({PocockSpending{}, Sidedness::OneSided}, rates, 0.025);
  const double theta = drift_for_power(rates, b, 0.1);
  SimConfig cfg;
  cfg.paths = 1'000'000;
  const auto mc = mc_exit_probabilities({rates, theta}, b, Sidedness::OneSided, cfg);
  EXPECT_TRUE(within_se(0.9, mc.upper[0] + mc.upper[1], 1e6));
}
