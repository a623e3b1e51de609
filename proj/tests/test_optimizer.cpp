#include <gtest/gtest.h>

#include <random>

#include "gsdopt/optimizer.hpp"

using namespace gsdopt;

namespace {

DesignSpec cell(BoundaryFamily f, double beta, int stages, double delta = 0.5) {
  DesignSpec s;
  s.stages = stages;
  s.alpha = 0.025;
  s.beta = beta;
  s.boundary_rule = {std::move(f), Sidedness::OneSided};
  s.endpoint.kind = ContinuousEndpoint{delta, 1.0};
  s.rates = InformationRates::equally_spaced(stages);
  return s;
}

}  // namespace

TEST(Encoding, ZeroVectorDecodesToEqualSpacing) {
  const std::vector<double> t = decode(std::vector<double>{0.0, 0.0});
  EXPECT_NEAR(t[0], 1.0 / 3, 1e-15);
  EXPECT_NEAR(t[1], 2.0 / 3, 1e-15);
}

TEST(Encoding, RoundTrip) {
  for (const auto& t : {std::vector<double>{0.25, 0.5, 0.75}, std::vector<double>{0.05, 0.1, 0.95},
                        std::vector<double>{0.484}}) {
    const std::vector<double> back = decode(encode(t));
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(back[i], t[i], 1e-12);
  }
}

TEST(Encoding, EncodeRejectsNonMonotoneInput) {
  EXPECT_THROW(encode(std::vector<double>{0.5, 0.4}), DomainError);
  EXPECT_THROW(encode(std::vector<double>{0.2, 1.0}), DomainError);
}

TEST(Encoding, DecodeAlwaysFeasible) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-20.0, 20.0);
  std::uniform_int_distribution<int> dim(1, 8), pick(0, 3);
  for (int rep = 0; rep < 10000; ++rep) {
    std::vector<double> x(dim(rng));
    for (double& v : x) {
      const int p = pick(rng);
      v = p == 0 ? 50.0 : (p == 1 ? -50.0 : unif(rng));
    }
    const std::vector<double> t = decode(x);
    double prev = 0.0;
    for (double v : t) {
      ASSERT_GT(v, prev);
      ASSERT_GT(v, 1e-6);
      ASSERT_LT(v, 1.0 - 1e-6);
      prev = v;
    }
  }
}

TEST(NelderMead, ConvexQuadratic) {
  auto f = [](const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += (v - 1.0) * (v - 1.0);
    return s;
  };
  NelderMeadOptions opt;
  opt.tolerance = 1e-16;
  opt.max_evals = 20000;
  const NelderMeadResult r = nelder_mead(f, {0.0, 0.0, 0.0}, opt);
  for (double v : r.x) EXPECT_NEAR(v, 1.0, 1e-6);
  EXPECT_LE(r.value, f({0.0, 0.0, 0.0}));
  EXPECT_TRUE(r.converged);
}

TEST(NelderMead, BudgetExhaustionIsFlagged) {
  auto f = [](const std::vector<double>& x) { return (x[0] - 3.0) * (x[0] - 3.0) + 10.0 * (x[1] + 2.0) * (x[1] + 2.0); };
  NelderMeadOptions opt;
  opt.max_evals = 10;
  const NelderMeadResult r = nelder_mead(f, {0.0, 0.0}, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.value, f({0.0, 0.0}));
}

TEST(Objective, SingleStageIsFixedDesign) {
  const DesignSpec s = cell(PocockSpending{}, 0.1, 1);
  const double zsum = s.z_alpha() + s.z_beta();
  EXPECT_EQ(objective(s, std::vector<double>{}), zsum * zsum);
}

TEST(Objective, PocockOptimumBeatsEqualSpacing) {
  const DesignSpec s = cell(PocockSpending{}, 0.1, 2);
  EXPECT_LT(objective(s, std::vector<double>{0.484}), objective(s, std::vector<double>{0.5}));
}

TEST(Objective, HypressOptimalScheduleInSubjects) {
  DesignSpec s;
  s.stages = 3;
  s.alpha = 0.05;
  s.beta = 0.2;
  s.boundary_rule = {OBrienFlemingSpending{}, Sidedness::TwoSidedSymmetric};
  s.endpoint.kind = BinaryEndpoint{0.40, 0.25};
  s.rates = InformationRates::equally_spaced(3);
  EXPECT_NEAR(objective_to_subjects(s, objective(s, std::vector<double>{0.574, 0.763})), 253.1, 0.3);
}

TEST(Objective, InvalidCandidateIsInfinite) {
  const DesignSpec s = cell(PocockSpending{}, 0.1, 3);
  EXPECT_TRUE(std::isinf(objective(s, std::vector<double>{0.6, 0.5})));
}

TEST(OptimizeRates, TwoStageReferenceCells) {
  struct Case {
    BoundaryFamily f;
    double beta, t1;
  };
  for (const Case& c : {Case{PocockSpending{}, 0.1, 0.484}, Case{OBrienFlemingSpending{}, 0.1, 0.657},
                        Case{HaybittlePeto{}, 0.2, 0.612}}) {
    const OptimResult r = optimize_rates(cell(c.f, c.beta, 2));
    EXPECT_NEAR(r.rates[0], c.t1, 0.005) << family_name(c.f);
    EXPECT_TRUE(r.converged);
  }
}

TEST(OptimizeRates, DominatesEqualSpacingAndIsFeasible) {
  for (const BoundaryFamily& f : {BoundaryFamily{HaybittlePeto{}}, BoundaryFamily{OBrienFlemingSpending{}}}) {
    const DesignSpec s = cell(f, 0.2, 4);
    const OptimResult r = optimize_rates(s);
    EXPECT_LE(r.objective, r.equal_spacing_objective);
    EXPECT_LE(r.objective, objective(s, s.rates.interim()));
    double prev = 0.0;
    for (double t : r.rates.values()) {
      EXPECT_GT(t, prev);
      prev = t;
    }
    EXPECT_EQ(r.rates.values().back(), 1.0);
    EXPECT_FALSE(r.per_restart_log.empty());
  }
}

TEST(OptimizeRates, Deterministic) {
  const DesignSpec s = cell(PocockSpending{}, 0.2, 3);
  const OptimResult a = optimize_rates(s);
  const OptimResult b = optimize_rates(s);
  EXPECT_EQ(a.rates, b.rates);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(OptimizeRates, EffectSizeAndSidednessInvariance) {
  const OptimResult a = optimize_rates(cell(OBrienFlemingSpending{}, 0.1, 2, 0.3));
  const OptimResult b = optimize_rates(cell(OBrienFlemingSpending{}, 0.1, 2, 0.5));
  EXPECT_NEAR(a.rates[0], b.rates[0], 1e-3);

  DesignSpec two = cell(OBrienFlemingSpending{}, 0.1, 2);
  two.alpha = 0.05;
  two.boundary_rule.sidedness = Sidedness::TwoSidedSymmetric;
  EXPECT_NEAR(optimize_rates(two).rates[0], b.rates[0], 1e-3);
}

TEST(OptimizeRates, SingleStageIsTrivial) {
  const OptimResult r = optimize_rates(cell(PocockSpending{}, 0.1, 1));
  EXPECT_EQ(r.rates.size(), 1u);
  EXPECT_EQ(r.objective, r.equal_spacing_objective);
}

TEST(OptimizeRates, StartingSchedulesIncludeEqualSpacingFirst) {
  const auto starts = starting_schedules(4, RestartGrid{});
  ASSERT_EQ(starts.size(), 5u);
  EXPECT_EQ(starts[0], (std::vector<double>{0.25, 0.5, 0.75}));
  EXPECT_NEAR(starts[1][0], 0.15, 1e-15);
  EXPECT_NEAR(starts[2][0], 0.55, 1e-15);
}
