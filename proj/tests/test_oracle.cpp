#include <gtest/gtest.h>

#include "gsdopt/design.hpp"
#include "gsdopt/oracle.hpp"

using namespace gsdopt;

TEST(Philox, KnownAnswerVectors) {
  using B = Philox4x32::Block;
  EXPECT_EQ(Philox4x32::generate({0, 0, 0, 0}, {0, 0}), (B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, UniformsInOpenInterval) {
  Philox4x32 g(1, 2);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = g.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(Philox, StreamsDiffer) {
  Philox4x32 a(5, 0), b(5, 1), c(5, 0);
  EXPECT_NE(a.next_u32(), b.next_u32());
  Philox4x32 d(5, 0);
  EXPECT_EQ(c.next_u32(), d.next_u32());
}

TEST(MonteCarlo, SingleStageTail) {
  SimConfig cfg;
  cfg.paths = 10'000'000;
  const auto mc = mc_exit_probabilities({InformationRates({1.0}), 0.0}, BoundarySet{{normal_quantile(0.975)}, std::nullopt},
                                        Sidedness::OneSided, cfg);
  EXPECT_LE(std::abs(mc.upper[0] - 0.025), 3.0 * mc.se_upper[0]);
}

TEST(MonteCarlo, ReproducibleAcrossThreadCounts) {
  const StageDistribution d{InformationRates({0.4, 0.7, 1.0}), 1.1};
  const BoundarySet b{{2.8, 2.4, 2.0}, std::nullopt};
  SimConfig one;
  one.paths = 300'000;
  one.batch_size = 20'000;
  one.threads = 1;
  SimConfig many = one;
  many.threads = 4;
  const auto a = mc_exit_probabilities(d, b, Sidedness::TwoSidedSymmetric, one, {10, 20, 30});
  const auto c = mc_exit_probabilities(d, b, Sidedness::TwoSidedSymmetric, many, {10, 20, 30});
  EXPECT_EQ(a.upper, c.upper);
  EXPECT_EQ(a.lower, c.lower);
  EXPECT_EQ(a.ess, c.ess);
  SimConfig other = one;
  other.seed += 1;
  EXPECT_NE(mc_exit_probabilities(d, b, Sidedness::TwoSidedSymmetric, other).upper, a.upper);
}

TEST(MonteCarlo, HypressOptimalUnderAlternative) {
  DesignSpec s;
  s.stages = 3;
  s.alpha = 0.05;
  s.beta = 0.2;
  s.boundary_rule = {OBrienFlemingSpending{}, Sidedness::TwoSidedSymmetric};
  s.endpoint.kind = BinaryEndpoint{0.40, 0.25};
  s.rates = InformationRates({0.574, 0.763, 1.0});
  const DesignSolution sol = solve_design(s);
  SimConfig cfg;
  cfg.paths = 2'000'000;
  const auto mc = mc_exit_probabilities({s.rates, sol.drift}, sol.bounds, s.sidedness(), cfg);
  const StageProbabilities an = propagate({s.rates, sol.drift}, sol.bounds, s.sidedness());
  const double published[] = {0.2760, 0.2802, 0.2438};
  for (int k = 0; k < 3; ++k) {
    const double est = mc.upper[k] + mc.lower[k];
    EXPECT_TRUE(within_se(an.upper[k] + an.lower[k], est, 2e6)) << "stage " << k + 1;
    EXPECT_NEAR(est, published[k], 2e-3);
  }
}

TEST(MonteCarlo, SingleStageSampleSizeHasNoVariance) {
  SimConfig cfg;
  cfg.paths = 10'000;
  const auto mc = mc_expected_sample_size({InformationRates({1.0}), 3.0}, BoundarySet{{1.96}, std::nullopt},
                                          Sidedness::OneSided, {168.1}, cfg);
  EXPECT_EQ(mc.ess, 168.1);
  EXPECT_EQ(mc.se_ess, 0.0);
}

TEST(MonteCarlo, RejectsBadConfiguration) {
  SimConfig cfg;
  cfg.paths = 0;
  EXPECT_THROW(mc_exit_probabilities({InformationRates({1.0}), 0.0}, BoundarySet{{1.96}, std::nullopt},
                                     Sidedness::OneSided, cfg),
               DomainError);
  EXPECT_THROW(mc_expected_sample_size({InformationRates({1.0}), 0.0}, BoundarySet{{1.96}, std::nullopt},
                                       Sidedness::OneSided, {}, SimConfig{}),
               DomainError);
}

TEST(WithinSe, UsesLargerOfEmpiricalAndAnalyticError) {
  EXPECT_TRUE(within_se(0.5, 0.5015, 1e6));
  EXPECT_FALSE(within_se(0.5, 0.502, 1e6));
  // Zero observed count: the analytic error still applies.
  EXPECT_TRUE(within_se(1e-6, 0.0, 1e6));
}
