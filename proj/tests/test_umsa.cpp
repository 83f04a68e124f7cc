#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "tcsde/umsa.hpp"

using namespace tcsde;

namespace {

using P = BlackScholesModel::Params;

ModelConstants constants(std::size_t T) {
  ModelConstants c;
  c.sigma0 = 0.05;
  c.T = T;
  return c;
}

const Observations kObs{{1.3, 0.8, 1.25, 0.85, 1.2}};

/// Small, fast configuration for branch-level checks.
EstimatorConfig small_config() {
  EstimatorConfig cfg;
  cfg.l_min = 1;
  cfg.l_max = 3;
  cfg.particles = 8;
  cfg.theta0 = {0.1, 0.1};
  cfg.schedule.gains = {0.005, 0.001};
  return cfg;
}

}  // namespace

TEST(UmsaWeights, ExactCouplingGivesTwoToMinusT) {
  const BlackScholesModel m(constants(5));
  const auto th = BlackScholesModel::theta(0.1, 0.2);
  RngStream rng(1);
  const auto u = sample_coupled_trajectory(m, th, th, 2, 5, Subordinator::frozen(), rng);
  EXPECT_NEAR(g_fine(m, th, th, u, kObs), std::ldexp(1.0, -5), 1e-15);
  EXPECT_NEAR(g_coarse(m, th, th, u, kObs), std::ldexp(1.0, -5), 1e-15);
}

TEST(UmsaWeights, FineWeightIdentityInLogSpace) {
  const BlackScholesModel m(constants(5));
  const auto th = BlackScholesModel::theta(0.1, 0.2);
  const auto thp = BlackScholesModel::theta(-0.05, 0.35);
  RngStream rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const auto u = sample_coupled_trajectory(m, th, thp, 3, 5, Subordinator::stable(0.75, 0.02), rng);
    double log_check = 0.0, log_g = 0.0;
    for (std::size_t k = 1; k <= 5; ++k) {
      const double lf = m.log_obs_density(th, u.segments[k].fine.x_end(), kObs[k]);
      const double lc = m.log_obs_density(thp, u.segments[k].coarse.x_end(), kObs[k]);
      log_check += std::log(std::exp(lf) + std::exp(lc));
      log_g += lf;
    }
    EXPECT_NEAR(log_g_fine(m, th, thp, u, kObs) + log_check, log_g, 1e-10);
    EXPECT_GT(g_fine(m, th, thp, u, kObs), 0.0);
    EXPECT_GT(g_coarse(m, th, thp, u, kObs), 0.0);
  }
}

TEST(UmsaWeights, WeightedAverageHandCase) {
  const P h_a{{0.0, 0.0}}, h_b{{4.0, 4.0}};
  const auto out = weighted_average(h_a, std::log(1.0), h_b, std::log(3.0));
  EXPECT_NEAR(out[0], 3.0, 1e-15);
  EXPECT_NEAR(out[1], 3.0, 1e-15);
}

TEST(UmsaWeights, WeightedAverageOfEqualArgumentsIgnoresWeights) {
  const P h{{1.5, -2.0}};
  EXPECT_EQ(weighted_average(h, -700.0, h, 3.0), h);
}

TEST(UmsaWeights, WeightedAverageZeroDenominator) {
  const double ninf = -std::numeric_limits<double>::infinity();
  EXPECT_THROW(weighted_average(P{}, ninf, P{}, ninf), DegenerateWeights);
}

TEST(UmsaWeights, WeightedGradientsAreConvexCombinations) {
  const BlackScholesModel m(constants(5));
  const auto th = BlackScholesModel::theta(0.1, 0.2);
  const auto thp = BlackScholesModel::theta(0.0, 0.3);
  const auto clock = Subordinator::stable(0.75, 0.02);
  RngStream rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const auto a = sample_coupled_trajectory(m, th, thp, 2, 5, clock, rng);
    const auto b = sample_coupled_trajectory(m, th, thp, 2, 5, clock, rng);
    const auto hf = weighted_gradient_fine(m, a, b, th, thp, kObs);
    const auto hc = weighted_gradient_coarse(m, a, b, th, thp, kObs);
    const auto fa = coupled_score(m, th, a, kObs, true), fb = coupled_score(m, th, b, kObs, true);
    const auto ca = coupled_score(m, thp, a, kObs, false), cb = coupled_score(m, thp, b, kObs, false);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_LE(hf[i], std::max(fa[i], fb[i]) + 1e-12);
      EXPECT_GE(hf[i], std::min(fa[i], fb[i]) - 1e-12);
      EXPECT_LE(hc[i], std::max(ca[i], cb[i]) + 1e-12);
      EXPECT_GE(hc[i], std::min(ca[i], cb[i]) - 1e-12);
    }
  }
}

TEST(UmsaWeights, SameTrajectoryGivesPlainScore) {
  const BlackScholesModel m(constants(5));
  const auto th = BlackScholesModel::theta(0.1, 0.2);
  const auto thp = BlackScholesModel::theta(0.0, 0.3);
  RngStream rng(4);
  const auto u = sample_coupled_trajectory(m, th, thp, 2, 5, Subordinator::stable(0.75, 0.02), rng);
  const auto hf = weighted_gradient_fine(m, u, u, th, thp, kObs);
  const auto h = score_increment(m, th, u.fine(), kObs);
  EXPECT_NEAR(hf[0], h[0], 1e-12 * std::max(1.0, std::abs(h[0])));
  EXPECT_NEAR(hf[1], h[1], 1e-12 * std::max(1.0, std::abs(h[1])));
}

TEST(UmsaSchedule, ZeroGainKeepsThetaConstant) {
  EstimatorConfig cfg;
  cfg.schedule.gains = {0.0, 0.0};
  const P theta0{{0.3, 0.7}};
  const auto it = sa_iterate<P>(cfg, theta0, 100, {50, 100},
                                [](std::size_t, const P&) { return P{{5.0, -3.0}}; });
  EXPECT_EQ(it[0], theta0);
  EXPECT_EQ(it[1], theta0);
}

TEST(UmsaSchedule, LinearStubMatchesDeterministicRecursion) {
  EstimatorConfig cfg;
  cfg.schedule = StepSchedule{{1.0, 1.0}, 10.0, 1.0};
  cfg.lower = {-1e9, -1e9};
  const P theta0{{2.0, -1.0}};
  const std::vector<std::size_t> checkpoints{100, 1000, 10000};
  const auto it = sa_iterate<P>(cfg, theta0, 10000, checkpoints,
                                [](std::size_t, const P& th) { return th * -1.0; });
  double expected = 1.0;
  std::size_t c = 0;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= 10000; ++n) {
    expected *= 1.0 - 1.0 / (n + 10.0);
    if (c < checkpoints.size() && n == checkpoints[c]) {
      EXPECT_NEAR(it[c][0], 2.0 * expected, 1e-12);
      EXPECT_NEAR(it[c][1], -1.0 * expected, 1e-12);
      EXPECT_LT(std::abs(it[c][0]), previous);
      previous = std::abs(it[c][0]);
      ++c;
    }
  }
  EXPECT_LT(std::abs(it[2][0]), 0.01);
}

TEST(UmsaSchedule, DivergenceGuardAndProjection) {
  EstimatorConfig cfg;
  EXPECT_THROW(guard_and_project(cfg, P{{2e6, 1.0}}), DivergenceError);
  EXPECT_THROW(guard_and_project(cfg, P{{std::nan(""), 1.0}}), DivergenceError);
  const auto p = guard_and_project(cfg, P{{0.5, -0.2}});
  EXPECT_EQ(p[0], 0.5);
  EXPECT_EQ(p[1], 1e-6);
}

TEST(UmsaBranches, CheckpointIsPrefixOfLongerRun) {
  const BlackScholesModel m(constants(5));
  const auto cfg = small_config();
  RngStream a(5), b(5);
  const auto short_run = sa_single(m, cfg, 2, 2, kObs, a);
  const auto long_run = sa_single(m, cfg, 2, 3, kObs, b);
  EXPECT_EQ(short_run.fine_final, long_run.fine_previous);
  RngStream c(6), d(6);
  const auto cs = sa_coupled(m, cfg, 2, 1, kObs, c);
  const auto cl = sa_coupled(m, cfg, 2, 2, kObs, d);
  EXPECT_EQ(cs.fine_final, cl.fine_previous);
  EXPECT_EQ(cs.coarse_final, cl.coarse_previous);
}

TEST(UmsaBranches, CoupledRunIsSeedDeterministic) {
  const BlackScholesModel m(constants(5));
  const auto cfg = small_config();
  RngStream a(7), b(7);
  const auto x = sa_coupled(m, cfg, 2, 2, kObs, a);
  const auto y = sa_coupled(m, cfg, 2, 2, kObs, b);
  EXPECT_EQ(x.fine_final, y.fine_final);
  EXPECT_EQ(x.coarse_final, y.coarse_final);
}

TEST(UmsaBranches, ExactCouplingKeepsLevelsTogether) {
  const BlackScholesModel m(constants(5));
  auto cfg = small_config();
  cfg.clock.kind = Subordinator::Kind::frozen;
  RngStream rng(8);
  for (int p = 0; p <= 3; ++p) {
    const auto out = sa_coupled(m, cfg, 2, p, kObs, rng);
    EXPECT_EQ(out.fine_final, out.coarse_final);
    EXPECT_EQ(out.fine_previous, out.coarse_previous);
  }
}

TEST(UmsaBranches, CoupledCostDoublesWithLevel) {
  const BlackScholesModel m(constants(5));
  const auto cfg = small_config();
  std::vector<double> costs;
  for (int level = 1; level <= 4; ++level) {
    RngStream rng(9);
    CostCounter cost;
    sa_coupled(m, cfg, level, 2, kObs, rng, &cost);
    costs.push_back(static_cast<double>(cost.fine_steps));
  }
  for (std::size_t i = 1; i < costs.size(); ++i) EXPECT_DOUBLE_EQ(costs[i] / costs[i - 1], 2.0);
}

TEST(UmsaAssembly, FourBranches) {
  BranchCheckpoints<P> single;
  single.fine_previous = P{{1.0, 2.0}};
  single.fine_final = P{{1.5, 2.5}};
  EXPECT_EQ(assemble_estimate(single, 0, 0.5), (P{{3.0, 5.0}}));
  EXPECT_EQ(assemble_estimate(single, 2, 0.25), (P{{2.0, 2.0}}));

  BranchCheckpoints<P> coupled;
  coupled.coupled = true;
  coupled.fine_previous = P{{1.0, 1.0}};
  coupled.coarse_previous = P{{0.5, 0.75}};
  coupled.fine_final = P{{2.0, 1.0}};
  coupled.coarse_final = P{{1.0, 0.5}};
  EXPECT_EQ(assemble_estimate(coupled, 0, 0.5), (P{{2.0, 1.0}}));
  EXPECT_EQ(assemble_estimate(coupled, 3, 0.125), (P{{4.0, 2.0}}));
  EXPECT_THROW(assemble_estimate(coupled, 0, 0.0), InvalidParameter);
}

TEST(UmsaAssembly, DrawReproducesCheckpointsBitForBit) {
  const BlackScholesModel m(constants(5));
  auto cfg = small_config();
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    RngStream rng(seed);
    const auto d = umsa_draw(m, cfg, kObs, rng);
    RngStream run = RngStream(seed).substream(1);
    const auto c = d.level == cfg.l_min ? sa_single(m, cfg, d.level, d.horizon, kObs, run)
                                        : sa_coupled(m, cfg, d.level, d.horizon, kObs, run);
    EXPECT_EQ(d.theta_hat, assemble_estimate(c, d.horizon, d.probability));
    const auto lp = cfg.level_pmf();
    const auto pp = cfg.horizon_pmf(d.level);
    EXPECT_EQ(d.probability, lp[d.level - cfg.l_min] * pp[d.horizon]);
  }
}

TEST(UmsaAssembly, PointMassesReturnPlainIterate) {
  const BlackScholesModel m(constants(5));
  auto cfg = small_config();
  cfg.l_max = cfg.l_min;
  cfg.p_cap = 0;
  cfg.p_tail_max = 0;
  RngStream rng(10);
  const auto d = umsa_draw(m, cfg, kObs, rng);
  EXPECT_EQ(d.level, cfg.l_min);
  EXPECT_EQ(d.horizon, 0);
  EXPECT_EQ(d.probability, 1.0);
  RngStream run = RngStream(10).substream(1);
  EXPECT_EQ(d.theta_hat, sa_single(m, cfg, cfg.l_min, 0, kObs, run).fine_final);
}

TEST(UmsaAssembly, TelescopingOverHorizons) {
  const BlackScholesModel m(constants(5));
  auto cfg = small_config();
  cfg.p_cap = 3;
  cfg.p_tail_max = 3;
  const double level_prob = 0.5;
  for (int level : {1, 2}) {
    const auto pmf = cfg.horizon_pmf(level);
    P total{};
    BranchCheckpoints<P> last;
    for (int p = 0; p <= 3; ++p) {
      RngStream run(11);
      last = level == 1 ? sa_single(m, cfg, level, p, kObs, run) : sa_coupled(m, cfg, level, p, kObs, run);
      const double prob = pmf[p] * level_prob;
      total += assemble_estimate(last, p, prob) * prob;
    }
    const P expected = level == 1 ? last.fine_final : last.fine_final - last.coarse_final;
    EXPECT_NEAR(total[0], expected[0], 1e-12);
    EXPECT_NEAR(total[1], expected[1], 1e-12);
  }
}

TEST(UmsaAssembly, DifferenceTermsShrinkWithHorizon) {
  const BlackScholesModel m(constants(5));
  auto cfg = small_config();
  cfg.theta0 = {0.02, 0.05};
  std::vector<P> mean_abs(7, P{});
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    for (int p = 3; p <= 6; ++p) {
      RngStream run(1000 + r);
      const auto c = sa_single(m, cfg, 1, p, kObs, run);
      for (std::size_t i = 0; i < 2; ++i) mean_abs[p][i] += std::abs(c.fine_final[i] - c.fine_previous[i]) / reps;
    }
  }
  for (int p = 4; p <= 6; ++p)
    for (std::size_t i = 0; i < 2; ++i) EXPECT_LT(mean_abs[p][i], mean_abs[p - 1][i]) << "p=" << p << " i=" << i;
}

TEST(UmsaConfig, DefaultLevelPmf) {
  const EstimatorConfig cfg;
  const auto lp = cfg.level_pmf();
  ASSERT_EQ(lp.size(), 6u);
  double s = 0.0;
  for (double x : lp) s += x;
  EXPECT_NEAR(s, 1.0, 1e-15);
  for (std::size_t i = 1; i < lp.size(); ++i) EXPECT_NEAR(lp[i] / lp[i - 1], std::exp2(-1.5), 1e-14);
}

TEST(UmsaConfig, HorizonWeights) {
  const EstimatorConfig cfg;
  EXPECT_EQ(cfg.horizon_weight(0, 3), 32.0);
  EXPECT_EQ(cfg.horizon_weight(5, 3), 1.0);
  EXPECT_NEAR(cfg.horizon_weight(6, 3), std::exp2(-6) * 6 * std::pow(std::log2(6.0), 2), 1e-15);
  EXPECT_EQ(cfg.horizon_weight(6, 4), 0.0);
  EXPECT_EQ(cfg.horizon_weight(5, 4), 0.0);
  EXPECT_EQ(cfg.horizon_weight(4, 4), 2.0);
  EXPECT_EQ(cfg.horizon_weight(8, 3), 0.0);
  EXPECT_EQ(cfg.horizon_pmf(8).size(), 1u);
  EXPECT_EQ(cfg.horizon_pmf(3).size(), 8u);
  EXPECT_EQ(cfg.horizon_size(0), 5u);
  EXPECT_EQ(cfg.horizon_size(3), 40u);
}

TEST(UmsaConfig, ExcludingZeroHorizonEmptiesTopLevel) {
  EstimatorConfig cfg;
  cfg.p_min = 1;
  EXPECT_EQ(cfg.horizon_weight(0, 3), 0.0);
  EXPECT_THROW(cfg.validate(2), ConfigError);
  cfg.l_max = 7;
  EXPECT_NO_THROW(cfg.validate(2));
}

TEST(UmsaConfig, ValidationCollectsViolations) {
  EstimatorConfig cfg;
  cfg.particles = 1;
  cfg.schedule.exponent = 0.4;
  cfg.theta0 = {0.0};
  try {
    cfg.validate(2);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.violations.size(), 3u);
  }
}

TEST(UmsaEstimate, SingleReplicateIsOneDraw) {
  const BlackScholesModel m(constants(5));
  const auto cfg = small_config();
  const RngStream stream(12);
  const auto est = umsa_estimate(m, cfg, kObs, 1, stream);
  RngStream rng = stream.substream(0);
  EXPECT_EQ(est.mean, umsa_draw(m, cfg, kObs, rng).theta_hat);
}

TEST(UmsaEstimate, ThreadCountDoesNotChangeResult) {
  const BlackScholesModel m(constants(5));
  const auto cfg = small_config();
  const RngStream stream(13);
  const auto a = umsa_estimate(m, cfg, kObs, 8, stream, 1);
  const auto b = umsa_estimate(m, cfg, kObs, 8, stream, 3);
  for (std::size_t r = 0; r < 8; ++r) {
    EXPECT_EQ(a.draws[r].theta_hat, b.draws[r].theta_hat);
    EXPECT_EQ(a.draws[r].cost_ops, b.draws[r].cost_ops);
  }
}

TEST(UmsaEstimate, AverageCostMatchesFormula) {
  const BlackScholesModel m(constants(5));
  auto cfg = small_config();
  cfg.particles = 4;
  const std::size_t M = 4000;
  const auto est = umsa_estimate(m, cfg, kObs, M, RngStream(14));
  double total = 0.0;
  for (const auto& d : est.draws) total += static_cast<double>(d.cost_ops);
  const double expected = expected_draw_cost(cfg, kObs.size());
  EXPECT_NEAR(total / M, expected, 0.2 * expected);
}
