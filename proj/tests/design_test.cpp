#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "cpsband/design.hpp"
#include "cpsband/error.hpp"
#include "cpsband/inclusion_table.hpp"
#include "cpsband/oracle.hpp"
#include "cpsband/rng.hpp"

namespace cpsband {
namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::vector<double> random_p(RngStream& rng, std::size_t units, double lo, double hi) {
  std::vector<double> p(units);
  for (double& v : p) v = lo + (hi - lo) * rng.uniform();
  return p;
}

TEST(PipsProbabilities, EqualWeights) {
  const auto pi = compute_pips_probabilities(std::vector<double>{1, 1, 1, 1}, 2);
  for (double v : pi.pi) EXPECT_NEAR(v, 0.5, 1e-12);
  EXPECT_EQ(pi.n, 2);
}

TEST(PipsProbabilities, ProportionalWithoutClipping) {
  const auto pi = compute_pips_probabilities(std::vector<double>{1, 2, 3, 4}, 2);
  const std::vector<double> expected{0.2, 0.4, 0.6, 0.8};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(pi.pi[i], expected[i], 1e-12);
}

TEST(PipsProbabilities, ClippingWaterfall) {
  const std::vector<double> x{1, 1, 1, 10};
  const auto pi = compute_pips_probabilities(x, 2);
  EXPECT_NEAR(pi.pi[0], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(pi.pi[1], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(pi.pi[2], 1.0 / 3.0, 1e-12);
  EXPECT_EQ(pi.pi[3], 1.0);
  EXPECT_NEAR(sum(pi.pi), 2.0, 1e-9);
  // Fixed point of the min operator: unclipped units share one constant c/sum(x).
  const double ratio = pi.pi[0] / x[0];
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(pi.pi[i], std::min(ratio * x[i], 1.0), 1e-12);
}

TEST(PipsProbabilities, RejectsBadInput) {
  EXPECT_THROW(compute_pips_probabilities(std::vector<double>{1, 2}, 0), InvalidArgument);
  EXPECT_THROW(compute_pips_probabilities(std::vector<double>{1, 2}, 3), InvalidArgument);
  EXPECT_THROW(compute_pips_probabilities(std::vector<double>{1, 0}, 1), InvalidArgument);
  EXPECT_THROW(compute_pips_probabilities(std::vector<double>{1, -2}, 1), InvalidArgument);
}

TEST(PipsProbabilities, SumAndRangeOnRandomSizes) {
  RngStream rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t units = 1 + static_cast<std::size_t>(rng.uniform() * 300);
    std::vector<double> x(units);
    for (double& v : x) v = std::exp(2.0 * rng.normal());
    const int n = 1 + static_cast<int>(rng.uniform() * units);
    const auto pi = compute_pips_probabilities(x, n);
    EXPECT_LT(std::abs(sum(pi.pi) - n), 1e-9);
    for (double v : pi.pi) {
      EXPECT_GT(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(PipsProbabilities, MonotoneInOwnSize) {
  RngStream rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(40);
    for (double& v : x) v = std::exp(rng.normal());
    const auto j = static_cast<std::size_t>(rng.uniform() * x.size());
    const auto before = compute_pips_probabilities(x, 8);
    x[j] *= 1.0 + 3.0 * rng.uniform();
    const auto after = compute_pips_probabilities(x, 8);
    EXPECT_GE(after.pi[j], before.pi[j] - 1e-12);
  }
}

TEST(CpsInclusion, SymmetricParameters) {
  const auto pi = cps_inclusion_from_poisson({{0.5, 0.5, 0.5}, 2});
  for (double v : pi.pi) EXPECT_NEAR(v, 2.0 / 3.0, 1e-14);
}

TEST(CpsInclusion, ThreeUnitEnumeration) {
  // Size-2 samples {1,2}, {1,3}, {2,3} have odds products 0.25, 1, 4.
  const auto pi = cps_inclusion_from_poisson({{0.2, 0.5, 0.8}, 2});
  EXPECT_NEAR(pi.pi[0], 1.25 / 5.25, 1e-14);
  EXPECT_NEAR(pi.pi[1], 4.25 / 5.25, 1e-14);
  EXPECT_NEAR(pi.pi[2], 5.0 / 5.25, 1e-14);
  EXPECT_NEAR(pi.pi[0], 0.238095, 1e-6);
  EXPECT_NEAR(pi.pi[1], 0.809524, 1e-6);
  EXPECT_NEAR(pi.pi[2], 0.952381, 1e-6);
}

TEST(CpsInclusion, FullSample) {
  const auto pi = cps_inclusion_from_poisson({{0.1, 0.7, 0.3, 0.9}, 4});
  for (double v : pi.pi) EXPECT_EQ(v, 1.0);
}

TEST(CpsInclusion, CertaintiesReduceTheProblem) {
  // With unit 0 certain, the rest is CPS with n - 1 on the remaining units.
  const auto full = cps_inclusion_from_poisson({{1.0, 0.2, 0.5, 0.8}, 3});
  EXPECT_EQ(full.pi[0], 1.0);
  EXPECT_NEAR(full.pi[1], 1.25 / 5.25, 1e-14);
  EXPECT_NEAR(full.pi[3], 5.0 / 5.25, 1e-14);
  EXPECT_THROW(cps_inclusion_from_poisson({{1.0, 1.0, 0.5}, 1}), InvalidArgument);
  EXPECT_THROW(cps_inclusion_from_poisson({{0.0, 0.5}, 1}), InvalidArgument);
}

TEST(CpsInclusion, MatchesEnumerationUpToTenUnits) {
  RngStream rng(21);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t units = 1 + static_cast<std::size_t>(rng.uniform() * 10);
    const int n = static_cast<int>(rng.uniform() * (units + 1));
    const PoissonParams params{random_p(rng, units, 0.02, 0.98), n};
    const auto exact = exact_inclusion_orders(enumerate_cps_distribution(params));
    const auto pi = cps_inclusion_from_poisson(params);
    for (std::size_t i = 0; i < units; ++i) EXPECT_NEAR(pi.pi[i], exact.first[i], 1e-12);
  }
}

TEST(CpsInclusion, LargePopulationStaysFinite) {
  // Tiny and near-one p in one design would overflow unscaled symmetric sums.
  RngStream rng(5);
  std::vector<double> p(5000);
  for (double& v : p) v = std::clamp(std::exp(3.0 * rng.normal() - 3.0), 1e-6, 1.0 - 1e-6);
  const auto pi = cps_inclusion_from_poisson(canonicalize({p, 700}));
  EXPECT_NEAR(sum(pi.pi), 700.0, 1e-8);
  for (double v : pi.pi) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0 + 1e-12);
  }
}

TEST(InclusionTable, SizeProbabilitiesMatchEnumeration) {
  const std::vector<double> p{0.2, 0.5, 0.8, 0.35};
  const InclusionTable table(p, 2);
  const auto poisson = enumerate_poisson_distribution(p);
  double size2 = 0.0;
  for (const auto& e : poisson.samples) {
    if (std::popcount(e.mask) == 2) size2 += e.probability;
  }
  EXPECT_NEAR(std::exp(table.log_size_probability(2, 0)), size2, 1e-14);
  EXPECT_NEAR(table.include_probability(0, 2) + table.exclude_probability(0, 2), 1.0, 1e-14);
  EXPECT_EQ(table.include_probability(1, 0), 0.0);
}

TEST(Canonicalize, PreservesLawAndSumsToN) {
  const PoissonParams params{{0.2, 0.5, 0.8}, 2};
  const auto canon = canonicalize(params);
  EXPECT_TRUE(canon.is_canonical());
  EXPECT_FALSE(params.is_canonical());
  const auto a = cps_inclusion_from_poisson(params);
  const auto b = cps_inclusion_from_poisson(canon);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a.pi[i], b.pi[i], 1e-14);
  // Odds ratios are preserved up to one common factor.
  auto odds = [](double v) { return v / (1.0 - v); };
  EXPECT_NEAR(odds(canon.p[1]) / odds(canon.p[0]), 4.0, 1e-10);
  EXPECT_NEAR(odds(canon.p[2]) / odds(canon.p[1]), 4.0, 1e-10);
}

TEST(PoissonFromCps, SymmetricFixedPoint) {
  const auto p = poisson_from_cps_inclusion({{2.0 / 3, 2.0 / 3, 2.0 / 3}, 2});
  for (double v : p.p) EXPECT_NEAR(v, 2.0 / 3.0, 1e-10);
}

TEST(PoissonFromCps, InvertsThreeUnitExample) {
  const InclusionProbabilities target{{1.25 / 5.25, 4.25 / 5.25, 5.0 / 5.25}, 2};
  const auto p = poisson_from_cps_inclusion(target);
  EXPECT_TRUE(p.is_canonical());
  // The canonical representative of odds (0.25, 1, 4) with sum(p) == 2.
  const auto expected = canonicalize({{0.2, 0.5, 0.8}, 2});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p.p[i], expected.p[i], 1e-9);
  const auto back = cps_inclusion_from_poisson(p);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(std::abs(back.pi[i] - target.pi[i]), 1e-10);
}

TEST(PoissonFromCps, RoundTripOnRandomInstances) {
  RngStream rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t units = 2 + static_cast<std::size_t>(rng.uniform() * 199);
    const int n = 1 + static_cast<int>(rng.uniform() * (units - 1));
    const PoissonParams params{random_p(rng, units, 0.05, 0.95), n};
    const auto pi = cps_inclusion_from_poisson(params);
    const auto p = poisson_from_cps_inclusion(pi);
    EXPECT_TRUE(p.is_canonical());
    const auto back = cps_inclusion_from_poisson(p);
    double err = 0.0;
    for (std::size_t i = 0; i < units; ++i) err = std::max(err, std::abs(back.pi[i] - pi.pi[i]));
    EXPECT_LT(err, 1e-10) << "N=" << units << " n=" << n;
    // Both parameter vectors are representatives of one law.
    const auto canon = canonicalize(params);
    for (std::size_t i = 0; i < units; ++i) EXPECT_NEAR(p.p[i], canon.p[i], 1e-6);
  }
}

TEST(PoissonFromCps, KeepsCertainties) {
  const auto pi = compute_pips_probabilities(std::vector<double>{1, 1, 1, 10}, 2);
  const auto p = poisson_from_cps_inclusion(pi);
  EXPECT_EQ(p.p[3], 1.0);
  const auto back = cps_inclusion_from_poisson(p);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(back.pi[i], pi.pi[i], 1e-10);
}

TEST(PoissonFromCps, RejectsInconsistentInput) {
  EXPECT_THROW(poisson_from_cps_inclusion({{0.5, 0.5, 0.5}, 2}), InvalidArgument);
  EXPECT_THROW(poisson_from_cps_inclusion({{0.0, 1.0}, 1}), InvalidArgument);
  EXPECT_THROW(poisson_from_cps_inclusion({{0.5, 0.5}, 0}), InvalidArgument);
}

TEST(PoissonFromCps, IterationCapReportsResidual) {
  InversionOptions options;
  options.max_iterations = 1;
  options.tolerance = 1e-300;
  try {
    poisson_from_cps_inclusion({{0.1, 0.3, 0.6, 0.95, 0.05}, 2}, options);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 0.0);
    EXPECT_EQ(e.iterations(), 1);
  }
}

TEST(HajekApproximation, RatioApproachesOne) {
  // max |pi_i / p_i - 1| shrinks as d_N grows.
  RngStream rng(41);
  double previous = 1.0;
  for (std::size_t units : {20, 60, 200}) {
    const auto p = canonicalize({random_p(rng, units, 0.2, 0.8), static_cast<int>(units / 2)});
    const auto pi = cps_inclusion_from_poisson(p);
    double worst = 0.0;
    for (std::size_t i = 0; i < units; ++i) worst = std::max(worst, std::abs(pi.pi[i] / p.p[i] - 1.0));
    EXPECT_LT(worst, previous);
    previous = worst;
  }
  EXPECT_LT(previous, 0.05);
}

TEST(SolveTheta, ConstantWeights) {
  const std::vector<double> w(10, 3.0);
  EXPECT_NEAR(solve_theta(0.1, w), 0.1, 1e-10);
  EXPECT_NEAR(solve_theta(0.5, w), 0.5, 1e-10);
}

TEST(SolveTheta, TwoPointWeights) {
  const std::vector<double> w{1, 3, 1, 3};
  const double theta = solve_theta(0.3, w);
  EXPECT_NEAR(theta, 0.3, 1e-10);
  EXPECT_NEAR(0.5 * std::min(theta / 2, 1.0) + 0.5 * std::min(1.5 * theta, 1.0), 0.3, 1e-10);
}

TEST(SolveTheta, ClippedBranch) {
  // 0.5 min(theta/2, 1) + 0.5 min(3 theta/2, 1) = 0.8 needs the large unit clipped:
  // 0.5 theta/2 + 0.5 = 0.8, theta = 1.2.
  const std::vector<double> w{1, 3};
  EXPECT_NEAR(solve_theta(0.8, w), 1.2, 1e-10);
  EXPECT_THROW(solve_theta(0.0, w), InvalidArgument);
  EXPECT_THROW(solve_theta(1.0, w), InvalidArgument);
}

TEST(TruncatedWeight, CapAtMeanOverTheta) {
  EXPECT_EQ(truncated_weight(1.0, 0.5, 1.0), 1.0);
  EXPECT_EQ(truncated_weight(10.0, 0.5, 1.0), 2.0);
  EXPECT_EQ(truncated_weight(2.0, 0.5, 1.0), 2.0);
}

TEST(DesignVariance, Examples) {
  EXPECT_DOUBLE_EQ(design_variance_d(std::vector<double>{0.5, 0.5}), 0.5);
  EXPECT_EQ(design_variance_d(std::vector<double>{1, 1, 1}), 0.0);
  EXPECT_NEAR(design_variance_d(std::vector<double>{0.2, 0.5, 0.8}), 0.57, 1e-15);
}

}  // namespace
}  // namespace cpsband
