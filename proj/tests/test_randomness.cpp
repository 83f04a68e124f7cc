#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tcsde/random.hpp"
#include "test_support.hpp"

using namespace tcsde;
using tcsde::testing::mean_se;
using tcsde::testing::MeanSe;

TEST(Randomness, ReplayIsDeterministic) {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.uniform(), b.uniform());
    EXPECT_EQ(a.normal(), b.normal());
    EXPECT_EQ(a.exponential(), b.exponential());
    EXPECT_EQ(stable_positive(0.6, a), stable_positive(0.6, b));
  }
}

TEST(Randomness, DistinctStreamsDiffer) {
  RngStream a(42, 0), b(42, 1);
  int equal = 0;
  for (int i = 0; i < 1000; ++i) equal += a.next_u64() == b.next_u64();
  EXPECT_EQ(equal, 0);
  const auto s1 = a.substream(3), s2 = a.substream(3), s3 = a.substream(4);
  EXPECT_EQ(s1.stream_id(), s2.stream_id());
  EXPECT_NE(s1.stream_id(), s3.stream_id());
}

TEST(Randomness, DistinctStreamsUncorrelated) {
  RngStream a(5, 10), b(5, 11);
  const int n = 200000;
  double sxy = 0.0;
  for (int i = 0; i < n; ++i) sxy += a.normal() * b.normal();
  EXPECT_LT(std::abs(sxy / n), 4.0 / std::sqrt(n));
}

TEST(Randomness, UniformMean) {
  RngStream rng(1);
  const int n = 1000000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
  }
  EXPECT_NEAR(s / n, 0.5, 3.0 / std::sqrt(12.0 * n));
}

TEST(Randomness, NormalVariance) {
  RngStream rng(2);
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  const double var = s2 / n - (s / n) * (s / n);
  EXPECT_NEAR(var, 1.0, 0.01);
}

TEST(Randomness, ExponentialMean) {
  RngStream rng(3);
  const int n = 1000000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += rng.exponential();
  EXPECT_NEAR(s / n, 1.0, 3.0 / std::sqrt(n));
}

TEST(Randomness, StableRejectsBadIndex) {
  RngStream rng(4);
  EXPECT_THROW(stable_positive(0.0, rng), InvalidParameter);
  EXPECT_THROW(stable_positive(1.0, rng), InvalidParameter);
  EXPECT_THROW(stable_positive(-0.3, rng), InvalidParameter);
}

TEST(Randomness, StableDrawsArePositive) {
  RngStream rng(5);
  for (double a : {0.1, 0.5, 0.75, 0.99})
    for (int i = 0; i < 10000; ++i) ASSERT_GT(stable_positive(a, rng), 0.0);
}

namespace {

// e^{-eta^alpha}, evaluated independently to 17 digits
struct LaplaceCase {
  double alpha, eta, value;
};

constexpr LaplaceCase kLaplace[] = {
    {0.25, 0.5, 0.43132370493159228}, {0.25, 1.0, 0.36787944117144233},
    {0.25, 2.0, 0.30446257219499123}, {0.5, 0.5, 0.49306869139523979},
    {0.5, 1.0, 0.36787944117144233},  {0.5, 2.0, 0.24311673443421419},
    {0.75, 0.5, 0.55178127205894845}, {0.75, 1.0, 0.36787944117144233},
    {0.75, 2.0, 0.18604013843591527}, {0.9, 0.5, 0.58515018905802552},
    {0.9, 1.0, 0.36787944117144233},  {0.9, 2.0, 0.15473118112156398},
};

MeanSe laplace_estimate(double alpha, double eta, int n, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = std::exp(-eta * stable_positive(alpha, rng));
  return mean_se(v);
}

}  // namespace

TEST(Randomness, FrozenLaplaceValuesMatchClosedForm) {
  for (const auto& c : kLaplace) EXPECT_NEAR(c.value, std::exp(-std::pow(c.eta, c.alpha)), 1e-15);
}

TEST(Randomness, StableLaplaceHalfAtOne) {
  const auto e = laplace_estimate(0.5, 1.0, 1000000, 11);
  EXPECT_NEAR(e.mean, 0.36787944117144233, 3.0 * e.se);
}

TEST(Randomness, StableLaplaceThreeQuartersAtTwo) {
  const auto e = laplace_estimate(0.75, 2.0, 1000000, 12);
  EXPECT_NEAR(e.mean, 0.18604013843591527, 3.0 * e.se);
}

TEST(Randomness, StableLaplaceTransformGrid) {
  std::uint64_t seed = 100;
  for (const auto& c : kLaplace) {
    const auto e = laplace_estimate(c.alpha, c.eta, 200000, seed++);
    EXPECT_NEAR(e.mean, c.value, 3.0 * e.se) << "alpha=" << c.alpha << " eta=" << c.eta;
  }
}

TEST(Randomness, CategoricalPointMass) {
  RngStream rng(6);
  const std::vector<double> w{0.0, 1.0, 0.0};
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(categorical(w, rng), 1u);
}

TEST(Randomness, CategoricalSymmetric) {
  RngStream rng(7);
  const std::vector<double> w{1.0, 1.0};
  const int n = 100000;
  int zeros = 0;
  for (int i = 0; i < n; ++i) zeros += categorical(w, rng) == 0;
  EXPECT_NEAR(static_cast<double>(zeros) / n, 0.5, 3.0 * std::sqrt(0.25 / n));
}

TEST(Randomness, CategoricalOneToThree) {
  RngStream rng(8);
  const std::vector<double> w{1.0, 3.0};
  const int n = 100000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += categorical(w, rng) == 1;
  EXPECT_NEAR(static_cast<double>(ones) / n, 0.75, 3.0 * std::sqrt(0.75 * 0.25 / n));
}

TEST(Randomness, CategoricalRejectsDegenerateWeights) {
  RngStream rng(9);
  const std::vector<double> zeros{0.0, 0.0};
  const std::vector<double> negative{1.0, -1.0};
  const std::vector<double> nan{1.0, std::nan("")};
  const std::vector<double> empty;
  EXPECT_THROW(categorical(zeros, rng), DegenerateWeights);
  EXPECT_THROW(categorical(negative, rng), DegenerateWeights);
  EXPECT_THROW(categorical(nan, rng), DegenerateWeights);
  EXPECT_THROW(categorical(empty, rng), DegenerateWeights);
}

TEST(Randomness, CategoricalLocateSkipsTrailingZeros) {
  const std::vector<double> w{0.5, 0.5, 0.0, 0.0};
  const CategoricalSampler s(w);
  EXPECT_EQ(s.locate(0.25), 0u);
  EXPECT_EQ(s.locate(0.75), 1u);
  EXPECT_EQ(s.locate(1.0), 1u);
}
