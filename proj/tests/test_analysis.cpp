#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tcsde/analysis.hpp"
#include "tcsde/random.hpp"

using namespace tcsde;

TEST(Summary, SymmetricPair) {
  const std::vector<double> xs{-1.0, 1.0, -1.0, 1.0};
  const auto s = summary(xs);
  EXPECT_EQ(s.count, 4u);
  EXPECT_EQ(s.mean, 0.0);
  EXPECT_EQ(s.skewness, 0.0);
  EXPECT_DOUBLE_EQ(s.kurtosis, 1.0);
  EXPECT_DOUBLE_EQ(s.std_dev, std::sqrt(4.0 / 3.0));
}

TEST(Summary, HandComputedMoments) {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0, 10.0};
  const auto s = summary(xs);
  // mean 4; deviations -3,-2,-1,0,6; m2 = 50/5, m3 = 180/5, m4 = 1394/5
  EXPECT_DOUBLE_EQ(s.mean, 4.0);
  EXPECT_DOUBLE_EQ(s.std_dev, std::sqrt(50.0 / 4.0));
  EXPECT_NEAR(s.skewness, 36.0 / std::pow(10.0, 1.5), 1e-14);
  EXPECT_NEAR(s.kurtosis, 278.8 / 100.0, 1e-14);
  // type-7 quantiles
  EXPECT_DOUBLE_EQ(s.quantiles[2], 3.0);
  EXPECT_NEAR(s.quantiles[3], 4.0 + 0.8 * 6.0, 1e-14);
  EXPECT_NEAR(s.quantiles[0], 1.04, 1e-14);
}

TEST(Summary, GaussianKurtosisIsThree) {
  RngStream rng(1);
  std::vector<double> xs(1000000);
  for (auto& x : xs) x = rng.normal();
  const auto s = summary(xs);
  // sd of the sample kurtosis of a Gaussian is sqrt(24 / n)
  EXPECT_NEAR(s.kurtosis, 3.0, 3.0 * std::sqrt(24.0 / xs.size()));
}

TEST(Summary, QuantilesAreMonotone) {
  RngStream rng(2);
  std::vector<double> xs(1000);
  for (auto& x : xs) x = std::exp(rng.normal());
  const auto s = summary(xs);
  EXPECT_TRUE(std::is_sorted(s.quantiles.begin(), s.quantiles.end()));
  EXPECT_GE(s.std_dev, 0.0);
}

TEST(Summary, PermutationInvariant) {
  RngStream rng(3);
  std::vector<double> xs(200);
  for (auto& x : xs) x = rng.normal();
  auto ys = xs;
  std::reverse(ys.begin(), ys.end());
  std::rotate(ys.begin(), ys.begin() + 17, ys.end());
  const auto a = summary(xs), b = summary(ys);
  EXPECT_NEAR(a.mean, b.mean, 1e-15);
  EXPECT_NEAR(a.kurtosis, b.kurtosis, 1e-12);
  EXPECT_EQ(a.quantiles, b.quantiles);
}

TEST(Summary, Errors) {
  const std::vector<double> constant(10, 2.0), short_series{1.0, 2.0, 3.0};
  EXPECT_THROW(summary(constant), NumericError);
  EXPECT_THROW(summary(short_series), InvalidParameter);
}

TEST(Acf, LagZeroIsOneAndValuesBounded) {
  RngStream rng(4);
  std::vector<double> xs(500);
  for (auto& x : xs) x = rng.normal();
  const auto r = acf_abs(xs, 20);
  ASSERT_EQ(r.lags.size(), 21u);
  EXPECT_DOUBLE_EQ(r.values[0], 1.0);
  for (double v : r.values) EXPECT_LE(std::abs(v), 1.0);
  EXPECT_DOUBLE_EQ(r.band, 1.96 / std::sqrt(500.0));
}

TEST(Acf, WhiteNoiseStaysInsideBand) {
  RngStream rng(5);
  std::vector<double> xs(10000);
  for (auto& x : xs) x = rng.normal();
  const auto r = acf_abs(xs, 20);
  std::size_t outside = 0;
  for (std::size_t h = 1; h <= 20; ++h) outside += std::abs(r.values[h]) > r.band;
  EXPECT_LE(outside, 2u);
}

TEST(Acf, PersistentSeriesExceedsBand) {
  RngStream rng(6);
  std::vector<double> xs(2000);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double vol = (i / 100) % 2 == 0 ? 0.2 : 3.0;
    xs[i] = vol * rng.normal();
  }
  EXPECT_GE(acf_abs(xs, 20).count_above_band(), 15u);
}

TEST(Acf, OrderSensitive) {
  std::vector<double> xs;
  for (int i = 0; i < 50; ++i) xs.push_back(i < 25 ? 0.1 * i : -0.1 * i);
  auto ys = xs;
  for (std::size_t i = 0; i + 1 < ys.size(); i += 2) std::swap(ys[i], ys[i + 1]);
  EXPECT_NE(acf_abs(xs, 3).values[1], acf_abs(ys, 3).values[1]);
}

TEST(Acf, Errors) {
  const std::vector<double> xs{1.0, 2.0, 3.0};
  EXPECT_THROW(acf(xs, 3), InvalidParameter);
  const std::vector<double> flat(10, 1.0);
  EXPECT_THROW(acf(flat, 2), NumericError);
}

TEST(Mse, IdenticalEstimatesAtTruth) {
  const std::vector<std::vector<double>> est(5, {0.1, 0.2});
  const auto m = mse(est, std::vector<double>{0.1, 0.2});
  EXPECT_EQ(m, (std::vector<double>{0.0, 0.0}));
}

TEST(Mse, HandCase) {
  const std::vector<std::vector<double>> est{{1.0, 0.0}, {3.0, 2.0}};
  const auto m = mse(est, std::vector<double>{2.0, 0.0});
  EXPECT_DOUBLE_EQ(m[0], 1.0);
  EXPECT_DOUBLE_EQ(m[1], 2.0);
  EXPECT_THROW(mse(std::vector<std::vector<double>>{}, std::vector<double>{0.0}), InvalidParameter);
  EXPECT_THROW(mse(est, std::vector<double>{0.0}), InvalidParameter);
}

TEST(Fit, ExactInversePowerLaw) {
  std::vector<double> x, y;
  for (double m : {2.0, 4.0, 8.0, 16.0, 32.0}) {
    x.push_back(m);
    y.push_back(1.0 / m);
  }
  const auto f = loglog_fit(x, y);
  EXPECT_NEAR(f.slope, -1.0, 1e-9);
  EXPECT_NEAR(f.intercept, 0.0, 1e-9);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
  EXPECT_NEAR(f.slope_se, 0.0, 1e-9);
}

TEST(Fit, ExactPowerLawOtherExponent) {
  std::vector<double> x, y;
  for (double e : {0.25, 0.125, 0.0625}) {
    x.push_back(e);
    y.push_back(7.0 * std::pow(e, -1.5));
  }
  const auto f = loglog_fit(x, y);
  EXPECT_NEAR(f.slope, -1.5, 1e-9);
  EXPECT_NEAR(f.intercept, std::log(7.0), 1e-9);
}

TEST(Fit, Errors) {
  const std::vector<double> one{1.0}, same{2.0, 2.0}, ys{1.0, 2.0}, neg{-1.0, 2.0};
  EXPECT_THROW(loglog_fit(one, one), InvalidParameter);
  EXPECT_THROW(loglog_fit(same, ys), InvalidParameter);
  EXPECT_THROW(loglog_fit(neg, ys), InvalidParameter);
  EXPECT_THROW(loglog_fit(std::vector<double>{}, std::vector<double>{}), InvalidParameter);
}

TEST(BatchMeans, MatchesIidStandardError) {
  RngStream rng(7);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = rng.normal();
  EXPECT_NEAR(batch_means_se(xs), 1.0 / std::sqrt(1e5), 0.4 / std::sqrt(1e5));
}
