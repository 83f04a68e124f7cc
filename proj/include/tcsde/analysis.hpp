#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "tcsde/error.hpp"

namespace tcsde {

/// Moments use the population convention for skewness and kurtosis
/// (m3 / m2^1.5, m4 / m2^2, Gaussian kurtosis = 3) and the n-1 convention for
/// the standard deviation. Quantiles interpolate order statistics linearly
/// (type 7).
struct SeriesStats {
  static constexpr std::array<double, 5> quantile_levels{0.01, 0.05, 0.50, 0.95, 0.99};

  std::size_t count = 0;
  double mean = 0.0;
  double std_dev = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
  std::array<double, 5> quantiles{};
};

/// Type-7 quantile of an ascending sample.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidParameter("analysis", "quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidParameter("analysis", "quantile level must lie in [0,1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double mean_of(std::span<const double> xs) {
  if (xs.empty()) throw InvalidParameter("analysis", "mean of an empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Sample variance with the n-1 divisor.
inline double variance_of(std::span<const double> xs) {
  if (xs.size() < 2) throw InvalidParameter("analysis", "variance needs at least two values");
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

inline SeriesStats summary(std::span<const double> series) {
  if (series.size() < 4) throw InvalidParameter("analysis", "summary needs at least four values");
  SeriesStats s;
  s.count = series.size();
  s.mean = mean_of(series);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : series) {
    const double d = x - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double n = static_cast<double>(series.size());
  s.std_dev = std::sqrt(m2 / (n - 1.0));
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0.0))
    throw NumericError("analysis", "skewness and kurtosis are undefined for a constant series");
  s.skewness = m3 / std::pow(m2, 1.5);
  s.kurtosis = m4 / (m2 * m2);
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < s.quantiles.size(); ++i)
    s.quantiles[i] = quantile_sorted(sorted, SeriesStats::quantile_levels[i]);
  return s;
}

struct AcfReport {
  std::vector<std::size_t> lags;  // 0..max_lag
  std::vector<double> values;
  double band = 0.0;  // 1.96 / sqrt(n)

  /// Number of lags in [1, max_lag] whose autocorrelation exceeds the band.
  std::size_t count_above_band() const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < lags.size(); ++i)
      if (lags[i] >= 1 && values[i] > band) ++c;
    return c;
  }
};

/// Sample autocorrelation r_h = sum_{t} (x_t - m)(x_{t+h} - m) / sum_t (x_t - m)^2.
inline AcfReport acf(std::span<const double> series, std::size_t max_lag) {
  if (series.size() <= max_lag) throw InvalidParameter("analysis", "series must be longer than max_lag");
  const double m = mean_of(series);
  double denom = 0.0;
  for (double x : series) denom += (x - m) * (x - m);
  if (!(denom > 0.0)) throw NumericError("analysis", "autocorrelation is undefined for a constant series");
  AcfReport r;
  r.band = 1.96 / std::sqrt(static_cast<double>(series.size()));
  for (std::size_t h = 0; h <= max_lag; ++h) {
    double num = 0.0;
    for (std::size_t t = 0; t + h < series.size(); ++t) num += (series[t] - m) * (series[t + h] - m);
    r.lags.push_back(h);
    r.values.push_back(num / denom);
  }
  return r;
}

/// Autocorrelation of absolute values.
inline AcfReport acf_abs(std::span<const double> series, std::size_t max_lag) {
  std::vector<double> a(series.size());
  std::transform(series.begin(), series.end(), a.begin(), [](double x) { return std::abs(x); });
  return acf(a, max_lag);
}

/// Per-coordinate mean squared deviation of replicate estimates from `truth`.
inline std::vector<double> mse(const std::vector<std::vector<double>>& estimates,
                               std::span<const double> truth) {
  if (estimates.empty()) throw InvalidParameter("analysis", "no estimates");
  std::vector<double> out(truth.size(), 0.0);
  for (const auto& e : estimates) {
    if (e.size() != truth.size()) throw InvalidParameter("analysis", "estimate dimension mismatch");
    for (std::size_t i = 0; i < e.size(); ++i) out[i] += (e[i] - truth[i]) * (e[i] - truth[i]);
  }
  for (auto& x : out) x /= static_cast<double>(estimates.size());
  return out;
}

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_se = 0.0;
  std::vector<double> x, y;
};

/// Ordinary least squares y = intercept + slope x.
inline RegressionFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidParameter("analysis", "fit inputs differ in length");
  if (x.size() < 2) throw InvalidParameter("analysis", "fit needs at least two points");
  const double mx = mean_of(x), my = mean_of(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidParameter("analysis", "fit needs at least two distinct x values");
  RegressionFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.slope_se = x.size() > 2 ? std::sqrt(sse / static_cast<double>(x.size() - 2) / sxx) : 0.0;
  f.x.assign(x.begin(), x.end());
  f.y.assign(y.begin(), y.end());
  return f;
}

/// Least squares in natural-log coordinates; inputs must be positive.
inline RegressionFit loglog_fit(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw InvalidParameter("analysis", "fit input is empty");
  if (x.size() != y.size()) throw InvalidParameter("analysis", "fit inputs differ in length");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidParameter("analysis", "log-log fit needs positive values");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return linear_fit(lx, ly);
}

/// Batch-means standard error of the mean of a correlated sequence.
inline double batch_means_se(std::span<const double> xs, std::size_t batches = 50) {
  if (xs.size() < 2 * batches) throw InvalidParameter("analysis", "too few values for batch means");
  const std::size_t size = xs.size() / batches;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) means.push_back(mean_of(xs.subspan(b * size, size)));
  return std::sqrt(variance_of(means) / static_cast<double>(batches));
}

}  // namespace tcsde
