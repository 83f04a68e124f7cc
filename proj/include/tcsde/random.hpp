#pragma once

// Counter-based random streams and the handful of distributions the
// estimators need.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "tcsde/error.hpp"

namespace tcsde {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

/// Philox4x32-10 block function (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo32(m0, ctr[0], hi0, lo0);
    mulhilo32(m1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += w0;
    key[1] += w1;
  }
  return ctr;
}

}  // namespace detail

/// A reproducible random stream identified by (seed, stream_id).
///
/// Draw i of stream (seed, id) is a pure function of (seed, id, i): the key is
/// the seed and the 128-bit counter holds the stream id and the block index.
/// Distinct ids therefore never overlap, and parallel replicates can be
/// scheduled in any order without changing their output.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// A stream derived from this one's identity (not its position).
  RngStream substream(std::uint64_t index) const {
    return RngStream(seed_, detail::splitmix64(stream_id_ ^ detail::splitmix64(index + 1)));
  }

  std::uint64_t next_u64() {
    if (buffered_ == 0) refill();
    --buffered_;
    return buffer_[buffered_];
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // Marsaglia polar method
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double exponential() { return -std::log(uniform()); }

 private:
  void refill() {
    const std::array<std::uint32_t, 4> ctr{
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                           static_cast<std::uint32_t>(seed_ >> 32)};
    const auto out = detail::philox4x32(ctr, key);
    ++block_;
    buffer_[1] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[0] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    buffered_ = 2;
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline double uniform(RngStream& rng) { return rng.uniform(); }
inline double normal(RngStream& rng) { return rng.normal(); }
inline double exponential(RngStream& rng) { return rng.exponential(); }

/// One-sided alpha-stable variable with E[exp(-eta S)] = exp(-eta^alpha),
/// drawn with Kanter's representation
///   S = sin(a pi U) / sin(pi U)^(1/a) * (sin((1-a) pi U) / E)^((1-a)/a).
inline double stable_positive(double alpha, RngStream& rng) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidParameter("randomness", "stable index must lie in (0,1)");
  constexpr double pi = std::numbers::pi;
  const double u = rng.uniform();
  const double e = rng.exponential();
  const double log_tail = std::log(std::sin((1.0 - alpha) * pi * u) / e);
  const double log_base = std::log(std::sin(pi * u));
  return std::sin(alpha * pi * u) *
         std::exp(((1.0 - alpha) * log_tail - log_base) / alpha);
}

/// Precomputed cumulative table for repeated draws from one weight vector.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(std::span<const double> weights) : cumulative_(weights.size()) {
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const double w = weights[i];
      if (std::isnan(w) || w < 0.0)
        throw DegenerateWeights("randomness", "weights must be non-negative and not NaN");
      total += w;
      cumulative_[i] = total;
    }
    if (!(total > 0.0) || !std::isfinite(total))
      throw DegenerateWeights("randomness", "weights must have a positive finite sum");
  }

  std::size_t operator()(RngStream& rng) const { return locate(rng.uniform()); }

  /// Index whose cumulative interval contains `fraction` of the total mass.
  std::size_t locate(double fraction) const {
    const double target = fraction * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
    if (i >= cumulative_.size()) {
      // rounding put the target at the total; take the last positive cell
      i = cumulative_.size() - 1;
      while (i > 0 && cumulative_[i] == cumulative_[i - 1]) --i;
    }
    return i;
  }

  std::size_t size() const noexcept { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

inline std::size_t categorical(std::span<const double> weights, RngStream& rng) {
  return CategoricalSampler(weights)(rng);
}

}  // namespace tcsde
