#pragma once

// Bootstrap particle filters over the level-l skeleton and their conditional
// (reference-pinned) versions, for both the single-level target and the
// coupled fine/coarse target with summed weights G_theta + G_theta'.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "tcsde/discretization.hpp"
#include "tcsde/error.hpp"
#include "tcsde/model.hpp"
#include "tcsde/random.hpp"
#include "tcsde/subordinator.hpp"

namespace tcsde {

enum class ResamplingScheme { multinomial, systematic };

struct SmcOptions {
  ResamplingScheme resampling = ResamplingScheme::multinomial;
  CostCounter* cost = nullptr;
};

template <class Traj>
struct PfOutput {
  Traj sampled_trajectory;
  double log_normalizer = 0.0;
};

/// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

/// Normalized weights from log-weights by max-subtraction. Returns the log of
/// the mean unnormalized weight; throws WeightCollapse when every weight is 0.
inline double normalize_log_weights(std::span<const double> log_weights,
                                    std::vector<double>& weights, std::size_t step) {
  double max_lw = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) {
    if (std::isnan(lw)) throw WeightCollapse("smc", step);
    max_lw = std::max(max_lw, lw);
  }
  if (!std::isfinite(max_lw)) throw WeightCollapse("smc", step);
  weights.resize(log_weights.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) sum += weights[i] = std::exp(log_weights[i] - max_lw);
  for (auto& w : weights) w /= sum;
  return max_lw + std::log(sum / static_cast<double>(log_weights.size()));
}

/// Draws `count` ancestor indices from normalized weights.
inline void resample(std::span<const double> weights, std::size_t count, ResamplingScheme scheme,
                     RngStream& rng, std::vector<std::size_t>& out) {
  out.resize(count);
  if (count == 0) return;
  const CategoricalSampler sampler(weights);
  if (scheme == ResamplingScheme::multinomial) {
    for (auto& a : out) a = sampler(rng);
    return;
  }
  const double offset = rng.uniform();
  for (std::size_t i = 0; i < count; ++i)
    out[i] = sampler.locate((static_cast<double>(i) + offset) / static_cast<double>(count));
}

/// Particle storage for one sweep: every block's segments and ancestors are
/// kept so the selected path is recovered by tracing back the genealogy.
template <class Segment>
struct ParticleSystem {
  std::vector<std::vector<Segment>> particles;       // [k][i]
  std::vector<std::vector<std::size_t>> ancestors;   // [k][i] -> index at k-1
  std::vector<double> log_weights;                   // at the current block
  std::vector<double> weights;                       // normalized

  std::vector<Segment> trace(std::size_t index) const {
    const std::size_t T = particles.size() - 1;
    std::vector<Segment> path(T + 1);
    for (std::size_t k = T + 1; k-- > 0;) {
      path[k] = particles[k][index];
      if (k > 0) index = ancestors[k][index];
    }
    return path;
  }
};

namespace detail {

template <class Segment>
struct SweepResult {
  std::vector<Segment> trajectory;
  double log_normalizer = 0.0;
  std::size_t selected = 0;
};

/// Generic (conditional) bootstrap sweep. With a reference, slot N-1 is pinned
/// to it and only N-1 particles are propagated and resampled; resampling only
/// happens after blocks 1..T-1.
template <class Segment, class Init, class Propagate, class LogWeight>
SweepResult<Segment> particle_sweep(std::size_t N, std::size_t T,
                                    const std::vector<Segment>* reference, Init&& init,
                                    Propagate&& propagate, LogWeight&& log_weight,
                                    ResamplingScheme scheme, RngStream& rng) {
  if (N < 1) throw InvalidParameter("smc", "need at least one particle");
  if (T < 1) throw InvalidParameter("smc", "need at least one observation");
  if (reference && reference->size() != T + 1)
    throw InvalidParameter("smc", "reference trajectory has the wrong number of blocks");
  const std::size_t n_free = reference ? N - 1 : N;

  ParticleSystem<Segment> sys;
  sys.particles.resize(T + 1);
  sys.ancestors.resize(T + 1);
  sys.particles[0].reserve(N);
  for (std::size_t i = 0; i < n_free; ++i) sys.particles[0].push_back(init(rng));
  if (reference) sys.particles[0].push_back((*reference)[0]);

  std::vector<std::size_t> parents(n_free);
  for (std::size_t i = 0; i < n_free; ++i) parents[i] = i;

  SweepResult<Segment> result;
  sys.log_weights.resize(N);
  for (std::size_t k = 1; k <= T; ++k) {
    auto& current = sys.particles[k];
    auto& anc = sys.ancestors[k];
    current.reserve(N);
    anc.resize(N);
    for (std::size_t i = 0; i < n_free; ++i) {
      current.push_back(propagate(sys.particles[k - 1][parents[i]], rng));
      anc[i] = parents[i];
    }
    if (reference) {
      current.push_back((*reference)[k]);
      anc[N - 1] = N - 1;
    }
    for (std::size_t i = 0; i < N; ++i) sys.log_weights[i] = log_weight(current[i], k);
    try {
      result.log_normalizer += normalize_log_weights(sys.log_weights, sys.weights, k);
    } catch (const WeightCollapse&) {
      throw WeightCollapse("smc", k);
    }
    if (k + 1 <= T) resample(sys.weights, n_free, scheme, rng, parents);
  }
  result.selected = categorical(sys.weights, rng);
  result.trajectory = sys.trace(result.selected);
  return result;
}

}  // namespace detail

/// Conditional particle filter at `level` (one sweep of the kernel K_{theta,l}).
template <StateSpaceModel M>
Trajectory cpf(const M& model, const typename M::Params& theta, int level,
               const Trajectory& reference, std::size_t N, const Observations& obs,
               const Subordinator& clock, RngStream& rng, const SmcOptions& opts = {}) {
  if (N < 1) throw InvalidParameter("smc", "need at least one particle");
  if (reference.level() != level) throw InvalidParameter("smc", "reference level mismatch");
  auto res = detail::particle_sweep<PathSegment>(
      N, obs.size(), &reference.segments,
      [&](RngStream& r) { return initial_segment(model, theta, level, clock, r); },
      [&](const PathSegment& prev, RngStream& r) {
        return sample_block(model, theta, level, prev, clock, r, opts.cost);
      },
      [&](const PathSegment& seg, std::size_t k) {
        return model.log_obs_density(theta, seg.x_end(), obs[k]);
      },
      opts.resampling, rng);
  return Trajectory{std::move(res.trajectory)};
}

/// Conditional delta particle filter at `level` >= 1 (kernel \check K_{theta,theta',l}).
template <StateSpaceModel M>
CoupledTrajectory delta_cpf(const M& model, const typename M::Params& theta,
                            const typename M::Params& theta_prime, int level,
                            const CoupledTrajectory& reference, std::size_t N,
                            const Observations& obs, const Subordinator& clock, RngStream& rng,
                            const SmcOptions& opts = {}) {
  if (level < 1) throw InvalidParameter("smc", "delta filter needs level >= 1");
  if (reference.level() != level) throw InvalidParameter("smc", "reference level mismatch");
  auto res = detail::particle_sweep<CoupledSegment>(
      N, obs.size(), &reference.segments,
      [&](RngStream& r) { return initial_coupled_segment(model, theta, level, clock, r); },
      [&](const CoupledSegment& prev, RngStream& r) {
        return sample_coupled_block(model, theta, theta_prime, level, prev, clock, r, opts.cost);
      },
      [&](const CoupledSegment& seg, std::size_t k) {
        return log_add_exp(model.log_obs_density(theta, seg.fine.x_end(), obs[k]),
                           model.log_obs_density(theta_prime, seg.coarse.x_end(), obs[k]));
      },
      opts.resampling, rng);
  return CoupledTrajectory{std::move(res.trajectory)};
}

/// Bootstrap particle filter; returns a trajectory drawn from the final
/// weights and the log of the normalizing-constant estimate.
template <StateSpaceModel M>
PfOutput<Trajectory> pf(const M& model, const typename M::Params& theta, int level, std::size_t N,
                        const Observations& obs, const Subordinator& clock, RngStream& rng,
                        const SmcOptions& opts = {}) {
  auto res = detail::particle_sweep<PathSegment>(
      N, obs.size(), nullptr,
      [&](RngStream& r) { return initial_segment(model, theta, level, clock, r); },
      [&](const PathSegment& prev, RngStream& r) {
        return sample_block(model, theta, level, prev, clock, r, opts.cost);
      },
      [&](const PathSegment& seg, std::size_t k) {
        return model.log_obs_density(theta, seg.x_end(), obs[k]);
      },
      opts.resampling, rng);
  return {Trajectory{std::move(res.trajectory)}, res.log_normalizer};
}

/// Delta particle filter on the coupled space with weights G_theta + G_theta'.
template <StateSpaceModel M>
PfOutput<CoupledTrajectory> delta_pf(const M& model, const typename M::Params& theta,
                                     const typename M::Params& theta_prime, int level,
                                     std::size_t N, const Observations& obs,
                                     const Subordinator& clock, RngStream& rng,
                                     const SmcOptions& opts = {}) {
  if (level < 1) throw InvalidParameter("smc", "delta filter needs level >= 1");
  auto res = detail::particle_sweep<CoupledSegment>(
      N, obs.size(), nullptr,
      [&](RngStream& r) { return initial_coupled_segment(model, theta, level, clock, r); },
      [&](const CoupledSegment& prev, RngStream& r) {
        return sample_coupled_block(model, theta, theta_prime, level, prev, clock, r, opts.cost);
      },
      [&](const CoupledSegment& seg, std::size_t k) {
        return log_add_exp(model.log_obs_density(theta, seg.fine.x_end(), obs[k]),
                           model.log_obs_density(theta_prime, seg.coarse.x_end(), obs[k]));
      },
      opts.resampling, rng);
  return {CoupledTrajectory{std::move(res.trajectory)}, res.log_normalizer};
}

}  // namespace tcsde
