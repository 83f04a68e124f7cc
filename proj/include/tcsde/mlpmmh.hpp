#pragma once

// Particle marginal Metropolis-Hastings on the level-l target (plain filter)
// and on the coupled level-l target (delta filter), and the self-normalized
// multilevel combination of independent per-level chains.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "tcsde/discretization.hpp"
#include "tcsde/error.hpp"
#include "tcsde/model.hpp"
#include "tcsde/parallel.hpp"
#include "tcsde/random.hpp"
#include "tcsde/smc.hpp"
#include "tcsde/subordinator.hpp"
#include "tcsde/umsa.hpp"

namespace tcsde {

/// Independent Gaussian prior per coordinate; an infinite variance makes that
/// coordinate flat.
struct Prior {
  std::vector<double> means{0.0, 1.0};
  std::vector<double> variances{1.0, 1.0};

  void validate(std::size_t dim) const {
    if (means.size() != dim || variances.size() != dim)
      throw InvalidParameter("mlpmmh", "prior needs one mean and variance per parameter");
    for (double v : variances)
      if (!(v > 0.0)) throw InvalidParameter("mlpmmh", "prior variances must be positive");
  }

  template <class P>
  double log_density(const P& theta) const {
    double total = 0.0;
    for (std::size_t i = 0; i < P::size(); ++i) {
      if (std::isinf(variances[i])) continue;
      const double r = theta[i] - means[i];
      total += -0.5 * std::log(2.0 * std::numbers::pi * variances[i]) - 0.5 * r * r / variances[i];
    }
    return total;
  }
};

struct PmmhConfig {
  std::size_t particles = 100;
  std::vector<double> proposal_sd{std::sqrt(0.1), std::sqrt(0.1)};
  /// Proposals below these bounds are reflected back above them.
  std::vector<double> lower{-std::numeric_limits<double>::infinity(), 1e-6};
  ResamplingScheme resampling = ResamplingScheme::multinomial;
};

template <class P, class Traj>
struct ChainState {
  P theta{};
  Traj trajectory;
  double log_normalizer = 0.0;
};

struct PmmhStats {
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  std::uint64_t failed = 0;  // proposals whose filter collapsed or overflowed
  CostCounter cost;

  double acceptance_rate() const {
    return proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
  }
};

template <class P>
P propose_random_walk(const P& theta, const PmmhConfig& cfg, RngStream& rng) {
  P out = theta;
  for (std::size_t i = 0; i < P::size(); ++i) {
    out[i] += cfg.proposal_sd[i] * rng.normal();
    const double lo = cfg.lower[i];
    if (std::isfinite(lo) && out[i] < lo) out[i] = 2.0 * lo - out[i];
  }
  return out;
}

namespace detail {

template <class P, class Traj, class Filter>
ChainState<P, Traj> mh_step(const ChainState<P, Traj>& state, const Prior& prior,
                            const PmmhConfig& cfg, RngStream& rng, PmmhStats* stats,
                            Filter&& filter) {
  const P proposal = propose_random_walk(state.theta, cfg, rng);
  if (stats) ++stats->proposals;
  double log_z = -std::numeric_limits<double>::infinity();
  Traj traj;
  try {
    auto out = filter(proposal);
    log_z = out.log_normalizer;
    traj = std::move(out.sampled_trajectory);
  } catch (const WeightCollapse&) {
    if (stats) ++stats->failed;
  } catch (const NumericError&) {
    if (stats) ++stats->failed;
  }
  const double log_ratio = log_z + prior.log_density(proposal) - state.log_normalizer -
                           prior.log_density(state.theta);
  const double log_u = std::log(rng.uniform());
  if (std::isfinite(log_z) && log_u < log_ratio) {
    if (stats) ++stats->accepted;
    return {proposal, std::move(traj), log_z};
  }
  return state;
}

}  // namespace detail

/// One PMMH step on the level-l target (kernel K_l).
template <StateSpaceModel M>
ChainState<typename M::Params, Trajectory> pmmh_step(
    const ChainState<typename M::Params, Trajectory>& state, const M& model, const Prior& prior,
    int level, const PmmhConfig& cfg, const Observations& obs, const Subordinator& clock,
    RngStream& rng, PmmhStats* stats = nullptr) {
  const SmcOptions opts{cfg.resampling, stats ? &stats->cost : nullptr};
  return detail::mh_step(state, prior, cfg, rng, stats, [&](const typename M::Params& th) {
    return pf(model, th, level, cfg.particles, obs, clock, rng, opts);
  });
}

/// One PMMH step on the coupled level-l target with theta' = theta (kernel \check K_l).
template <StateSpaceModel M>
ChainState<typename M::Params, CoupledTrajectory> coupled_pmmh_step(
    const ChainState<typename M::Params, CoupledTrajectory>& state, const M& model,
    const Prior& prior, int level, const PmmhConfig& cfg, const Observations& obs,
    const Subordinator& clock, RngStream& rng, PmmhStats* stats = nullptr) {
  const SmcOptions opts{cfg.resampling, stats ? &stats->cost : nullptr};
  return detail::mh_step(state, prior, cfg, rng, stats, [&](const typename M::Params& th) {
    return delta_pf(model, th, th, level, cfg.particles, obs, clock, rng, opts);
  });
}

/// Final level L and per-level iteration counts N_0..N_L.
struct LevelAllocation {
  double epsilon = 0.0;
  int L = 0;
  std::vector<std::size_t> iterations;
};

/// L = ceil(log2(1/epsilon)) capped at l_cap; N_l = max(floor, ceil(c eps^-2 Delta_l (L+1))).
inline LevelAllocation allocate(double epsilon, int l_cap, double c = 1.0,
                                std::size_t floor_iters = 100) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw InvalidParameter("mlpmmh", "epsilon must be positive");
  if (l_cap < 0) throw InvalidParameter("mlpmmh", "level cap must be >= 0");
  LevelAllocation a;
  a.epsilon = epsilon;
  a.L = std::clamp(static_cast<int>(std::ceil(std::log2(1.0 / epsilon) - 1e-12)), 0, l_cap);
  for (int l = 0; l <= a.L; ++l) {
    const double n = c * std::pow(epsilon, -2.0) * level_step(l) * (a.L + 1);
    a.iterations.push_back(std::max<std::size_t>(floor_iters, static_cast<std::size_t>(std::ceil(n - 1e-9))));
  }
  return a;
}

/// Output of one level's chain: theta_0..theta_{N_l} and, for l >= 1, the
/// log G_f / log G_c weights of each state's coupled trajectory.
template <class P>
struct LevelChain {
  int level = 0;
  std::vector<P> thetas;
  std::vector<double> log_g_fine;
  std::vector<double> log_g_coarse;
  PmmhStats stats;
};

struct MlConfig {
  PmmhConfig pmmh;
  std::vector<double> theta0{0.0, 1.0};
  double burn_in = 0.2;
  ClockSpec clock;
};

/// Plain PMMH chain on the level-l target (the single-level estimator at l = L).
template <StateSpaceModel M>
LevelChain<typename M::Params> run_plain_chain(const M& model, const Prior& prior,
                                               const MlConfig& cfg, int level,
                                               std::size_t iterations, const Observations& obs,
                                               RngStream& rng) {
  using P = typename M::Params;
  LevelChain<P> chain;
  chain.level = level;
  const auto clock = cfg.clock.at_level(level);
  const P theta0 = params_from<P>(cfg.theta0);
  const SmcOptions opts{cfg.pmmh.resampling, &chain.stats.cost};
  chain.thetas.reserve(iterations + 1);
  auto init = pf(model, theta0, level, cfg.pmmh.particles, obs, clock, rng, opts);
  ChainState<P, Trajectory> state{theta0, std::move(init.sampled_trajectory), init.log_normalizer};
  chain.thetas.push_back(state.theta);
  for (std::size_t n = 1; n <= iterations; ++n) {
    state = pmmh_step(state, model, prior, level, cfg.pmmh, obs, clock, rng, &chain.stats);
    chain.thetas.push_back(state.theta);
  }
  return chain;
}

/// PMMH chain on the coupled level-l target, recording log G_f and log G_c.
template <StateSpaceModel M>
LevelChain<typename M::Params> run_coupled_chain(const M& model, const Prior& prior,
                                                 const MlConfig& cfg, int level,
                                                 std::size_t iterations, const Observations& obs,
                                                 RngStream& rng) {
  using P = typename M::Params;
  LevelChain<P> chain;
  chain.level = level;
  const auto clock = cfg.clock.at_level(level);
  const P theta0 = params_from<P>(cfg.theta0);
  const SmcOptions opts{cfg.pmmh.resampling, &chain.stats.cost};
  chain.thetas.reserve(iterations + 1);
  auto init = delta_pf(model, theta0, theta0, level, cfg.pmmh.particles, obs, clock, rng, opts);
  ChainState<P, CoupledTrajectory> state{theta0, std::move(init.sampled_trajectory),
                                         init.log_normalizer};
  auto record = [&] {
    chain.thetas.push_back(state.theta);
    chain.log_g_fine.push_back(log_g_fine(model, state.theta, state.theta, state.trajectory, obs));
    chain.log_g_coarse.push_back(
        log_g_coarse(model, state.theta, state.theta, state.trajectory, obs));
  };
  record();
  for (std::size_t n = 1; n <= iterations; ++n) {
    state = coupled_pmmh_step(state, model, prior, level, cfg.pmmh, obs, clock, rng, &chain.stats);
    record();
  }
  return chain;
}

/// Algorithm-4 loop: level 0 with K_0 and levels 1..L with \check K_l, each on
/// its own substream (stream.substream(l)), run concurrently.
template <StateSpaceModel M>
std::vector<LevelChain<typename M::Params>> ml_run(const M& model, const Prior& prior,
                                                   const MlConfig& cfg,
                                                   const std::vector<std::size_t>& iterations,
                                                   const Observations& obs,
                                                   const RngStream& stream,
                                                   std::size_t threads = 1) {
  prior.validate(M::Params::size());
  if (iterations.empty()) throw InvalidParameter("mlpmmh", "need at least one level");
  std::vector<LevelChain<typename M::Params>> chains(iterations.size());
  parallel_for(iterations.size(), threads, [&](std::size_t l) {
    RngStream rng = stream.substream(l);
    const int level = static_cast<int>(l);
    chains[l] = level == 0 ? run_plain_chain(model, prior, cfg, 0, iterations[l], obs, rng)
                           : run_coupled_chain(model, prior, cfg, level, iterations[l], obs, rng);
  });
  return chains;
}

/// First retained index after discarding the burn-in fraction.
inline std::size_t burn_in_start(std::size_t size, double burn_in) {
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw InvalidParameter("mlpmmh", "burn-in must lie in [0,1)");
  return static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(size)));
}

/// Self-normalized G_f and G_c weighted averages of phi over one coupled chain.
template <class P>
std::pair<double, double> level_correction_terms(const LevelChain<P>& chain,
                                                 const std::function<double(const P&)>& phi,
                                                 double burn_in) {
  const std::size_t start = burn_in_start(chain.thetas.size(), burn_in);
  if (start >= chain.thetas.size()) throw InvalidParameter("mlpmmh", "chain is empty after burn-in");
  double mf = -std::numeric_limits<double>::infinity(), mc = mf;
  for (std::size_t n = start; n < chain.thetas.size(); ++n) {
    mf = std::max(mf, chain.log_g_fine[n]);
    mc = std::max(mc, chain.log_g_coarse[n]);
  }
  if (!std::isfinite(mf) || !std::isfinite(mc))
    throw DegenerateWeights("mlpmmh", "zero total weight at level " + std::to_string(chain.level));
  double nf = 0.0, df = 0.0, nc = 0.0, dc = 0.0;
  for (std::size_t n = start; n < chain.thetas.size(); ++n) {
    const double v = phi(chain.thetas[n]);
    const double wf = std::exp(chain.log_g_fine[n] - mf);
    const double wc = std::exp(chain.log_g_coarse[n] - mc);
    nf += v * wf;
    df += wf;
    nc += v * wc;
    dc += wc;
  }
  return {nf / df, nc / dc};
}

/// Plain average at level 0 plus, for each l >= 1, the difference of the
/// self-normalized fine- and coarse-weighted averages.
template <class P>
double ml_estimate(const std::vector<LevelChain<P>>& chains,
                   const std::function<double(const P&)>& phi, double burn_in = 0.2) {
  if (chains.empty()) throw InvalidParameter("mlpmmh", "no chains");
  const auto& base = chains.front();
  const std::size_t start = burn_in_start(base.thetas.size(), burn_in);
  if (start >= base.thetas.size()) throw InvalidParameter("mlpmmh", "chain is empty after burn-in");
  double sum = 0.0;
  for (std::size_t n = start; n < base.thetas.size(); ++n) sum += phi(base.thetas[n]);
  double estimate = sum / static_cast<double>(base.thetas.size() - start);
  for (std::size_t l = 1; l < chains.size(); ++l) {
    const auto [f, c] = level_correction_terms(chains[l], phi, burn_in);
    estimate += f - c;
  }
  return estimate;
}

/// Posterior-mean estimate of every coordinate.
template <class P>
P ml_posterior_mean(const std::vector<LevelChain<P>>& chains, double burn_in = 0.2) {
  P out{};
  for (std::size_t i = 0; i < P::size(); ++i)
    out[i] = ml_estimate<P>(chains, [i](const P& th) { return th[i]; }, burn_in);
  return out;
}

/// Ergodic average over a single plain chain (single-level estimator).
template <class P>
P chain_mean(const LevelChain<P>& chain, double burn_in = 0.2) {
  const std::size_t start = burn_in_start(chain.thetas.size(), burn_in);
  if (start >= chain.thetas.size()) throw InvalidParameter("mlpmmh", "chain is empty after burn-in");
  P out{};
  for (std::size_t n = start; n < chain.thetas.size(); ++n) out += chain.thetas[n];
  return out / static_cast<double>(chain.thetas.size() - start);
}

}  // namespace tcsde
