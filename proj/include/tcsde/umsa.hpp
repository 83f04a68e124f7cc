#pragma once

// Unbiased Markovian stochastic approximation: randomized level l and
// randomized horizon p, with conditional-kernel trajectory refreshes and the
// weighted fine/coarse gradients for the coupled branch.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "tcsde/discretization.hpp"
#include "tcsde/error.hpp"
#include "tcsde/model.hpp"
#include "tcsde/parallel.hpp"
#include "tcsde/random.hpp"
#include "tcsde/smc.hpp"
#include "tcsde/subordinator.hpp"

namespace tcsde {

enum class Mutation { cpf, prior };

/// gamma_n = gain_i / (offset + n)^exponent, one gain per coordinate.
struct StepSchedule {
  std::vector<double> gains{0.025, 0.0125};
  double offset = 10.0;
  double exponent = 0.8;

  double base(std::size_t n) const {
    return 1.0 / std::pow(offset + static_cast<double>(n), exponent);
  }
  template <class P>
  P step(std::size_t n, const P& direction) const {
    P out = direction;
    const double g = base(n);
    for (std::size_t i = 0; i < P::size(); ++i) out[i] *= g * gains[i];
    return out;
  }
};

struct EstimatorConfig {
  // level distribution P_L(l) proportional to 2^(-level_rate * l) on {l_min..l_max}
  int l_min = 3;
  int l_max = 8;
  double level_rate = 1.5;

  // horizon distribution P_P(p | l) proportional to g(p | l), N_p = horizon_base * 2^p
  int p_min = 0;
  int p_cap = 5;
  int level_cap = 8;
  int p_tail_max = 7;
  std::size_t horizon_base = 5;

  StepSchedule schedule;
  std::size_t particles = 100;
  std::vector<double> theta0{0.0, 1.0};
  std::vector<double> lower{-std::numeric_limits<double>::infinity(), 1e-6};
  std::vector<double> upper{std::numeric_limits<double>::infinity(),
                            std::numeric_limits<double>::infinity()};
  double divergence_bound = 1e6;
  Mutation mutation = Mutation::cpf;
  ClockSpec clock;
  ResamplingScheme resampling = ResamplingScheme::multinomial;

  /// Unnormalized g(p | l): 2^(p_cap - p) for p_min <= p <= min(p_cap, level_cap - l)
  /// and, at the lowest level only, 2^-p p log2(p)^2 for p_cap < p <= p_tail_max.
  double horizon_weight(int p, int l) const {
    if (p < p_min) return 0.0;
    if (p <= std::min(p_cap, level_cap - l)) return std::ldexp(1.0, p_cap - p);
    if (l == l_min && p > p_cap && p <= p_tail_max) {
      const double lg = std::log2(static_cast<double>(p));
      return std::ldexp(1.0, -p) * p * lg * lg;
    }
    return 0.0;
  }

  int horizon_max(int l) const {
    return std::max(std::min(p_cap, level_cap - l), l == l_min ? p_tail_max : 0);
  }

  /// P_L over l_min..l_max.
  std::vector<double> level_pmf() const {
    std::vector<double> w;
    for (int l = l_min; l <= l_max; ++l) w.push_back(std::exp2(-level_rate * l));
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) x /= total;
    return w;
  }

  /// P_P(. | l) over p = 0..horizon_max(l) (zero outside the support).
  std::vector<double> horizon_pmf(int l) const {
    std::vector<double> w;
    for (int p = 0; p <= horizon_max(l); ++p) w.push_back(horizon_weight(p, l));
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(total > 0.0))
      throw InvalidParameter("umsa", "horizon distribution is empty at level " + std::to_string(l));
    for (auto& x : w) x /= total;
    return w;
  }

  std::size_t horizon_size(int p) const { return horizon_base << p; }

  void validate(std::size_t dim) const {
    std::vector<std::string> v;
    if (l_min < 0 || l_max < l_min) v.push_back("level support must satisfy 0 <= l_min <= l_max");
    if (p_min < 0 || p_min > 1) v.push_back("p_min must be 0 or 1");
    if (horizon_base < 1) v.push_back("horizon_base must be >= 1");
    if (particles < 2) v.push_back("particles must be >= 2");
    if (schedule.gains.size() != dim || theta0.size() != dim || lower.size() != dim ||
        upper.size() != dim)
      v.push_back("gains, theta0 and bounds must have one entry per parameter");
    for (double g : schedule.gains)
      if (!(g >= 0.0)) v.push_back("step gains must be non-negative");
    if (!(schedule.exponent > 0.5 && schedule.exponent <= 1.0))
      v.push_back("step exponent must lie in (0.5, 1] for the summability conditions");
    if (!(schedule.offset >= 0.0)) v.push_back("step offset must be non-negative");
    if (!(divergence_bound > 0.0)) v.push_back("divergence bound must be positive");
    if (v.empty()) {
      for (int l = l_min; l <= l_max; ++l) {
        double total = 0.0;
        for (int p = 0; p <= horizon_max(l); ++p) total += horizon_weight(p, l);
        if (!(total > 0.0)) v.push_back("horizon distribution is empty at level " + std::to_string(l));
      }
    }
    if (!v.empty()) throw ConfigError(v);
  }
};

template <class P>
P params_from(const std::vector<double>& values) {
  P out{};
  for (std::size_t i = 0; i < P::size(); ++i) out[i] = values.at(i);
  return out;
}

/// Divergence guard followed by projection onto the configured box.
template <class P>
P guard_and_project(const EstimatorConfig& cfg, P theta) {
  for (std::size_t i = 0; i < P::size(); ++i) {
    if (!std::isfinite(theta[i]) || std::abs(theta[i]) > cfg.divergence_bound)
      throw DivergenceError("umsa", "iterate left the divergence bound");
    theta[i] = std::clamp(theta[i], cfg.lower[i], cfg.upper[i]);
  }
  return theta;
}

/// log G_f(u) = sum_k [log G_theta(x^l_k) - log(G_theta(x^l_k) + G_theta'(x^{l-1}_k))].
template <StateSpaceModel M>
double log_g_fine(const M& model, const typename M::Params& theta,
                  const typename M::Params& theta_prime, const CoupledTrajectory& u,
                  const Observations& obs) {
  double total = 0.0;
  for (std::size_t k = 1; k <= obs.size(); ++k) {
    const double lf = model.log_obs_density(theta, u.segments[k].fine.x_end(), obs[k]);
    const double lc = model.log_obs_density(theta_prime, u.segments[k].coarse.x_end(), obs[k]);
    total += lf - log_add_exp(lf, lc);
  }
  return total;
}

template <StateSpaceModel M>
double log_g_coarse(const M& model, const typename M::Params& theta,
                    const typename M::Params& theta_prime, const CoupledTrajectory& u,
                    const Observations& obs) {
  double total = 0.0;
  for (std::size_t k = 1; k <= obs.size(); ++k) {
    const double lf = model.log_obs_density(theta, u.segments[k].fine.x_end(), obs[k]);
    const double lc = model.log_obs_density(theta_prime, u.segments[k].coarse.x_end(), obs[k]);
    total += lc - log_add_exp(lf, lc);
  }
  return total;
}

template <StateSpaceModel M>
double g_fine(const M& model, const typename M::Params& theta,
              const typename M::Params& theta_prime, const CoupledTrajectory& u,
              const Observations& obs) {
  const double g = std::exp(log_g_fine(model, theta, theta_prime, u, obs));
  if (!(g > 0.0)) throw DegenerateWeights("umsa", "fine weight underflowed to zero");
  return g;
}

template <StateSpaceModel M>
double g_coarse(const M& model, const typename M::Params& theta,
                const typename M::Params& theta_prime, const CoupledTrajectory& u,
                const Observations& obs) {
  const double g = std::exp(log_g_coarse(model, theta, theta_prime, u, obs));
  if (!(g > 0.0)) throw DegenerateWeights("umsa", "coarse weight underflowed to zero");
  return g;
}

/// (w_a h_a + w_b h_b) / (w_a + w_b) from log-weights.
template <class P>
P weighted_average(const P& h_a, double log_w_a, const P& h_b, double log_w_b) {
  const double m = std::max(log_w_a, log_w_b);
  if (!std::isfinite(m)) throw DegenerateWeights("umsa", "both gradient weights are zero");
  const double wa = std::exp(log_w_a - m), wb = std::exp(log_w_b - m);
  return (h_a * wa + h_b * wb) / (wa + wb);
}

/// H over the fine (or coarse) component of a coupled trajectory.
template <StateSpaceModel M>
typename M::Params coupled_score(const M& model, const typename M::Params& theta,
                                 const CoupledTrajectory& u, const Observations& obs, bool fine) {
  if (u.blocks() != obs.size())
    throw InvalidParameter("umsa", "trajectory and observations differ in length");
  const auto& first = fine ? u.segments[0].fine : u.segments[0].coarse;
  auto h = model.grad_log_initial(theta, first.x_end());
  for (std::size_t k = 1; k <= obs.size(); ++k)
    h += score_block(model, theta, fine ? u.segments[k].fine : u.segments[k].coarse, obs[k]);
  return h;
}

/// Weighted fine gradient: G_f-weighted mean of H^l_theta over (u_bar, u).
template <StateSpaceModel M>
typename M::Params weighted_gradient_fine(const M& model, const CoupledTrajectory& u_bar,
                                          const CoupledTrajectory& u,
                                          const typename M::Params& theta,
                                          const typename M::Params& theta_prime,
                                          const Observations& obs) {
  return weighted_average(coupled_score(model, theta, u_bar, obs, true),
                          log_g_fine(model, theta, theta_prime, u_bar, obs),
                          coupled_score(model, theta, u, obs, true),
                          log_g_fine(model, theta, theta_prime, u, obs));
}

/// Weighted coarse gradient: G_c-weighted mean of H^{l-1}_theta' over (u_bar, u).
template <StateSpaceModel M>
typename M::Params weighted_gradient_coarse(const M& model, const CoupledTrajectory& u_bar,
                                            const CoupledTrajectory& u,
                                            const typename M::Params& theta,
                                            const typename M::Params& theta_prime,
                                            const Observations& obs) {
  return weighted_average(coupled_score(model, theta_prime, u_bar, obs, false),
                          log_g_coarse(model, theta, theta_prime, u_bar, obs),
                          coupled_score(model, theta_prime, u, obs, false),
                          log_g_coarse(model, theta, theta_prime, u, obs));
}

/// Iterates recorded at N_{p-1} (`previous`) and N_p (`final`); the coarse
/// pair is only meaningful for the coupled branch.
template <class P>
struct BranchCheckpoints {
  bool coupled = false;
  P fine_previous{}, fine_final{};
  P coarse_previous{}, coarse_final{};
};

/// Generic SA recursion theta_n = Pi(theta_{n-1} + gamma_n grad(n, theta_{n-1})),
/// returning the iterates at the requested checkpoints (0 = theta_0).
template <class P, class Grad>
std::vector<P> sa_iterate(const EstimatorConfig& cfg, P theta, std::size_t iterations,
                          const std::vector<std::size_t>& checkpoints, Grad&& grad) {
  std::vector<P> out(checkpoints.size());
  auto record = [&](std::size_t n) {
    for (std::size_t c = 0; c < checkpoints.size(); ++c)
      if (checkpoints[c] == n) out[c] = theta;
  };
  record(0);
  for (std::size_t n = 1; n <= iterations; ++n) {
    theta = guard_and_project(cfg, theta + cfg.schedule.step(n, grad(n, theta)));
    record(n);
  }
  return out;
}

/// Single-level branch at `level`: CPF (or prior) trajectory refresh and the
/// plain H^l step. Returns iterates at N_{p-1} (or theta_0 when p = 0) and N_p.
template <StateSpaceModel M>
BranchCheckpoints<typename M::Params> sa_single(const M& model, const EstimatorConfig& cfg,
                                                int level, int p, const Observations& obs,
                                                RngStream& rng, CostCounter* cost = nullptr) {
  using P = typename M::Params;
  const auto clock = cfg.clock.at_level(level);
  const SmcOptions opts{cfg.resampling, cost};
  P theta0 = params_from<P>(cfg.theta0);
  Trajectory u = sample_trajectory(model, theta0, level, obs.size(), clock, rng, cost);
  const std::size_t n_final = cfg.horizon_size(p);
  const std::size_t n_prev = p > 0 ? cfg.horizon_size(p - 1) : 0;
  auto it = sa_iterate<P>(cfg, theta0, n_final, {n_prev, n_final}, [&](std::size_t, const P& th) {
    if (cfg.mutation == Mutation::cpf)
      u = cpf(model, th, level, u, cfg.particles, obs, clock, rng, opts);
    else
      u = sample_trajectory(model, th, level, obs.size(), clock, rng, cost);
    return score_increment(model, th, u, obs);
  });
  BranchCheckpoints<P> out;
  out.fine_previous = it[0];
  out.fine_final = it[1];
  return out;
}

/// Coupled branch at level >= 1: two successive delta-CPF (or prior) refreshes
/// per iteration, fine iterate driven by the weighted fine gradient and coarse
/// iterate by the weighted coarse gradient.
template <StateSpaceModel M>
BranchCheckpoints<typename M::Params> sa_coupled(const M& model, const EstimatorConfig& cfg,
                                                 int level, int p, const Observations& obs,
                                                 RngStream& rng, CostCounter* cost = nullptr) {
  using P = typename M::Params;
  if (level < 1) throw InvalidParameter("umsa", "coupled branch needs level >= 1");
  const auto clock = cfg.clock.at_level(level);
  const SmcOptions opts{cfg.resampling, cost};
  P fine = params_from<P>(cfg.theta0);
  P coarse = fine;
  CoupledTrajectory u =
      sample_coupled_trajectory(model, fine, coarse, level, obs.size(), clock, rng, cost);
  const std::size_t n_final = cfg.horizon_size(p);
  const std::size_t n_prev = p > 0 ? cfg.horizon_size(p - 1) : 0;

  BranchCheckpoints<P> out;
  out.coupled = true;
  auto record = [&](std::size_t n) {
    if (n == n_prev) out.fine_previous = fine, out.coarse_previous = coarse;
    if (n == n_final) out.fine_final = fine, out.coarse_final = coarse;
  };
  record(0);
  for (std::size_t n = 1; n <= n_final; ++n) {
    CoupledTrajectory u_bar;
    if (cfg.mutation == Mutation::cpf) {
      u_bar = delta_cpf(model, fine, coarse, level, u, cfg.particles, obs, clock, rng, opts);
      u = delta_cpf(model, fine, coarse, level, u_bar, cfg.particles, obs, clock, rng, opts);
    } else {
      u_bar = sample_coupled_trajectory(model, fine, coarse, level, obs.size(), clock, rng, cost);
      u = sample_coupled_trajectory(model, fine, coarse, level, obs.size(), clock, rng, cost);
    }
    const P hf = weighted_gradient_fine(model, u_bar, u, fine, coarse, obs);
    const P hc = weighted_gradient_coarse(model, u_bar, u, fine, coarse, obs);
    fine = guard_and_project(cfg, fine + cfg.schedule.step(n, hf));
    coarse = guard_and_project(cfg, coarse + cfg.schedule.step(n, hc));
    record(n);
  }
  return out;
}

/// The four return branches: single-level (p = 0 or difference in p) and
/// coupled (level difference, or its difference in p), divided by P_P(p|l) P_L(l).
template <class P>
P assemble_estimate(const BranchCheckpoints<P>& c, int p, double probability) {
  if (!(probability > 0.0)) throw InvalidParameter("umsa", "selection probability must be positive");
  if (!c.coupled) {
    if (p == 0) return c.fine_final / probability;
    return (c.fine_final - c.fine_previous) / probability;
  }
  if (p == 0) return (c.fine_final - c.coarse_final) / probability;
  return ((c.fine_final - c.coarse_final) - (c.fine_previous - c.coarse_previous)) / probability;
}

template <class P>
struct UmsaDraw {
  int level = 0;
  int horizon = 0;
  double probability = 1.0;
  P theta_hat{};
  std::uint64_t cost_ops = 0;
  std::uint64_t wall_ns = 0;
};

/// One draw of the randomized estimator. The level and horizon are drawn from
/// `rng`; the SA run uses an independent substream so that, for a fixed stream,
/// runs at different horizons share their prefix.
template <StateSpaceModel M>
UmsaDraw<typename M::Params> umsa_draw(const M& model, const EstimatorConfig& cfg,
                                       const Observations& obs, RngStream& rng) {
  const auto start = std::chrono::steady_clock::now();
  UmsaDraw<typename M::Params> d;
  const auto lp = cfg.level_pmf();
  const std::size_t li = categorical(lp, rng);
  d.level = cfg.l_min + static_cast<int>(li);
  const auto pp = cfg.horizon_pmf(d.level);
  d.horizon = static_cast<int>(categorical(pp, rng));
  d.probability = lp[li] * pp[static_cast<std::size_t>(d.horizon)];

  CostCounter cost;
  RngStream run = rng.substream(1);
  const auto checkpoints = d.level == cfg.l_min
                               ? sa_single(model, cfg, d.level, d.horizon, obs, run, &cost)
                               : sa_coupled(model, cfg, d.level, d.horizon, obs, run, &cost);
  d.theta_hat = assemble_estimate(checkpoints, d.horizon, d.probability);
  d.cost_ops = cost.fine_steps;
  d.wall_ns = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                             std::chrono::steady_clock::now() - start)
                                             .count());
  return d;
}

template <class P>
struct UmsaEstimate {
  P mean{};
  std::vector<UmsaDraw<P>> draws;
};

/// Mean of M independent draws; draw r uses stream.substream(r).
template <StateSpaceModel M>
UmsaEstimate<typename M::Params> umsa_estimate(const M& model, const EstimatorConfig& cfg,
                                               const Observations& obs, std::size_t replicates,
                                               const RngStream& stream, std::size_t threads = 1) {
  if (replicates < 1) throw InvalidParameter("umsa", "need at least one replicate");
  cfg.validate(M::Params::size());
  UmsaEstimate<typename M::Params> out;
  out.draws.resize(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) {
    RngStream rng = stream.substream(r);
    out.draws[r] = umsa_draw(model, cfg, obs, rng);
  });
  for (const auto& d : out.draws) out.mean += d.theta_hat;
  out.mean /= static_cast<double>(replicates);
  return out;
}

/// Expected fine-grid work per draw implied by the configuration:
/// sum_l P_L(l) sum_p P_P(p|l) [init + N_p * sweeps * (N-1)] * T * 2^l.
inline double expected_draw_cost(const EstimatorConfig& cfg, std::size_t T) {
  const auto lp = cfg.level_pmf();
  double total = 0.0;
  for (int l = cfg.l_min; l <= cfg.l_max; ++l) {
    const auto pp = cfg.horizon_pmf(l);
    const double sweeps = l == cfg.l_min ? 1.0 : 2.0;
    const double per_iter =
        cfg.mutation == Mutation::cpf ? sweeps * static_cast<double>(cfg.particles - 1) : sweeps;
    double inner = 0.0;
    for (std::size_t p = 0; p < pp.size(); ++p)
      inner += pp[p] * (1.0 + static_cast<double>(cfg.horizon_size(static_cast<int>(p))) * per_iter);
    total += lp[static_cast<std::size_t>(l - cfg.l_min)] * inner * static_cast<double>(T) *
             std::ldexp(1.0, l);
  }
  return total;
}

}  // namespace tcsde
