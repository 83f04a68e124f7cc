#pragma once

// Replication drivers shared by the command-line tool and the acceptance
// runner: replicate-MSE study of the score-based estimator, ML vs SL cost
// study of the Bayesian estimator, and fitted-model return simulations.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tcsde/analysis.hpp"
#include "tcsde/data.hpp"
#include "tcsde/mlpmmh.hpp"
#include "tcsde/parallel.hpp"
#include "tcsde/umsa.hpp"

namespace tcsde {

struct MseRow {
  std::size_t M = 0;
  std::vector<double> mse;
  double cost_ops = 0.0;      // mean instrumented work per M-draw estimate
  double cpu_seconds = 0.0;   // mean summed draw wall time per M-draw estimate
};

struct MseStudy {
  std::vector<double> reference;
  std::vector<MseRow> rows;
  std::vector<RegressionFit> slope_vs_m;     // one per coordinate
  std::vector<RegressionFit> slope_vs_cost;  // one per coordinate
  std::size_t replicates = 0;
};

/// Replicate r of size M averages draws [r*M, (r+1)*M) of one pool of
/// replicates * max(Ms) draws. The reference is the pooled mean of every draw.
template <StateSpaceModel M>
MseStudy mse_study(const M& model, const EstimatorConfig& cfg, const Observations& obs,
                   const std::vector<std::size_t>& Ms, std::size_t replicates,
                   const RngStream& stream, std::size_t threads = 1) {
  if (Ms.empty() || replicates < 2) throw InvalidParameter("studies", "need M values and >= 2 replicates");
  const std::size_t max_m = *std::max_element(Ms.begin(), Ms.end());
  const auto pool = umsa_estimate(model, cfg, obs, max_m * replicates, stream, threads);
  const std::size_t dim = M::Params::size();

  MseStudy out;
  out.replicates = replicates;
  out.reference.assign(pool.mean.v.begin(), pool.mean.v.end());
  for (std::size_t m : Ms) {
    std::vector<std::vector<double>> estimates;
    MseRow row;
    row.M = m;
    for (std::size_t r = 0; r < replicates; ++r) {
      std::vector<double> avg(dim, 0.0);
      for (std::size_t j = 0; j < m; ++j) {
        const auto& d = pool.draws[r * m + j];
        for (std::size_t i = 0; i < dim; ++i) avg[i] += d.theta_hat[i] / static_cast<double>(m);
        row.cost_ops += static_cast<double>(d.cost_ops);
        row.cpu_seconds += static_cast<double>(d.wall_ns) * 1e-9;
      }
      estimates.push_back(avg);
    }
    row.cost_ops /= static_cast<double>(replicates);
    row.cpu_seconds /= static_cast<double>(replicates);
    row.mse = mse(estimates, out.reference);
    out.rows.push_back(row);
  }
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<double> ms, costs, errs;
    for (const auto& row : out.rows) {
      ms.push_back(static_cast<double>(row.M));
      costs.push_back(row.cost_ops);
      errs.push_back(row.mse[i]);
    }
    out.slope_vs_m.push_back(loglog_fit(ms, errs));
    out.slope_vs_cost.push_back(loglog_fit(costs, errs));
  }
  return out;
}

struct ComplexityPoint {
  std::string method;  // "ML" or "SL"
  double epsilon = 0.0;
  int L = 0;
  std::vector<std::size_t> iterations;
  std::vector<double> mse;
  double cost_ops = 0.0;  // mean per replicate
  double acceptance = 0.0;
  std::vector<std::vector<double>> estimates;
};

struct ComplexityStudy {
  std::vector<double> reference;
  std::vector<ComplexityPoint> points;
  std::vector<RegressionFit> ml_cost_vs_mse;  // log cost against log MSE, per coordinate
  std::vector<RegressionFit> sl_cost_vs_mse;
  std::vector<double> matched_cost_ratio;     // ML / SL cost at the ML MSE of the smallest epsilon
};

struct ComplexitySettings {
  std::vector<double> epsilons{0.25, 0.125, 0.0625};
  std::size_t replicates = 20;
  double c = 1.0;
  std::size_t floor_iters = 100;
  int level_cap = 8;
  double burn_in = 0.2;
};

/// Iterations of the single-level chain at tolerance epsilon: c * eps^-2, floored.
inline std::size_t single_level_iterations(double epsilon, double c, std::size_t floor_iters) {
  return std::max<std::size_t>(floor_iters,
                               static_cast<std::size_t>(std::ceil(c * std::pow(epsilon, -2.0) - 1e-9)));
}

/// For each epsilon: `replicates` ML runs with allocate(epsilon) and as many
/// SL chains at level L with single_level_iterations(epsilon). MSE is taken
/// against `reference` when given, otherwise against the pooled ML mean at
/// the smallest epsilon.
template <StateSpaceModel M>
ComplexityStudy complexity_study(const M& model, const Prior& prior, const MlConfig& cfg,
                                 const Observations& obs, const ComplexitySettings& s,
                                 const RngStream& stream, std::size_t threads = 1,
                                 std::vector<double> reference = {}) {
  using P = typename M::Params;
  if (s.epsilons.empty() || s.replicates < 2)
    throw InvalidParameter("studies", "need epsilons and >= 2 replicates");
  const std::size_t dim = P::size();
  ComplexityStudy out;

  struct Job {
    std::size_t e;
    bool ml;
    std::size_t r;
  };
  std::vector<Job> jobs;
  for (std::size_t e = 0; e < s.epsilons.size(); ++e)
    for (bool ml : {true, false})
      for (std::size_t r = 0; r < s.replicates; ++r) jobs.push_back({e, ml, r});

  struct JobResult {
    std::vector<double> estimate;
    double cost = 0.0;
    double acceptance = 0.0;
  };
  std::vector<JobResult> results(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    const auto& job = jobs[j];
    const auto alloc = allocate(s.epsilons[job.e], s.level_cap, s.c, s.floor_iters);
    const RngStream base = stream.substream(job.e).substream(job.ml ? 0 : 1).substream(job.r);
    JobResult res;
    if (job.ml) {
      const auto chains = ml_run(model, prior, cfg, alloc.iterations, obs, base, 1);
      const P mean = ml_posterior_mean(chains, s.burn_in);
      res.estimate.assign(mean.v.begin(), mean.v.end());
      std::uint64_t proposals = 0, accepted = 0;
      for (const auto& ch : chains) {
        res.cost += static_cast<double>(ch.stats.cost.fine_steps);
        proposals += ch.stats.proposals;
        accepted += ch.stats.accepted;
      }
      res.acceptance = proposals ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0.0;
    } else {
      RngStream rng = base;
      const auto chain = run_plain_chain(model, prior, cfg, alloc.L,
                                         single_level_iterations(s.epsilons[job.e], s.c, s.floor_iters),
                                         obs, rng);
      const P mean = chain_mean(chain, s.burn_in);
      res.estimate.assign(mean.v.begin(), mean.v.end());
      res.cost = static_cast<double>(chain.stats.cost.fine_steps);
      res.acceptance = chain.stats.acceptance_rate();
    }
    results[j] = std::move(res);
  });

  for (std::size_t e = 0; e < s.epsilons.size(); ++e) {
    for (bool ml : {true, false}) {
      ComplexityPoint pt;
      pt.method = ml ? "ML" : "SL";
      pt.epsilon = s.epsilons[e];
      const auto alloc = allocate(pt.epsilon, s.level_cap, s.c, s.floor_iters);
      pt.L = alloc.L;
      pt.iterations = ml ? alloc.iterations
                         : std::vector<std::size_t>{single_level_iterations(pt.epsilon, s.c, s.floor_iters)};
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (jobs[j].e != e || jobs[j].ml != ml) continue;
        pt.estimates.push_back(results[j].estimate);
        pt.cost_ops += results[j].cost / static_cast<double>(s.replicates);
        pt.acceptance += results[j].acceptance / static_cast<double>(s.replicates);
      }
      out.points.push_back(std::move(pt));
    }
  }

  if (reference.empty()) {
    const auto smallest = static_cast<std::size_t>(
        std::min_element(s.epsilons.begin(), s.epsilons.end()) - s.epsilons.begin());
    reference.assign(dim, 0.0);
    const auto& pool = out.points[2 * smallest].estimates;
    for (const auto& est : pool)
      for (std::size_t i = 0; i < dim; ++i) reference[i] += est[i] / static_cast<double>(pool.size());
  }
  out.reference = reference;
  for (auto& pt : out.points) pt.mse = mse(pt.estimates, reference);

  const auto smallest = static_cast<std::size_t>(
      std::min_element(s.epsilons.begin(), s.epsilons.end()) - s.epsilons.begin());
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<double> ml_mse, ml_cost, sl_mse, sl_cost;
    for (const auto& pt : out.points) {
      (pt.method == "ML" ? ml_mse : sl_mse).push_back(pt.mse[i]);
      (pt.method == "ML" ? ml_cost : sl_cost).push_back(pt.cost_ops);
    }
    if (ml_mse.size() >= 2) {
      out.ml_cost_vs_mse.push_back(loglog_fit(ml_mse, ml_cost));
      out.sl_cost_vs_mse.push_back(loglog_fit(sl_mse, sl_cost));
      const auto& sl = out.sl_cost_vs_mse.back();
      const auto& ml_pt = out.points[2 * smallest];
      const double sl_cost_at = std::exp(sl.intercept + sl.slope * std::log(ml_pt.mse[i]));
      out.matched_cost_ratio.push_back(ml_pt.cost_ops / sl_cost_at);
    }
  }
  return out;
}

/// `count` independent length-n return series x_k - x_{k-1} of the latent
/// path at theta; series s uses stream.substream(s).
template <StateSpaceModel M>
std::vector<std::vector<double>> simulate_return_series(const M& model, const typename M::Params& theta,
                                                        int level, std::size_t n, std::size_t count,
                                                        const ClockSpec& clock, const RngStream& stream) {
  std::vector<std::vector<double>> out;
  const auto sub = clock.at_level(level);
  for (std::size_t s = 0; s < count; ++s) {
    RngStream rng = stream.substream(s);
    out.push_back(simulate_increments(model, theta, level, n, sub, rng));
  }
  return out;
}

}  // namespace tcsde
