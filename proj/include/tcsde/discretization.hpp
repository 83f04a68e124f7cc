#pragma once

// Level-l Euler-Maruyama for the time-changed SDE, its synchronous fine/coarse
// coupling, and the discretized score H^l.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "tcsde/error.hpp"
#include "tcsde/model.hpp"
#include "tcsde/random.hpp"
#include "tcsde/subordinator.hpp"

namespace tcsde {

/// Instrumented work: one unit per fine-grid Euler step of one particle.
struct CostCounter {
  std::uint64_t fine_steps = 0;
};

inline double level_step(int level) { return std::ldexp(1.0, -level); }
inline std::size_t steps_per_block(int level) { return std::size_t{1} << level; }

/// States and clock values on the grid (k-1) + s * 2^-level, s = 0..2^level.
/// Block 0 holds the single initial point. `clock` is the subordinator
/// position after the last grid point.
struct PathSegment {
  int level = 0;
  std::size_t block = 0;
  std::vector<double> x_values;
  std::vector<double> l_values;
  SubordinatorState clock;

  double x_end() const { return x_values.back(); }
  double l_end() const { return l_values.back(); }
};

/// Fine (level l) and coarse (level l-1) segments driven by the same noise.
/// Only the fine clock is simulated; the coarse one is its restriction.
struct CoupledSegment {
  PathSegment fine;
  PathSegment coarse;
};

struct Trajectory {
  std::vector<PathSegment> segments;  // U_0..U_T

  int level() const { return segments.front().level; }
  std::size_t blocks() const { return segments.size() - 1; }
  double x_at(std::size_t k) const { return segments[k].x_end(); }
};

struct CoupledTrajectory {
  std::vector<CoupledSegment> segments;

  int level() const { return segments.front().fine.level; }
  std::size_t blocks() const { return segments.size() - 1; }

  Trajectory fine() const {
    Trajectory t;
    t.segments.reserve(segments.size());
    for (const auto& s : segments) t.segments.push_back(s.fine);
    return t;
  }
  Trajectory coarse() const {
    Trajectory t;
    t.segments.reserve(segments.size());
    for (const auto& s : segments) t.segments.push_back(s.coarse);
    return t;
  }
};

/// One explicit Euler step in operational time; coefficients at the left point.
template <StateSpaceModel M>
double euler_step(const M& model, const typename M::Params& theta, double x, double dl,
                  double dw) {
  if (dl < 0.0) throw InvalidParameter("discretization", "operational-time increment is negative");
  const double next = x + model.drift(theta, x) * dl + model.diffusion(x) * dw;
  if (!std::isfinite(next)) throw NumericError("discretization", "Euler step overflowed");
  return next;
}

/// The block initial point U_0 = (X_0, L_0 = 0).
template <StateSpaceModel M>
PathSegment initial_segment(const M& model, const typename M::Params& theta, int level,
                            const Subordinator& clock, RngStream& rng) {
  PathSegment seg;
  seg.level = level;
  seg.block = 0;
  seg.clock = clock.start();
  const double l0 = clock.advance_to(seg.clock, 0.0, rng);
  seg.x_values = {model.sample_initial(theta, rng)};
  seg.l_values = {l0};
  return seg;
}

/// Coupled initial point; both levels start from the same X_0.
template <StateSpaceModel M>
CoupledSegment initial_coupled_segment(const M& model, const typename M::Params& theta, int level,
                                       const Subordinator& clock, RngStream& rng) {
  if (level < 1) throw InvalidParameter("discretization", "coupled level must be >= 1");
  CoupledSegment seg;
  seg.fine = initial_segment(model, theta, level, clock, rng);
  seg.coarse = seg.fine;
  seg.coarse.level = level - 1;
  return seg;
}

/// Kernel \bar M: one observation block of 2^level Euler sub-steps.
template <StateSpaceModel M>
PathSegment sample_block(const M& model, const typename M::Params& theta, int level,
                         const PathSegment& previous, const Subordinator& clock, RngStream& rng,
                         CostCounter* cost = nullptr) {
  const std::size_t n = steps_per_block(level);
  const double h = level_step(level);
  const auto k = previous.block + 1;
  const double t0 = static_cast<double>(previous.block);

  PathSegment seg;
  seg.level = level;
  seg.block = k;
  seg.clock = previous.clock;
  seg.x_values.resize(n + 1);
  seg.l_values.resize(n + 1);
  double x = seg.x_values[0] = previous.x_end();
  double l = seg.l_values[0] = previous.l_end();
  for (std::size_t s = 1; s <= n; ++s) {
    const double l_next = clock.advance_to(seg.clock, t0 + static_cast<double>(s) * h, rng);
    const double dl = l_next - l;
    const double dw = std::sqrt(dl) * rng.normal();
    x = euler_step(model, theta, x, dl, dw);
    l = l_next;
    seg.x_values[s] = x;
    seg.l_values[s] = l;
  }
  if (cost) cost->fine_steps += n;
  return seg;
}

/// Kernel \tilde M: synchronous coupling. The fine path uses theta_fine on
/// the 2^level grid; the coarse path uses theta_coarse with pairwise-summed
/// (dL, dW).
template <StateSpaceModel M>
CoupledSegment sample_coupled_block(const M& model, const typename M::Params& theta_fine,
                                    const typename M::Params& theta_coarse, int level,
                                    const CoupledSegment& previous, const Subordinator& clock,
                                    RngStream& rng, CostCounter* cost = nullptr) {
  if (level < 1) throw InvalidParameter("discretization", "coupled level must be >= 1");
  const std::size_t n = steps_per_block(level);
  const double h = level_step(level);
  const auto k = previous.fine.block + 1;
  const double t0 = static_cast<double>(previous.fine.block);

  CoupledSegment seg;
  auto& f = seg.fine;
  auto& c = seg.coarse;
  f.level = level;
  c.level = level - 1;
  f.block = c.block = k;
  f.clock = previous.fine.clock;
  f.x_values.resize(n + 1);
  f.l_values.resize(n + 1);
  c.x_values.resize(n / 2 + 1);
  c.l_values.resize(n / 2 + 1);

  double xf = f.x_values[0] = previous.fine.x_end();
  double xc = c.x_values[0] = previous.coarse.x_end();
  double l = f.l_values[0] = c.l_values[0] = previous.fine.l_end();
  double dl_pair = 0.0, dw_pair = 0.0;
  for (std::size_t s = 1; s <= n; ++s) {
    const double l_next = clock.advance_to(f.clock, t0 + static_cast<double>(s) * h, rng);
    const double dl = l_next - l;
    const double dw = std::sqrt(dl) * rng.normal();
    xf = euler_step(model, theta_fine, xf, dl, dw);
    l = l_next;
    f.x_values[s] = xf;
    f.l_values[s] = l;
    dl_pair += dl;
    dw_pair += dw;
    if (s % 2 == 0) {
      xc = euler_step(model, theta_coarse, xc, dl_pair, dw_pair);
      c.x_values[s / 2] = xc;
      c.l_values[s / 2] = l;
      dl_pair = dw_pair = 0.0;
    }
  }
  c.clock = f.clock;
  if (cost) cost->fine_steps += n;
  return seg;
}

/// Unconditional draw from nu_{theta,l}: initial point plus T blocks.
template <StateSpaceModel M>
Trajectory sample_trajectory(const M& model, const typename M::Params& theta, int level,
                             std::size_t T, const Subordinator& clock, RngStream& rng,
                             CostCounter* cost = nullptr) {
  Trajectory traj;
  traj.segments.reserve(T + 1);
  traj.segments.push_back(initial_segment(model, theta, level, clock, rng));
  for (std::size_t k = 1; k <= T; ++k)
    traj.segments.push_back(sample_block(model, theta, level, traj.segments.back(), clock, rng, cost));
  return traj;
}

template <StateSpaceModel M>
CoupledTrajectory sample_coupled_trajectory(const M& model, const typename M::Params& theta_fine,
                                            const typename M::Params& theta_coarse, int level,
                                            std::size_t T, const Subordinator& clock,
                                            RngStream& rng, CostCounter* cost = nullptr) {
  CoupledTrajectory traj;
  traj.segments.reserve(T + 1);
  traj.segments.push_back(initial_coupled_segment(model, theta_fine, level, clock, rng));
  for (std::size_t k = 1; k <= T; ++k)
    traj.segments.push_back(sample_coupled_block(model, theta_fine, theta_coarse, level,
                                                 traj.segments.back(), clock, rng, cost));
  return traj;
}

/// Contribution of one block k >= 1 to H^l: the observation score at X_k and
/// the Girsanov path terms over the block's sub-steps.
template <StateSpaceModel M>
typename M::Params score_block(const M& model, const typename M::Params& theta,
                               const PathSegment& segment, double y) {
  using P = typename M::Params;
  P path{};
  for (std::size_t s = 0; s + 1 < segment.x_values.size(); ++s) {
    const double x = segment.x_values[s];
    const double dl = segment.l_values[s + 1] - segment.l_values[s];
    const double dx = segment.x_values[s + 1] - x;
    // -1/2 [grad|b|^2 dL - 2 grad b Sigma^-1 sigma dX], scalar state
    path += model.grad_sq_girsanov_drift(theta, x) * (-0.5 * dl);
    path += model.grad_girsanov_drift(theta, x) * (dx / model.diffusion(x));
  }
  P out = model.grad_log_obs_density(theta, segment.x_end(), y) + path;
  for (std::size_t i = 0; i < P::size(); ++i)
    if (!std::isfinite(out[i])) throw NumericError("discretization", "score is not finite");
  return out;
}

/// H^l_theta over a complete trajectory.
template <StateSpaceModel M>
typename M::Params score_increment(const M& model, const typename M::Params& theta,
                                   const Trajectory& trajectory, const Observations& obs) {
  if (trajectory.blocks() != obs.size())
    throw InvalidParameter("discretization", "trajectory and observations differ in length");
  auto h = model.grad_log_initial(theta, trajectory.segments.front().x_end());
  for (std::size_t k = 1; k <= obs.size(); ++k)
    h += score_block(model, theta, trajectory.segments[k], obs[k]);
  return h;
}

}  // namespace tcsde
