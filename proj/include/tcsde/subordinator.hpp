#pragma once

// Inverse alpha-stable subordinator L_t = inf{s : D_s > t}, sampled by
// simulating D on an operational-time lattice of step delta and scanning for
// the first passage.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "tcsde/error.hpp"
#include "tcsde/random.hpp"

namespace tcsde {

/// Position of one subordinator path. For the stable clock `steps` counts
/// lattice points visited and `d_value` is D(steps * delta), the first lattice
/// value beyond `last_target`; keeping the overshoot makes the pair Markov so
/// later targets continue the same D path.
struct SubordinatorState {
  std::uint64_t steps = 0;
  double d_value = 0.0;
  double last_target = 0.0;
  double l_value = 0.0;
};

struct SubordinatorGridPath {
  std::vector<double> grid;
  std::vector<double> l_values;
};

class Subordinator {
 public:
  enum class Kind { stable, identity, frozen };

  static Subordinator stable(double alpha, double delta) {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw InvalidParameter("subordinator", "alpha must lie in (0,1)");
    if (!(delta > 0.0) || !std::isfinite(delta))
      throw InvalidParameter("subordinator", "operational time step must be positive");
    return Subordinator(Kind::stable, alpha, delta);
  }
  /// Test double: L_t = t, reducing the model to a plain SDE.
  static Subordinator identity() { return Subordinator(Kind::identity, 0.0, 0.0); }
  /// Test double: L_t = 0, every path is permanently trapped.
  static Subordinator frozen() { return Subordinator(Kind::frozen, 0.0, 0.0); }

  Kind kind() const noexcept { return kind_; }
  double alpha() const noexcept { return alpha_; }
  double delta() const noexcept { return delta_; }

  SubordinatorState start() const { return {}; }

  /// Advances to physical time `t` and returns L_t. For the stable clock the
  /// value is (k - 1) * delta with k the first lattice index where D > t.
  double advance_to(SubordinatorState& state, double t, RngStream& rng) const {
    if (t < state.last_target)
      throw OrderingError("subordinator", "targets must be non-decreasing");
    state.last_target = t;
    switch (kind_) {
      case Kind::identity:
        state.l_value = t;
        break;
      case Kind::frozen:
        state.l_value = 0.0;
        break;
      case Kind::stable: {
        // D(0) = 0 is never beyond t >= 0, so the first call always steps
        while (state.d_value <= t) {
          state.d_value += increment_scale_ * stable_positive(alpha_, rng);
          ++state.steps;
        }
        state.l_value = static_cast<double>(state.steps - 1) * delta_;
        break;
      }
    }
    return state.l_value;
  }

  /// L on a strictly increasing grid starting at 0, from one D path.
  SubordinatorGridPath sample_grid(std::span<const double> grid, RngStream& rng) const {
    if (grid.empty()) throw GridError("subordinator", "grid is empty");
    if (grid.front() != 0.0) throw GridError("subordinator", "grid must start at 0");
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (!(grid[i] > grid[i - 1]))
        throw GridError("subordinator", "grid must be strictly increasing");
    SubordinatorGridPath path{{grid.begin(), grid.end()}, {}};
    path.l_values.reserve(grid.size());
    auto state = start();
    for (double t : grid) path.l_values.push_back(advance_to(state, t, rng));
    return path;
  }

 private:
  Subordinator(Kind kind, double alpha, double delta)
      : kind_(kind),
        alpha_(alpha),
        delta_(delta),
        increment_scale_(kind == Kind::stable ? std::pow(delta, 1.0 / alpha) : 0.0) {}

  Kind kind_;
  double alpha_;
  double delta_;
  double increment_scale_;  // delta^(1/alpha): D increments are delta^(1/alpha) S
};

/// Restriction of a level-l grid path to the level-(l-1) grid (every second point).
inline SubordinatorGridPath coarsen(const SubordinatorGridPath& fine) {
  if (fine.grid.size() % 2 == 0)
    throw GridError("subordinator", "coarsening needs an odd number of grid points");
  SubordinatorGridPath coarse;
  for (std::size_t i = 0; i < fine.grid.size(); i += 2) {
    coarse.grid.push_back(fine.grid[i]);
    coarse.l_values.push_back(fine.l_values[i]);
  }
  return coarse;
}

/// Clock configuration for a whole estimator run: the operational-time step
/// is tied to the discretization level as delta = op_time_ratio * 2^-level.
struct ClockSpec {
  Subordinator::Kind kind = Subordinator::Kind::stable;
  double alpha = 0.75;
  double op_time_ratio = 0.1;

  Subordinator at_level(int level) const {
    switch (kind) {
      case Subordinator::Kind::identity:
        return Subordinator::identity();
      case Subordinator::Kind::frozen:
        return Subordinator::frozen();
      case Subordinator::Kind::stable:
        break;
    }
    return Subordinator::stable(alpha, op_time_ratio * std::ldexp(1.0, -level));
  }
};

}  // namespace tcsde
