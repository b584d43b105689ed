#pragma once

#include <deque>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irsgame/population.hpp"

namespace irsgame {

enum class IntegrationMethod { ForwardEuler, Rk4 };

std::string to_string(IntegrationMethod method);
IntegrationMethod parse_integration_method(std::string_view name);

struct IntegratorSpec {
  IntegrationMethod method = IntegrationMethod::Rk4;
  double dt = 0.01;
  double horizon = 1000.0;
  /// Project every step back onto the simplex (clamp negatives, rescale).
  bool renormalize = true;
  /// ODE only: a single-step drift correction larger than this is an error.
  double max_correction = 1e-6;

  /// Throws ConfigError unless dt > 0 and horizon >= dt.
  void validate() const;
  std::size_t steps() const;

  friend bool operator==(const IntegratorSpec&, const IntegratorSpec&) = default;
};

/// Right-hand side of an autonomous or time-dependent ODE on the simplex.
using VectorField = std::function<std::vector<double>(double t, const PopulationState&)>;
/// Utilities recorded alongside each state.
using UtilityObserver = std::function<UtilityVector(const PopulationState&)>;
/// Right-hand side of a constant-delay DDE; reads the past through the lookup.
using DelayedField = std::function<std::vector<double>(double t, const HistoryLookup&)>;

/// Samples spanning the last `span` time units on a uniform grid.
/// Lookups before the first pushed sample return the pre-history (the
/// first sample held constant); lookups between samples interpolate
/// linearly, both the state and the utilities.
class HistoryBuffer {
public:
  HistoryBuffer(double dt, double span);

  void push(HistorySample sample);
  HistorySample at(double t) const;

  std::size_t size() const noexcept { return samples_.size(); }
  double latest_time() const;
  double earliest_time() const;

private:
  double dt_;
  double span_;
  bool truncated_ = false;
  std::deque<HistorySample> samples_;
};

/// Fixed-step integration, sampled at every step, t0 = 0. Groups whose
/// share is driven through zero are absorbed at zero (the field vanishes
/// there) and logged in `Trajectory::extinctions`.
Trajectory integrate_ode(const VectorField& field, const UtilityObserver& observe,
                         const PopulationState& p0, const IntegratorSpec& spec);

/// Forward-Euler stepping of p'(t) = field(t, history) with a constant delay.
/// The integrator spec's method is ignored. Simplex projection (when
/// enabled) is recorded but never raises: trajectories that hit the boundary
/// are a legitimate outcome of large delays.
Trajectory integrate_dde(const DelayedField& field, const UtilityObserver& observe,
                         const PopulationState& p0, double delta, const IntegratorSpec& spec);

struct PicardReport {
  int rounds = 0;
  /// Sup-norm distance between successive iterates, one entry per round.
  std::vector<double> sup_changes;
};

/// Successive approximation p^{l+1}(t) = p0 + int_0^t f(s, p^l(s)) ds on the
/// given grid (trapezoidal rule), starting from the constant function p0.
/// Throws NonConvergenceError if `max_rounds` pass without the sup-norm
/// change dropping below `tol`.
Trajectory picard_solve(const VectorField& field, const UtilityObserver& observe,
                        const PopulationState& p0, std::span<const double> grid, double tol,
                        int max_rounds, PicardReport* report = nullptr);

/// Uniform grid 0, dt, ..., horizon.
std::vector<double> uniform_grid(double dt, double horizon);

struct SimplexProjection {
  /// |sum - 1| plus negatives clamped on coordinates that were already zero.
  double drift = 0.0;
  /// Mass clamped on coordinates that crossed zero during the step.
  double absorbed = 0.0;
  std::vector<std::size_t> extinct;
};

/// Clamps negatives to zero and rescales to unit sum. A coordinate that was
/// positive in `previous` and is negative now has crossed the boundary of
/// the simplex: it is pinned at zero and reported in `extinct` rather than
/// counted as drift.
SimplexProjection project_to_simplex(std::vector<double>& p, std::span<const double> previous);

}  // namespace irsgame
