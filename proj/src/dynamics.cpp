#include "irsgame/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "irsgame/errors.hpp"

namespace irsgame {

namespace {

void require_simplex(const PopulationState& p0) {
  if (!p0.on_simplex(1e-9)) {
    throw DomainError("initial population is not on the probability simplex");
  }
}

void require_finite(const std::vector<double>& v, double t) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      std::ostringstream msg;
      msg << "non-finite state at t=" << t;
      throw NumericError(msg.str());
    }
  }
}

void check_length(const std::vector<double>& rate, std::size_t expected) {
  if (rate.size() != expected) {
    throw ShapeError("vector field returned " + std::to_string(rate.size()) +
                     " components, expected " + std::to_string(expected));
  }
}

// x + h * k, component-wise.
std::vector<double> offset(const std::vector<double>& x, double h, const std::vector<double>& k) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + h * k[i];
  return out;
}

}  // namespace

std::string to_string(IntegrationMethod method) {
  switch (method) {
    case IntegrationMethod::ForwardEuler:
      return "forward-euler";
    case IntegrationMethod::Rk4:
      return "rk4";
  }
  return "unknown";
}

IntegrationMethod parse_integration_method(std::string_view name) {
  if (name == "forward-euler") return IntegrationMethod::ForwardEuler;
  if (name == "rk4") return IntegrationMethod::Rk4;
  throw ConfigError("integrator.method: expected 'forward-euler' or 'rk4', got '" +
                    std::string(name) + "'");
}

void IntegratorSpec::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("integrator.dt: must be > 0");
  if (!(horizon >= dt) || !std::isfinite(horizon)) {
    throw ConfigError("integrator.horizon: must be >= dt");
  }
  if (!(max_correction >= 0.0)) throw ConfigError("integrator.max_correction: must be >= 0");
}

std::size_t IntegratorSpec::steps() const {
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

std::vector<double> uniform_grid(double dt, double horizon) {
  IntegratorSpec{IntegrationMethod::Rk4, dt, horizon}.validate();
  const auto n = static_cast<std::size_t>(std::llround(horizon / dt));
  std::vector<double> grid(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid[i] = static_cast<double>(i) * dt;
  return grid;
}

SimplexProjection project_to_simplex(std::vector<double>& p, std::span<const double> previous) {
  if (previous.size() != p.size()) throw ShapeError("project_to_simplex: length mismatch");
  SimplexProjection out;
  double raw_total = 0.0;
  double total = 0.0;
  for (std::size_t g = 0; g < p.size(); ++g) {
    double& v = p[g];
    raw_total += v;
    if (v < 0.0) {
      if (previous[g] > 0.0) {
        out.absorbed -= v;
        out.extinct.push_back(g);
      } else {
        out.drift -= v;
      }
      v = 0.0;
    }
    total += v;
  }
  out.drift += std::abs(raw_total - 1.0);
  if (!(total > 0.0)) throw NumericError("population collapsed: no positive mass left");
  const double scale = 1.0 / total;
  for (double& v : p) v *= scale;
  return out;
}

namespace {

// Utilities are optional where nothing reads them back.
UtilityVector observed(const UtilityObserver& observe, const PopulationState& p) {
  return observe ? observe(p) : UtilityVector{};
}

// Applies the projection to p and books it on the trajectory. Returns the drift.
double project_step(std::vector<double>& p, const std::vector<double>& previous, double t,
                    Trajectory& traj) {
  const auto proj = project_to_simplex(p, previous);
  traj.total_correction += proj.drift;
  traj.max_correction = std::max(traj.max_correction, proj.drift);
  traj.absorbed_mass += proj.absorbed;
  for (std::size_t g : proj.extinct) traj.extinctions.push_back({t, g});
  return proj.drift;
}

}  // namespace

// ---------------------------------------------------------------------------

HistoryBuffer::HistoryBuffer(double dt, double span) : dt_(dt), span_(span) {
  if (!(dt > 0.0)) throw DomainError("history buffer: dt must be > 0");
  if (!(span >= 0.0)) throw DomainError("history buffer: delay must be >= 0");
}

void HistoryBuffer::push(HistorySample sample) {
  if (!samples_.empty() && !(sample.time > samples_.back().time)) {
    throw DomainError("history buffer: sample times must be strictly increasing");
  }
  samples_.push_back(std::move(sample));
  const double oldest_needed = samples_.back().time - span_;
  while (samples_.size() >= 2 && samples_[1].time <= oldest_needed) {
    samples_.pop_front();
    truncated_ = true;
  }
}

double HistoryBuffer::latest_time() const {
  if (samples_.empty()) throw DomainError("history buffer is empty");
  return samples_.back().time;
}

double HistoryBuffer::earliest_time() const {
  if (samples_.empty()) throw DomainError("history buffer is empty");
  return samples_.front().time;
}

HistorySample HistoryBuffer::at(double t) const {
  if (samples_.empty()) throw DomainError("history buffer is empty");
  const auto& front = samples_.front();
  const auto& back = samples_.back();
  // Allow a few ulps of slack from t - delta arithmetic.
  const double slack = 1e-9 * dt_;
  if (t < front.time) {
    if (truncated_ && t < front.time - slack) {
      throw DomainError("history lookup at t=" + std::to_string(t) +
                        " precedes the retained window");
    }
    HistorySample pre = front;
    pre.time = t;
    return pre;
  }
  if (t > back.time) {
    if (t > back.time + slack) {
      throw DomainError("history lookup at t=" + std::to_string(t) + " is in the future");
    }
    return back;
  }
  auto it = std::lower_bound(samples_.begin(), samples_.end(), t,
                             [](const HistorySample& s, double value) { return s.time < value; });
  if (it->time == t) return *it;
  const auto& hi = *it;
  const auto& lo = *std::prev(it);
  const double w = (t - lo.time) / (hi.time - lo.time);

  HistorySample out;
  out.time = t;
  std::vector<double> p(lo.state.size());
  for (std::size_t g = 0; g < p.size(); ++g) p[g] = (1.0 - w) * lo.state[g] + w * hi.state[g];
  out.state = PopulationState(std::move(p));
  out.utilities.u.resize(lo.utilities.u.size());
  for (std::size_t g = 0; g < out.utilities.u.size(); ++g) {
    out.utilities.u[g] = (1.0 - w) * lo.utilities.u[g] + w * hi.utilities.u[g];
  }
  out.utilities.u_bar = (1.0 - w) * lo.utilities.u_bar + w * hi.utilities.u_bar;
  return out;
}

// ---------------------------------------------------------------------------

Trajectory integrate_ode(const VectorField& field, const UtilityObserver& observe,
                         const PopulationState& p0, const IntegratorSpec& spec) {
  spec.validate();
  require_simplex(p0);
  const std::size_t groups = p0.size();
  const std::size_t steps = spec.steps();
  const double dt = spec.dt;

  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.utilities.reserve(steps + 1);
  traj.push(0.0, p0, observed(observe, p0));

  std::vector<double> p = p0.raw();
  std::vector<double> previous;
  for (std::size_t n = 1; n <= steps; ++n) {
    const double t = static_cast<double>(n - 1) * dt;
    previous = p;
    const auto k1 = field(t, PopulationState(p));
    check_length(k1, groups);
    if (spec.method == IntegrationMethod::ForwardEuler) {
      for (std::size_t g = 0; g < groups; ++g) p[g] += dt * k1[g];
    } else {
      const auto k2 = field(t + 0.5 * dt, PopulationState(offset(p, 0.5 * dt, k1)));
      const auto k3 = field(t + 0.5 * dt, PopulationState(offset(p, 0.5 * dt, k2)));
      const auto k4 = field(t + dt, PopulationState(offset(p, dt, k3)));
      for (std::size_t g = 0; g < groups; ++g) {
        p[g] += dt / 6.0 * (k1[g] + 2.0 * k2[g] + 2.0 * k3[g] + k4[g]);
      }
    }
    const double t_next = static_cast<double>(n) * dt;
    require_finite(p, t_next);
    if (spec.renormalize) {
      const double drift = project_step(p, previous, t_next, traj);
      if (drift > spec.max_correction) {
        std::ostringstream msg;
        msg << "simplex drift correction " << drift << " at t=" << t_next << " exceeds "
            << spec.max_correction << " (step size too large)";
        throw NumericError(msg.str());
      }
    }
    PopulationState state(p);
    auto u = observed(observe, state);
    traj.push(t_next, std::move(state), std::move(u));
  }
  return traj;
}

Trajectory integrate_dde(const DelayedField& field, const UtilityObserver& observe,
                         const PopulationState& p0, double delta, const IntegratorSpec& spec) {
  spec.validate();
  require_simplex(p0);
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("delay must be >= 0");
  const std::size_t groups = p0.size();
  const std::size_t steps = spec.steps();
  const double dt = spec.dt;

  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.utilities.reserve(steps + 1);

  HistoryBuffer history(dt, delta);
  auto u0 = observe(p0);
  history.push({0.0, p0, u0});
  traj.push(0.0, p0, std::move(u0));
  const HistoryLookup lookup = [&history](double s) { return history.at(s); };

  std::vector<double> p = p0.raw();
  std::vector<double> previous;
  for (std::size_t n = 1; n <= steps; ++n) {
    const double t = static_cast<double>(n - 1) * dt;
    previous = p;
    const auto k = field(t, lookup);
    check_length(k, groups);
    for (std::size_t g = 0; g < groups; ++g) p[g] += dt * k[g];
    const double t_next = static_cast<double>(n) * dt;
    require_finite(p, t_next);
    if (spec.renormalize) project_step(p, previous, t_next, traj);
    PopulationState state(p);
    auto u = observe(state);
    history.push({t_next, state, u});
    traj.push(t_next, std::move(state), std::move(u));
  }
  return traj;
}

Trajectory picard_solve(const VectorField& field, const UtilityObserver& observe,
                        const PopulationState& p0, std::span<const double> grid, double tol,
                        int max_rounds, PicardReport* report) {
  require_simplex(p0);
  if (grid.empty()) throw DomainError("picard: empty time grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw DomainError("picard: grid must be strictly increasing");
  }
  if (!(tol > 0.0)) throw DomainError("picard: tol must be > 0");
  if (max_rounds < 1) throw DomainError("picard: max_rounds must be >= 1");

  const std::size_t groups = p0.size();
  const std::size_t n = grid.size();
  std::vector<std::vector<double>> iterate(n, p0.raw());
  std::vector<std::vector<double>> next(n, std::vector<double>(groups));
  std::vector<std::vector<double>> rate(n);

  PicardReport local;
  bool converged = false;
  for (int round = 1; round <= max_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      rate[i] = field(grid[i], PopulationState(iterate[i]));
      check_length(rate[i], groups);
    }
    next[0] = p0.raw();
    for (std::size_t i = 1; i < n; ++i) {
      const double h = grid[i] - grid[i - 1];
      for (std::size_t g = 0; g < groups; ++g) {
        next[i][g] = next[i - 1][g] + 0.5 * h * (rate[i - 1][g] + rate[i][g]);
      }
    }
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      require_finite(next[i], grid[i]);
      for (std::size_t g = 0; g < groups; ++g) {
        change = std::max(change, std::abs(next[i][g] - iterate[i][g]));
      }
    }
    std::swap(iterate, next);
    local.rounds = round;
    local.sup_changes.push_back(change);
    if (change < tol) {
      converged = true;
      break;
    }
  }
  if (report != nullptr) *report = local;
  if (!converged) {
    std::ostringstream msg;
    msg << "picard iteration did not contract below " << tol << " in " << max_rounds
        << " rounds (last change " << local.sup_changes.back() << "); shorten the horizon";
    throw NonConvergenceError(msg.str());
  }

  Trajectory traj;
  for (std::size_t i = 0; i < n; ++i) {
    PopulationState state(iterate[i]);
    auto u = observed(observe, state);
    traj.push(grid[i], std::move(state), std::move(u));
  }
  return traj;
}

}  // namespace irsgame
