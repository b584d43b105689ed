#include "irsgame/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "irsgame/errors.hpp"
#include "irsgame/units.hpp"

namespace irsgame {

namespace {

constexpr double kNotApplicable = std::numeric_limits<double>::quiet_NaN();

double active_elements(const ServiceLink& link, const ScenarioConfig& cfg) {
  const auto& sp = cfg.sps.at(static_cast<std::size_t>(link.service.sp));
  return static_cast<double>((link.service.subset + 1) * sp.irs.elements_per_module);
}

double resource_cost(const ServiceLink& link, const UtilityParams& params, const ScenarioConfig& cfg) {
  const auto m = static_cast<std::size_t>(link.service.sp);
  const auto& sp = cfg.sps.at(m);
  const double power = dbm_to_watt(sp.power_levels_dbm.at(static_cast<std::size_t>(link.service.power_level)));
  return params.price_irs.at(m) * active_elements(link, cfg) + params.price_power.at(m) * power;
}

}  // namespace

UtilityParams UtilityParams::from(const ScenarioConfig& cfg) {
  UtilityParams p;
  p.valuation = cfg.valuations;
  for (const auto& sp : cfg.sps) {
    p.price_irs.push_back(sp.price_irs);
    p.price_power.push_back(sp.price_power);
  }
  return p;
}

double expected_rate(const ServiceLink& link, double p_g, double bandwidth_hz, int n_users) {
  if (!(p_g > 0.0)) throw DomainError("expected_rate: group proportion must be > 0");
  if (n_users < 1) throw DomainError("expected_rate: n_users must be >= 1");
  return bandwidth_hz / (p_g * n_users) * std::log2(1.0 + link.snr);
}

double utility(const ServiceLink& link, double p_g, const UtilityParams& params,
               const ScenarioConfig& cfg) {
  const auto& sp = cfg.sps.at(static_cast<std::size_t>(link.service.sp));
  const double rate = expected_rate(link, p_g, sp.bandwidth_hz, cfg.n_users);
  const double v = params.valuation.at(cfg.flat_index(link.service));
  return v * rate - resource_cost(link, params, cfg) / (p_g * cfg.n_users);
}

double average_utility(const PopulationState& state, std::span<const double> u) {
  if (state.size() != u.size()) throw ShapeError("average_utility: length mismatch");
  double total = 0.0;
  for (std::size_t g = 0; g < u.size(); ++g) {
    if (state[g] > 0.0) total += state[g] * u[g];
  }
  return total;
}

UtilityModel::UtilityModel(const ScenarioConfig& cfg, std::vector<ServiceLink> links)
    : links_(std::move(links)), n_users_(cfg.n_users) {
  if (links_.size() != cfg.group_count()) throw ShapeError("utility model: one link per group expected");
  const auto params = UtilityParams::from(cfg);
  net_value_.reserve(links_.size());
  for (const auto& link : links_) {
    const auto& sp = cfg.sps.at(static_cast<std::size_t>(link.service.sp));
    const double v = params.valuation.at(cfg.flat_index(link.service));
    net_value_.push_back(v * sp.bandwidth_hz * std::log2(1.0 + link.snr) - resource_cost(link, params, cfg));
  }
}

UtilityVector UtilityModel::operator()(const PopulationState& state) const {
  if (state.size() != links_.size()) throw ShapeError("utility model: state length mismatch");
  UtilityVector out;
  out.u.resize(links_.size());
  for (std::size_t g = 0; g < links_.size(); ++g) {
    out.u[g] = state[g] > 0.0 ? net_value_[g] / (state[g] * n_users_) : kNotApplicable;
  }
  out.u_bar = average_utility(state, out.u);
  return out;
}

std::vector<double> replicator_rates(const PopulationState& state, const UtilityVector& u, double mu) {
  if (state.size() != u.u.size()) throw ShapeError("replicator: utility vector length mismatch");
  std::vector<double> rate(state.size(), 0.0);
  for (std::size_t g = 0; g < state.size(); ++g) {
    if (state[g] > 0.0 && !UtilityVector::not_applicable(u.u[g])) {
      rate[g] = mu * state[g] * (u.u[g] - u.u_bar);
    }
  }
  return rate;
}

std::vector<double> replicator_field(double /*t*/, const PopulationState& state,
                                     const UtilityFunction& utilities, double mu) {
  return replicator_rates(state, utilities(state), mu);
}

std::vector<double> delayed_replicator_field(double t, const HistoryLookup& history, double delta,
                                             double mu) {
  if (!(delta >= 0.0)) throw DomainError("delayed replicator: delta must be >= 0");
  const HistorySample past = history(t - delta);
  return replicator_rates(past.state, past.utilities, mu);
}

double stability_bound(const ScenarioConfig& cfg, const std::vector<ServiceLink>& links) {
  for (std::size_t m = 0; m < cfg.sps.size(); ++m) {
    const auto& sp = cfg.sps[m];
    if (sp.irs.modules * static_cast<int>(sp.power_levels_dbm.size()) != 1) {
      throw UnsupportedSettingError(
          "stability bound is only available when every SP offers exactly one service (sps[" +
          std::to_string(m) + "] offers " +
          std::to_string(sp.irs.modules * static_cast<int>(sp.power_levels_dbm.size())) + ")");
    }
  }
  if (links.size() != cfg.sps.size()) throw ShapeError("stability bound: one link per SP expected");
  const auto params = UtilityParams::from(cfg);
  double total = 0.0;
  for (const auto& link : links) {
    const auto& sp = cfg.sps.at(static_cast<std::size_t>(link.service.sp));
    const double v = params.valuation.at(cfg.flat_index(link.service));
    total += v * sp.bandwidth_hz * std::log2(1.0 + link.snr) - resource_cost(link, params, cfg);
  }
  total /= cfg.n_users;
  if (!(total > 0.0)) throw DomainError("stability bound: summed net value is not positive");
  return std::numbers::pi / (2.0 * cfg.mu * total);
}

std::optional<Equilibrium> detect_equilibrium(const Trajectory& traj, double eps_field,
                                              double eps_mass) {
  if (traj.empty()) throw DomainError("detect_equilibrium: empty trajectory");
  const std::size_t n = traj.size();
  const auto max_rate = [&](std::size_t i) {
    if (n == 1) return 0.0;
    const std::size_t a = i + 1 < n ? i : i - 1;
    const double dt = traj.times[a + 1] - traj.times[a];
    double r = 0.0;
    for (std::size_t g = 0; g < traj.states[a].size(); ++g) {
      r = std::max(r, std::abs(traj.states[a + 1][g] - traj.states[a][g]) / dt);
    }
    return r;
  };

  std::size_t first = n;
  while (first > 0 && max_rate(first - 1) < eps_field) --first;
  if (first == n) return std::nullopt;

  Equilibrium eq;
  eq.index = first;
  eq.time = traj.times[first];
  const auto& p = traj.states[first];
  const auto& u = traj.utilities[first].u;
  for (std::size_t g = 0; g < p.size(); ++g) {
    if (p[g] > eps_mass) eq.surviving.push_back(g);
  }
  if (u.size() != p.size()) return eq;
  for (std::size_t a = 0; a < eq.surviving.size(); ++a) {
    for (std::size_t b = a + 1; b < eq.surviving.size(); ++b) {
      const double ua = u.at(eq.surviving[a]);
      const double ub = u.at(eq.surviving[b]);
      const double scale = std::max(std::abs(ua), std::abs(ub));
      if (scale > 0.0) eq.utility_spread = std::max(eq.utility_spread, std::abs(ua - ub) / scale);
    }
  }
  return eq;
}

}  // namespace irsgame
