#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "irsgame/config.hpp"
#include "irsgame/phy.hpp"
#include "irsgame/population.hpp"

namespace irsgame {

/// Prices and valuations entering the utility. `valuation` is per group,
/// the prices per SP.
struct UtilityParams {
  std::vector<double> valuation;
  std::vector<double> price_irs;
  std::vector<double> price_power;

  static UtilityParams from(const ScenarioConfig& cfg);
};

/// (B / (p_g N)) log2(1 + snr). Throws DomainError unless p_g > 0.
double expected_rate(const ServiceLink& link, double p_g, double bandwidth_hz, int n_users);

/// v_g R_g - (gamma^I ||Theta||_0 + gamma^P J) / (p_g N), where ||Theta||_0 is
/// the number of active elements and J the selected power in watts.
double utility(const ServiceLink& link, double p_g, const UtilityParams& params,
               const ScenarioConfig& cfg);

/// sum_g p_g u_g over groups with positive mass. Throws ShapeError on length mismatch.
double average_utility(const PopulationState& state, std::span<const double> u);

/// Utilities of every group as a function of the population state. Groups
/// with p_g <= 0 get the not-applicable sentinel.
class UtilityModel {
public:
  UtilityModel(const ScenarioConfig& cfg, std::vector<ServiceLink> links);

  UtilityVector operator()(const PopulationState& state) const;

  std::size_t groups() const noexcept { return links_.size(); }
  const std::vector<ServiceLink>& links() const noexcept { return links_; }
  /// p_g N u_g, which does not depend on the state: the group's total rate
  /// value minus the resource cost it shares.
  double net_value(std::size_t g) const { return net_value_.at(g); }
  int n_users() const noexcept { return n_users_; }

private:
  std::vector<ServiceLink> links_;
  std::vector<double> net_value_;
  int n_users_;
};

using UtilityFunction = std::function<UtilityVector(const PopulationState&)>;

/// mu p_g (u_g - u_bar); zero for groups with p_g <= 0 or undefined utility.
std::vector<double> replicator_rates(const PopulationState& state, const UtilityVector& u, double mu);

std::vector<double> replicator_field(double t, const PopulationState& state,
                                     const UtilityFunction& utilities, double mu);

/// mu p_g(t - delta) (u_g(t - delta) - u_bar(t - delta)).
std::vector<double> delayed_replicator_field(double t, const HistoryLookup& history, double delta,
                                             double mu);

/// Critical information delay for two-or-more SPs offering a single service
/// each:
///   pi / (2 mu sum_m [v_m B_m log2(1 + snr_m) - gamma^I_m ||Theta_m||_0 - gamma^P_m J_m] / N).
/// With v_m = 1 this is the textbook expression. Throws
/// UnsupportedSettingError when any SP offers more than one service and
/// DomainError when the summed net value is not positive.
double stability_bound(const ScenarioConfig& cfg, const std::vector<ServiceLink>& links);

struct Equilibrium {
  double time = 0.0;
  std::size_t index = 0;
  /// Largest pairwise |u_g - u_h| / max(|u_g|, |u_h|) among groups with p > eps_mass.
  double utility_spread = 0.0;
  std::vector<std::size_t> surviving;
};

/// Earliest sample after which the finite-difference rate max_g |dp_g/dt|
/// stays below eps_field until the end of the trajectory.
std::optional<Equilibrium> detect_equilibrium(const Trajectory& traj, double eps_field,
                                              double eps_mass);

}  // namespace irsgame
