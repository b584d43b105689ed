#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "irsgame/channel.hpp"
#include "irsgame/config.hpp"
#include "irsgame/game.hpp"
#include "irsgame/phy.hpp"

namespace irsgame {

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// Everything derived from a config before the dynamics run: channels,
/// optimized links and the utility model.
struct ScenarioModel {
  ScenarioConfig cfg;
  std::vector<ChannelSet> channels;
  std::vector<ServiceLink> links;
  UtilityModel utilities;
};

ScenarioModel build_model(const ScenarioConfig& cfg);

/// Replicator ODE (delta == 0, using cfg.integrator) or delayed replicator
/// DDE (delta > 0, forward Euler on the same grid).
Trajectory simulate(const ScenarioModel& model, double delta, const IntegratorSpec& spec);
inline Trajectory simulate(const ScenarioModel& model) {
  return simulate(model, model.cfg.delta, model.cfg.integrator);
}

struct EquilibriumResult {
  PopulationState state;
  Equilibrium equilibrium;
};

/// Integrates the delay-free dynamics and returns the detected rest point.
/// Throws NonConvergenceError when none is reached within the horizon.
EquilibriumResult solve_equilibrium(const ScenarioModel& model);

/// Sum of shares over the groups of SP m.
double sp_share(const ScenarioConfig& cfg, const PopulationState& p, int sp);

/// Moves SP m's user centroid to `d` meters beyond its IRS, on the BS-IRS axis.
void place_users_behind_irs(ScenarioConfig& cfg, int sp, double d);

enum class PresetKind { UtilitiesVsTime, ConvergenceSpeed, DelaySweep, IrsSizeSweep, DistancePriceSweep };

std::string_view preset_name(PresetKind kind);
PresetKind parse_preset(std::string_view name);
const std::vector<PresetKind>& all_presets();

struct ExperimentPreset {
  PresetKind kind = PresetKind::UtilitiesVsTime;
  ScenarioConfig base;
  std::vector<double> mu_grid{0.05, 0.1, 0.2, 0.4};
  std::vector<int> n_users_grid{50, 100, 200};
  /// Delays as multiples of the reference delay pi / (2 mu u_bar); the
  /// reference is the closed-form bound when the scenario admits one.
  std::vector<double> delay_factors{0.0, 0.25, 0.5, 1.0, 2.0};
  std::vector<int> irs2_sizes{4, 8, 12, 16, 20, 24, 28, 32};
  std::vector<double> distances{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::vector<double> sp1_irs_prices{0.1, 0.5, 1.0};
  /// Trajectory files keep every `stride`-th integration sample.
  std::size_t stride = 10;
  bool json = false;

  /// Throws ConfigError for empty or non-monotone grids.
  void validate() const;
};

ExperimentPreset make_preset(PresetKind kind, ScenarioConfig base);

struct ExperimentOutput {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
  /// False when a sweep point that needed an equilibrium did not reach one.
  bool all_converged = true;
};

ExperimentOutput run_experiment(const ExperimentPreset& preset, const std::filesystem::path& out_dir);

/// CSV text: '#'-prefixed key=value lines, a header row
/// `t,p_1..p_G,u_1..u_G,ubar`, then one row per sample with 17 significant
/// digits. Undefined utilities print as NA. Throws DomainError if empty.
std::string trajectory_csv(const Trajectory& traj, const Metadata& meta);
void emit_csv(const Trajectory& traj, const Metadata& meta, const std::filesystem::path& path);

/// {"t": [...], "p_1": [...], ..., "ubar": [...]}; undefined values are null.
std::string trajectory_json(const Trajectory& traj);

/// Every `stride`-th sample plus the last one.
Trajectory decimate(const Trajectory& traj, std::size_t stride);

/// `%.17g`, or NA for NaN.
std::string format_value(double value);

}  // namespace irsgame
