#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "irsgame/dynamics.hpp"

namespace irsgame {

/// Planar coordinates in meters.
struct Position {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Position&, const Position&) = default;
};

double distance(const Position& a, const Position& b);

/// Log-distance path loss: PL(d) = 10^(pl0_db/10) * (d/d0)^(-alpha).
struct PathLossModel {
  double pl0_db = -30.0;
  double d0 = 1.0;
  double alpha_direct = 6.0;
  double alpha_bs_irs = 2.0;
  double alpha_irs_user = 2.0;
  friend bool operator==(const PathLossModel&, const PathLossModel&) = default;
};

struct IrsConfig {
  int elements = 8;             // K_m
  int modules = 1;              // Q_m
  int elements_per_module = 8;  // E_m
  friend bool operator==(const IrsConfig&, const IrsConfig&) = default;
};

/// One service provider: a BS with L antennas plus its IRS.
struct SpConfig {
  int antennas = 4;
  double bandwidth_hz = 1e6;
  std::vector<double> power_levels_dbm;  // strictly ascending
  double price_irs = 0.1;                // per active element
  double price_power = 0.1;              // per watt
  IrsConfig irs;
  std::optional<Position> bs;
  std::optional<Position> irs_position;
  /// Centroid of the users served by this SP; every group of the SP shares it.
  std::optional<Position> users;
  friend bool operator==(const SpConfig&, const SpConfig&) = default;
};

struct OptimizerSpec {
  double tol = 1e-6;
  int max_iters = 100;
  friend bool operator==(const OptimizerSpec&, const OptimizerSpec&) = default;
};

struct EquilibriumSpec {
  double eps_field = 1e-7;
  double eps_mass = 0.01;
  friend bool operator==(const EquilibriumSpec&, const EquilibriumSpec&) = default;
};

/// Service (m, k, j) with 0-based indices: SP, subset size in modules - 1,
/// power level.
struct ServiceIndex {
  int sp = 0;
  int subset = 0;
  int power_level = 0;
  friend bool operator==(const ServiceIndex&, const ServiceIndex&) = default;
};

struct ScenarioConfig {
  std::vector<SpConfig> sps;
  int n_users = 100;
  /// Value of one bit/s to a user, per group (flat index). Filled with
  /// `kDefaultValuation` when absent from the file.
  std::vector<double> valuations;
  double mu = 0.1;
  double delta = 0.0;
  /// sigma_0^2 as a power spectral density; B * sigma_0^2 is the noise power.
  double noise_psd_dbm_hz = -154.0;
  PathLossModel path_loss;
  IntegratorSpec integrator;
  OptimizerSpec optimizer;
  EquilibriumSpec equilibrium;
  std::uint64_t seed = 42;
  /// p^0; uniform 1/G when absent from the file.
  std::vector<double> initial_population;

  std::size_t group_count() const;
  std::vector<ServiceIndex> services() const;
  std::size_t flat_index(const ServiceIndex& s) const;
  /// sigma_0^2 in W/Hz.
  double noise_psd_watt() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

inline constexpr double kDefaultValuation = 1e-5;

/// The evaluation scenario: 2 SPs, 100 users, 4-antenna BSs, two 8-element
/// IRSs (IRS 1 in 2 modules), power levels {15, 30} and {10, 20} dBm.
ScenarioConfig default_scenario();

/// Two SPs with one service each (Q_m = P_m = 1), the setting in which the
/// closed-form critical delay applies.
ScenarioConfig reduced_scenario();

/// Fills defaults (valuations, p^0) and checks every invariant. Throws
/// ConfigError naming the offending field.
void resolve(ScenarioConfig& cfg);
void validate(const ScenarioConfig& cfg);

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);
/// YAML rendering of a resolved config; `parse_config(emit_config(c)) == c`.
std::string emit_config(const ScenarioConfig& cfg);
/// Flat `key=value` view used for output headers.
std::vector<std::pair<std::string, std::string>> flatten(const ScenarioConfig& cfg);

/// Shortest decimal rendering that parses back to the same double.
std::string format_double(double value);

}  // namespace irsgame
