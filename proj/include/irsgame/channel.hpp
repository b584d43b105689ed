#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "irsgame/config.hpp"
#include "irsgame/rng.hpp"

namespace irsgame {

/// Channel realization seen by one group's representative user.
///  - h_direct:   BS m -> user, length L_m
///  - g_bs_irs:   BS m -> IRS m, K_m x L_m (row e is element e)
///  - h_irs_user: IRS m -> user, length K_m
/// A subset of k modules uses the leading k * E_m rows / entries.
struct ChannelSet {
  Eigen::VectorXcd h_direct;
  Eigen::MatrixXcd g_bs_irs;
  Eigen::VectorXcd h_irs_user;

  Eigen::Index antennas() const noexcept { return h_direct.size(); }
  Eigen::Index elements() const noexcept { return h_irs_user.size(); }

  /// Throws ShapeError on inconsistent dimensions, NumericError on
  /// non-finite entries.
  void validate() const;
};

/// 10^(pl0_db/10) * (d / d0)^(-alpha). Throws DomainError for d <= 0.
double path_loss_linear(double d, double alpha, const PathLossModel& model);

enum class LinkKind : std::uint64_t { Direct = 0, BsIrs = 1, IrsUser = 2 };

/// Per-link stream seed: derive_seed(root, 3 * sp + kind + 1).
std::uint64_t link_seed(std::uint64_t root, int sp, LinkKind kind);

/// `count` i.i.d. entries sqrt(gain) * CN(0, 1), drawn in order from `rng`.
Eigen::VectorXcd draw_link(Xoshiro256& rng, double gain, Eigen::Index count);

/// Full-surface realization for SP m. Elements are drawn in index order from
/// dedicated streams, so the first K entries do not depend on the total
/// surface size.
ChannelSet generate_sp_channels(const ScenarioConfig& cfg, int sp, std::uint64_t seed);

/// One ChannelSet per flat group index. Groups of the same SP share the
/// SP's realization. Throws ConfigError if any position is missing or
/// coincident.
std::vector<ChannelSet> generate_channels(const ScenarioConfig& cfg, std::uint64_t seed);

/// Debug dump: {"groups": [{"h_direct": [[re, im], ...], "g_bs_irs": [[[re, im], ...], ...],
/// "h_irs_user": [...]}]}.
std::string channels_to_json(const std::vector<ChannelSet>& channels);

}  // namespace irsgame
