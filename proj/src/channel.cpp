#include "irsgame/channel.hpp"

#include <json.hpp>

#include <cmath>

#include "irsgame/errors.hpp"

namespace irsgame {

void ChannelSet::validate() const {
  if (g_bs_irs.rows() != h_irs_user.size() || g_bs_irs.cols() != h_direct.size()) {
    throw ShapeError("channel set: g_bs_irs must be K x L with K = |h_irs_user|, L = |h_direct|");
  }
  if (!h_direct.allFinite() || !g_bs_irs.allFinite() || !h_irs_user.allFinite()) {
    throw NumericError("channel set: non-finite entry");
  }
}

double path_loss_linear(double d, double alpha, const PathLossModel& model) {
  if (!(d > 0.0)) throw DomainError("path loss: distance must be > 0");
  return std::pow(10.0, model.pl0_db / 10.0) * std::pow(d / model.d0, -alpha);
}

std::uint64_t link_seed(std::uint64_t root, int sp, LinkKind kind) {
  return derive_seed(root, 3 * static_cast<std::uint64_t>(sp) + static_cast<std::uint64_t>(kind) + 1);
}

Eigen::VectorXcd draw_link(Xoshiro256& rng, double gain, Eigen::Index count) {
  const double amplitude = std::sqrt(gain);
  Eigen::VectorXcd out(count);
  for (Eigen::Index i = 0; i < count; ++i) out[i] = amplitude * rng.complex_normal();
  return out;
}

namespace {

double link_distance(const std::optional<Position>& a, const std::optional<Position>& b,
                     const std::string& what) {
  if (!a || !b) throw ConfigError(what + ": geometry incomplete (position missing)");
  const double d = distance(*a, *b);
  if (!(d > 0.0)) throw ConfigError(what + ": endpoints coincide");
  return d;
}

}  // namespace

ChannelSet generate_sp_channels(const ScenarioConfig& cfg, int sp, std::uint64_t seed) {
  const auto& spc = cfg.sps.at(static_cast<std::size_t>(sp));
  const auto path = "sps[" + std::to_string(sp) + "]";
  const auto& pl = cfg.path_loss;
  const Eigen::Index L = spc.antennas;
  const Eigen::Index K = spc.irs.elements;

  const double d_direct = link_distance(spc.bs, spc.users, path + " BS->users");
  const double d_bs_irs = link_distance(spc.bs, spc.irs_position, path + " BS->IRS");
  const double d_irs_user = link_distance(spc.irs_position, spc.users, path + " IRS->users");

  ChannelSet ch;
  Xoshiro256 direct(link_seed(seed, sp, LinkKind::Direct));
  ch.h_direct = draw_link(direct, path_loss_linear(d_direct, pl.alpha_direct, pl), L);

  Xoshiro256 bs_irs(link_seed(seed, sp, LinkKind::BsIrs));
  const double gain_bs_irs = path_loss_linear(d_bs_irs, pl.alpha_bs_irs, pl);
  ch.g_bs_irs.resize(K, L);
  for (Eigen::Index e = 0; e < K; ++e) {
    ch.g_bs_irs.row(e) = draw_link(bs_irs, gain_bs_irs, L).transpose();
  }

  Xoshiro256 irs_user(link_seed(seed, sp, LinkKind::IrsUser));
  ch.h_irs_user = draw_link(irs_user, path_loss_linear(d_irs_user, pl.alpha_irs_user, pl), K);
  return ch;
}

std::vector<ChannelSet> generate_channels(const ScenarioConfig& cfg, std::uint64_t seed) {
  std::vector<ChannelSet> per_sp;
  per_sp.reserve(cfg.sps.size());
  for (int m = 0; m < static_cast<int>(cfg.sps.size()); ++m) {
    per_sp.push_back(generate_sp_channels(cfg, m, seed));
  }
  std::vector<ChannelSet> out;
  out.reserve(cfg.group_count());
  for (const auto& s : cfg.services()) out.push_back(per_sp[static_cast<std::size_t>(s.sp)]);
  return out;
}

std::string channels_to_json(const std::vector<ChannelSet>& channels) {
  using nlohmann::json;
  const auto pair = [](std::complex<double> z) { return json::array({z.real(), z.imag()}); };
  json groups = json::array();
  for (const auto& ch : channels) {
    json direct = json::array();
    for (Eigen::Index i = 0; i < ch.h_direct.size(); ++i) direct.push_back(pair(ch.h_direct[i]));
    json g = json::array();
    for (Eigen::Index e = 0; e < ch.g_bs_irs.rows(); ++e) {
      json row = json::array();
      for (Eigen::Index l = 0; l < ch.g_bs_irs.cols(); ++l) row.push_back(pair(ch.g_bs_irs(e, l)));
      g.push_back(std::move(row));
    }
    json iu = json::array();
    for (Eigen::Index e = 0; e < ch.h_irs_user.size(); ++e) iu.push_back(pair(ch.h_irs_user[e]));
    groups.push_back({{"h_direct", direct}, {"g_bs_irs", g}, {"h_irs_user", iu}});
  }
  return json{{"groups", groups}}.dump(2);
}

}  // namespace irsgame
