#include "irsgame/phy.hpp"

#include <cmath>
#include <numbers>

#include "irsgame/errors.hpp"
#include "irsgame/units.hpp"

namespace irsgame {

double wrap_phase(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, two_pi);
  if (a < 0.0) a += two_pi;
  if (a >= two_pi) a = 0.0;
  return a;
}

PhaseShiftVector::PhaseShiftVector(std::vector<double> alphas) : alphas_(std::move(alphas)) {
  for (double& a : alphas_) {
    if (!std::isfinite(a)) throw NumericError("phase shift: non-finite angle");
    a = wrap_phase(a);
  }
}

Eigen::VectorXcd PhaseShiftVector::reflection() const {
  Eigen::VectorXcd theta(static_cast<Eigen::Index>(alphas_.size()));
  for (std::size_t e = 0; e < alphas_.size(); ++e) theta[static_cast<Eigen::Index>(e)] = std::polar(1.0, alphas_[e]);
  return theta;
}

ChannelSet slice(const ChannelSet& ch, Eigen::Index elements) {
  if (elements < 0 || elements > ch.elements()) {
    throw ShapeError("slice: subset larger than the surface");
  }
  return ChannelSet{ch.h_direct, ch.g_bs_irs.topRows(elements), ch.h_irs_user.head(elements)};
}

Eigen::RowVectorXcd effective_channel(const ChannelSet& ch, const PhaseShiftVector& phases) {
  const auto count = static_cast<Eigen::Index>(phases.size());
  if (count > ch.elements()) throw ShapeError("phase vector longer than the IRS");
  if (ch.g_bs_irs.rows() < count || ch.g_bs_irs.cols() != ch.antennas()) {
    throw ShapeError("channel set: inconsistent BS->IRS matrix");
  }
  Eigen::RowVectorXcd row = ch.h_direct.adjoint();
  if (count == 0) return row;
  // h_IU^H Theta^H = conj(h_IU .* theta)^T
  const Eigen::VectorXcd weights = ch.h_irs_user.head(count).cwiseProduct(phases.reflection());
  row += weights.adjoint() * ch.g_bs_irs.topRows(count);
  return row;
}

double compute_snr(const ChannelSet& ch, const Beamformer& beam, const PhaseShiftVector& phases,
                   double bandwidth_hz, double noise_psd) {
  if (beam.w.size() != ch.antennas()) throw ShapeError("beamformer length differs from L");
  if (!(bandwidth_hz > 0.0) || !(noise_psd > 0.0)) {
    throw DomainError("compute_snr: bandwidth and noise must be > 0");
  }
  const std::complex<double> signal = (effective_channel(ch, phases) * beam.w)(0);
  return std::norm(signal) / (bandwidth_hz * noise_psd);
}

Beamformer mrt_beamformer(const Eigen::RowVectorXcd& effective, double power_w) {
  const double amplitude = std::sqrt(power_w);
  const double norm = effective.norm();
  Eigen::VectorXcd w;
  if (norm > 0.0) {
    w = effective.adjoint() * (amplitude / norm);
  } else {
    w = Eigen::VectorXcd::Zero(effective.size());
    w[0] = amplitude;
  }
  return {std::move(w), power_w};
}

PhaseShiftVector align_phases(const ChannelSet& ch, const Eigen::VectorXcd& w, Eigen::Index count) {
  if (count > ch.elements()) throw ShapeError("align_phases: more elements than the IRS has");
  const double reference = std::arg(ch.h_direct.dot(w));
  const Eigen::VectorXcd incident = ch.g_bs_irs.topRows(count) * w;
  std::vector<double> alphas(static_cast<std::size_t>(count));
  for (Eigen::Index e = 0; e < count; ++e) {
    const std::complex<double> reflected = std::conj(ch.h_irs_user[e]) * incident[e];
    alphas[static_cast<std::size_t>(e)] = std::arg(reflected) - reference;
  }
  return PhaseShiftVector(std::move(alphas));
}

LinkOptimization optimize_link(const ChannelSet& ch, double power_w, double bandwidth_hz,
                               double noise_psd, const OptimizerSpec& spec) {
  ch.validate();
  if (!(power_w > 0.0) || !std::isfinite(power_w)) throw DomainError("optimize_link: power must be > 0");
  if (!(spec.tol > 0.0)) throw DomainError("optimize_link: tol must be > 0");
  if (spec.max_iters < 1) throw DomainError("optimize_link: max_iters must be >= 1");

  const Eigen::Index count = ch.elements();
  LinkOptimization result;
  auto& link = result.link;
  link.phases = PhaseShiftVector::zeros(static_cast<std::size_t>(count));
  link.beam = mrt_beamformer(effective_channel(ch, link.phases), power_w);
  link.snr = compute_snr(ch, link.beam, link.phases, bandwidth_hz, noise_psd);
  result.snr_trace.push_back(link.snr);

  for (int it = 1; it <= spec.max_iters; ++it) {
    const double before = link.snr;
    link.phases = align_phases(ch, link.beam.w, count);
    result.snr_trace.push_back(compute_snr(ch, link.beam, link.phases, bandwidth_hz, noise_psd));
    link.beam = mrt_beamformer(effective_channel(ch, link.phases), power_w);
    link.snr = compute_snr(ch, link.beam, link.phases, bandwidth_hz, noise_psd);
    result.snr_trace.push_back(link.snr);
    link.iterations = it;
    if (!(link.snr - before > spec.tol * before)) break;
  }
  return result;
}

std::vector<ServiceLink> build_all_links(const ScenarioConfig& cfg,
                                         const std::vector<ChannelSet>& channels) {
  if (channels.size() != cfg.group_count()) {
    throw ShapeError("build_all_links: expected one channel set per group");
  }
  const double noise_psd = cfg.noise_psd_watt();
  std::vector<ServiceLink> links;
  links.reserve(channels.size());
  const auto services = cfg.services();
  for (std::size_t g = 0; g < services.size(); ++g) {
    const auto& s = services[g];
    const auto& sp = cfg.sps[static_cast<std::size_t>(s.sp)];
    const Eigen::Index elements = static_cast<Eigen::Index>(s.subset + 1) * sp.irs.elements_per_module;
    const double power = dbm_to_watt(sp.power_levels_dbm[static_cast<std::size_t>(s.power_level)]);
    auto opt = optimize_link(slice(channels[g], elements), power, sp.bandwidth_hz, noise_psd, cfg.optimizer);
    opt.link.service = s;
    links.push_back(std::move(opt.link));
  }
  return links;
}

}  // namespace irsgame
