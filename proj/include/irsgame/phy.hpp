#pragma once

#include <Eigen/Dense>

#include <vector>

#include "irsgame/channel.hpp"
#include "irsgame/config.hpp"

namespace irsgame {

/// Reflection phases alpha_e in [0, 2 pi), one per active IRS element.
/// The l0-norm of the induced diagonal phase-shift matrix is `size()`.
class PhaseShiftVector {
public:
  PhaseShiftVector() = default;
  explicit PhaseShiftVector(std::vector<double> alphas);
  static PhaseShiftVector zeros(std::size_t count) { return PhaseShiftVector(std::vector<double>(count, 0.0)); }

  std::size_t size() const noexcept { return alphas_.size(); }
  const std::vector<double>& alphas() const noexcept { return alphas_; }
  /// theta_e = exp(j alpha_e).
  Eigen::VectorXcd reflection() const;

private:
  std::vector<double> alphas_;
};

/// Maps any angle to [0, 2 pi).
double wrap_phase(double angle);

struct Beamformer {
  Eigen::VectorXcd w;
  double power_w = 0.0;
};

struct ServiceLink {
  ServiceIndex service;
  Beamformer beam;
  PhaseShiftVector phases;
  double snr = 0.0;
  int iterations = 0;
};

/// Leading `elements` IRS rows/entries of a full-surface realization.
ChannelSet slice(const ChannelSet& ch, Eigen::Index elements);

/// Row vector h^H + h_IU^H Theta^H G restricted to the first phases.size() elements.
Eigen::RowVectorXcd effective_channel(const ChannelSet& ch, const PhaseShiftVector& phases);

/// |(h^H + h_IU^H Theta^H G) w|^2 / (B sigma_0^2).
double compute_snr(const ChannelSet& ch, const Beamformer& beam, const PhaseShiftVector& phases,
                   double bandwidth_hz, double noise_psd);

/// w = sqrt(P) * h_eff / |h_eff|; an arbitrary unit direction if h_eff = 0.
Beamformer mrt_beamformer(const Eigen::RowVectorXcd& effective, double power_w);

/// Phases that rotate every reflected term onto the direct term's phase
/// arg(h^H w), for the first `count` elements.
PhaseShiftVector align_phases(const ChannelSet& ch, const Eigen::VectorXcd& w, Eigen::Index count);

struct LinkOptimization {
  ServiceLink link;
  /// SNR after each half-step (MRT, alignment, MRT, ...).
  std::vector<double> snr_trace;
};

/// Alternating maximization of the SNR over the whole surface in `ch`:
/// MRT for fixed phases, then phase alignment for fixed w, starting from
/// alpha = 0, until the relative gain of a full round drops below tol.
LinkOptimization optimize_link(const ChannelSet& ch, double power_w, double bandwidth_hz,
                               double noise_psd, const OptimizerSpec& spec);

/// One optimized link per group; group (m, k, j) uses the first (k+1) E_m
/// elements of IRS m and power level J_{m,j}.
std::vector<ServiceLink> build_all_links(const ScenarioConfig& cfg,
                                         const std::vector<ChannelSet>& channels);

}  // namespace irsgame
