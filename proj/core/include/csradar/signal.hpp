#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "csradar/scene.hpp"
#include "csradar/types.hpp"
#include "csradar/waveform.hpp"

namespace csradar {

/// Diagonal of the intra-pulse Doppler matrix D(f):
/// element n = exp(j*2pi*f*n*T_s), n = 0..L-1.
CxVector doppler_diagonal(double doppler_hz, int L, double sample_period_s);

/// L received baseband samples at node l during pulse m (1-based m).
struct ReceivedPulse {
  int node_index = 0;   // l, 0-based
  int pulse_index = 1;  // m, 1-based
  CxVector snapshots;
};

/// gamma_k = beta_k * exp(-j*4pi/lambda * d_k(0))
cxd target_gain(const RadarParams& params, const Target& target);

/// Synthesizes z_lm = sum_k gamma_k e^{j2pi/lambda eta_l^r(theta_k)}
/// e^{j2pi f_k (m-1) T} D(f_k) X v(theta_k) + jammer + noise.
/// The jammer term is beta * exp(-j*2pi/lambda*(d - eta_l^r(theta))) * x~_m.
/// noise_variance is the per-sample variance of the additive receiver noise;
/// noise_seed must be unique per (l, m) for independence across pulses/nodes.
ReceivedPulse synthesize_received(
    const RadarParams& params, const NodePlacement& placement,
    std::span<const Target> targets, const Jammer* jammer,
    const WaveformMatrix& waveforms, const JammerWaveform* jammer_waveform,
    double noise_variance, int node_index, int pulse_index,
    std::uint64_t noise_seed);

/// Sparse vector over a grid with gamma_k at occupied points.
struct GroundTruthVector {
  CxVector values;
  std::vector<int> support;
};

}  // namespace csradar
