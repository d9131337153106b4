#include "csradar/signal.hpp"

#include <cmath>
#include <stdexcept>

namespace csradar {

CxVector doppler_diagonal(double doppler_hz, int L, double sample_period_s) {
  CxVector d(L);
  const double step = 2.0 * kPi * doppler_hz * sample_period_s;
  for (int n = 0; n < L; ++n) d(n) = std::polar(1.0, step * n);
  return d;
}

cxd target_gain(const RadarParams& params, const Target& target) {
  const double phase =
      -4.0 * kPi / params.wavelength_m() * target.initial_range_m;
  return target.reflectivity * std::polar(1.0, phase);
}

ReceivedPulse synthesize_received(
    const RadarParams& params, const NodePlacement& placement,
    std::span<const Target> targets, const Jammer* jammer,
    const WaveformMatrix& waveforms, const JammerWaveform* jammer_waveform,
    double noise_variance, int node_index, int pulse_index,
    std::uint64_t noise_seed) {
  const int L = params.snapshots_per_pulse;
  if (waveforms.snapshots() != L) {
    throw std::invalid_argument("waveform matrix has wrong snapshot count");
  }
  if (waveforms.num_transmit() != placement.num_transmit()) {
    throw std::invalid_argument(
        "waveform columns do not match transmit node count");
  }
  if (node_index < 0 || node_index >= placement.num_receive()) {
    throw std::invalid_argument("node_index out of range");
  }
  if (pulse_index < 1) throw std::invalid_argument("pulse_index is 1-based");

  const double lambda = params.wavelength_m();
  const double phase_scale = 2.0 * kPi / lambda;
  const PolarNode& rx = placement.receive[node_index];

  ReceivedPulse pulse;
  pulse.node_index = node_index;
  pulse.pulse_index = pulse_index;
  pulse.snapshots = CxVector::Zero(L);

  for (const Target& target : targets) {
    const double fk = target.doppler_hz(params);
    const cxd gain =
        target_gain(params, target) *
        std::polar(1.0, phase_scale * eta(rx, target.azimuth_rad)) *
        std::polar(1.0, 2.0 * kPi * fk * (pulse_index - 1) *
                            params.pulse_repetition_s);
    const CxVector xv =
        waveforms.samples * steering_vector(placement, params, target.azimuth_rad);
    pulse.snapshots +=
        gain * doppler_diagonal(fk, L, params.sample_period_s).cwiseProduct(xv);
  }

  if (jammer != nullptr && jammer->amplitude > 0.0) {
    if (jammer_waveform == nullptr ||
        static_cast<int>(jammer_waveform->pulses.size()) < pulse_index) {
      throw std::invalid_argument("jammer present but waveform missing pulse");
    }
    const CxVector& xm = jammer_waveform->pulses[pulse_index - 1];
    if (xm.size() != L) throw std::invalid_argument("jammer pulse length != L");
    const cxd jgain =
        jammer->amplitude *
        std::polar(1.0, -phase_scale * (jammer->range_m - eta(rx, jammer->azimuth_rad)));
    pulse.snapshots += jgain * xm;
  }

  if (noise_variance > 0.0) {
    pulse.snapshots += generate_noise(L, noise_variance, noise_seed);
  }
  return pulse;
}

}  // namespace csradar
