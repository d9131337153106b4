#pragma once

#include <span>

#include "csradar/scene.hpp"
#include "csradar/sensing.hpp"
#include "csradar/signal.hpp"
#include "csradar/types.hpp"

namespace csradar {

enum class SpectrumMethod { matched_filter, capon, music };

struct SpectrumEstimate {
  AngleDopplerGrid grid;
  RealVector values;
  SpectrumMethod method = SpectrumMethod::matched_filter;
};

/// Correlates the uncompressed received pulses with Doppler-shifted,
/// steered replicas of the transmit waveforms:
/// value(n) = |sum_{l,m} ref_lmn^H z_lm|^2 / sum_{l,m} ||ref_lmn||^2.
SpectrumEstimate matched_filter(std::span<const ReceivedPulse> pulses,
                                const NodePlacement& placement,
                                const WaveformMatrix& waveforms,
                                const AngleDopplerGrid& grid,
                                const RadarParams& params);

/// Capon / MUSIC over the M_t*N_r virtual array formed by per-sample
/// correlation of each node's snapshots against each transmit waveform
/// (y(n) = z(n) kron conj(x(n)), L snapshots per pulse). The angle of each
/// grid point is used; Doppler is ignored (stationary-target comparison).
/// diagonal_loading scales Tr(R)/dim and is added to R's diagonal.
/// MUSIC requires num_receive > num_sources.
SpectrumEstimate covariance_spectrum(std::span<const ReceivedPulse> pulses,
                                     const NodePlacement& placement,
                                     const WaveformMatrix& waveforms,
                                     const AngleDopplerGrid& grid,
                                     const RadarParams& params,
                                     SpectrumMethod method, int num_sources,
                                     double diagonal_loading = 1e-6);

/// Indices of the k largest spectrum values, descending.
std::vector<int> top_peaks(const RealVector& values, int k);

}  // namespace csradar
