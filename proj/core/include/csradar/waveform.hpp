#pragma once

#include <cstdint>
#include <vector>

#include "csradar/types.hpp"

namespace csradar {

enum class WaveformNormalization { raw_qpsk, column_orthonormal };

/// L x M_t transmit sample matrix X. In raw_qpsk mode every entry has
/// modulus 1/sqrt(L), so each column has exactly unit norm. In
/// column_orthonormal mode the columns additionally satisfy X^H X = I.
struct WaveformMatrix {
  CxMatrix samples;
  WaveformNormalization mode = WaveformNormalization::raw_qpsk;

  int snapshots() const { return static_cast<int>(samples.rows()); }
  int num_transmit() const { return static_cast<int>(samples.cols()); }
};

/// One length-L jammer vector per pulse, entries i.i.d. CN(0, 1/L) so that
/// E{x~^H x~} = 1.
struct JammerWaveform {
  std::vector<CxVector> pulses;
};

/// QPSK waveform generator. column_orthonormal requires L >= m_t and applies
/// modified Gram-Schmidt to the raw draw; on (vanishingly unlikely) rank
/// deficiency the draw is retried with the next seed.
WaveformMatrix generate_qpsk(int L, int m_t, WaveformNormalization mode,
                             std::uint64_t seed);

JammerWaveform generate_jammer_waveform(int L, int n_p, std::uint64_t seed);

/// Circular complex Gaussian vector, per-sample variance `variance`
/// (real and imaginary parts each variance/2).
CxVector generate_noise(int L, double variance, std::uint64_t seed);

}  // namespace csradar
