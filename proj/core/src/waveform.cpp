#include "csradar/waveform.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace csradar {

namespace {

CxMatrix raw_qpsk_matrix(int L, int m_t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> symbol(0, 3);
  const double a = 1.0 / std::sqrt(2.0 * L);
  CxMatrix x(L, m_t);
  for (int c = 0; c < m_t; ++c) {
    for (int n = 0; n < L; ++n) {
      const int s = symbol(rng);
      x(n, c) = cxd((s & 1) ? a : -a, (s & 2) ? a : -a);
    }
  }
  return x;
}

// Modified Gram-Schmidt; returns false on rank deficiency.
bool orthonormalize_columns(CxMatrix& x) {
  const double tol = 1e-10;
  for (int c = 0; c < x.cols(); ++c) {
    for (int p = 0; p < c; ++p) {
      x.col(c) -= x.col(p).dot(x.col(c)) * x.col(p);
    }
    const double norm = x.col(c).norm();
    if (norm < tol) return false;
    x.col(c) /= norm;
  }
  return true;
}

}  // namespace

WaveformMatrix generate_qpsk(int L, int m_t, WaveformNormalization mode,
                             std::uint64_t seed) {
  if (L < 1 || m_t < 1) throw std::invalid_argument("L and m_t must be >= 1");
  if (mode == WaveformNormalization::column_orthonormal && L < m_t) {
    throw std::invalid_argument(
        "column_orthonormal requires L >= m_t for full column rank");
  }

  WaveformMatrix wf;
  wf.mode = mode;
  for (std::uint64_t attempt = 0; attempt < 16; ++attempt) {
    wf.samples = raw_qpsk_matrix(L, m_t, seed + attempt);
    if (mode == WaveformNormalization::raw_qpsk) return wf;
    if (orthonormalize_columns(wf.samples)) return wf;
  }
  throw std::runtime_error("QPSK orthonormalization failed repeatedly");
}

JammerWaveform generate_jammer_waveform(int L, int n_p, std::uint64_t seed) {
  if (L < 1 || n_p < 1) throw std::invalid_argument("L and n_p must be >= 1");
  JammerWaveform jw;
  jw.pulses.reserve(n_p);
  for (int m = 0; m < n_p; ++m) {
    jw.pulses.push_back(generate_noise(L, 1.0 / L, mix_seed(seed, m)));
  }
  return jw;
}

CxVector generate_noise(int L, double variance, std::uint64_t seed) {
  if (L < 1) throw std::invalid_argument("L must be >= 1");
  if (variance < 0) throw std::invalid_argument("variance must be nonnegative");
  CxVector e = CxVector::Zero(L);
  if (variance == 0.0) return e;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
  for (int n = 0; n < L; ++n) e(n) = cxd(gauss(rng), gauss(rng));
  return e;
}

}  // namespace csradar
