#include "csradar/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace csradar {

SpectrumEstimate matched_filter(std::span<const ReceivedPulse> pulses,
                                const NodePlacement& placement,
                                const WaveformMatrix& waveforms,
                                const AngleDopplerGrid& grid,
                                const RadarParams& params) {
  if (grid.size() == 0) throw std::invalid_argument("empty grid");
  if (pulses.empty()) throw std::invalid_argument("no received pulses");
  const int L = params.snapshots_per_pulse;
  const int N = grid.size();
  const double phase_scale = 2.0 * kPi / params.wavelength_m();

  // Replica prototypes D(b_n) X v(a_n); per (l, m) only scalar phases vary.
  CxMatrix u(L, N);
  for (int n = 0; n < N; ++n) {
    const GridPoint& gp = grid.points[n];
    u.col(n) =
        doppler_diagonal(gp.doppler_hz, L, params.sample_period_s)
            .cwiseProduct(waveforms.samples *
                          steering_vector(placement, params, gp.azimuth_rad));
  }
  const RealVector energy_per_block = u.colwise().squaredNorm();

  CxVector acc = CxVector::Zero(N);
  int blocks = 0;
  for (const ReceivedPulse& pulse : pulses) {
    if (pulse.snapshots.size() != L) {
      throw std::invalid_argument("pulse length != L");
    }
    const CxVector projected = u.adjoint() * pulse.snapshots;
    const PolarNode& rx = placement.receive.at(pulse.node_index);
    for (int n = 0; n < N; ++n) {
      const GridPoint& gp = grid.points[n];
      const cxd scalar =
          std::polar(1.0, phase_scale * eta(rx, gp.azimuth_rad)) *
          std::polar(1.0, 2.0 * kPi * gp.doppler_hz * (pulse.pulse_index - 1) *
                              params.pulse_repetition_s);
      acc(n) += std::conj(scalar) * projected(n);
    }
    ++blocks;
  }

  SpectrumEstimate spec;
  spec.method = SpectrumMethod::matched_filter;
  spec.grid = grid;
  spec.values.resize(N);
  for (int n = 0; n < N; ++n) {
    const double e = blocks * energy_per_block(n);
    spec.values(n) = e > 0 ? std::norm(acc(n)) / e : 0.0;
  }
  return spec;
}

SpectrumEstimate covariance_spectrum(std::span<const ReceivedPulse> pulses,
                                     const NodePlacement& placement,
                                     const WaveformMatrix& waveforms,
                                     const AngleDopplerGrid& grid,
                                     const RadarParams& params,
                                     SpectrumMethod method, int num_sources,
                                     double diagonal_loading) {
  if (method == SpectrumMethod::matched_filter) {
    throw std::invalid_argument("use matched_filter() for that method");
  }
  if (grid.size() == 0) throw std::invalid_argument("empty grid");
  if (pulses.empty()) throw std::invalid_argument("no received pulses");
  const int L = params.snapshots_per_pulse;
  const int m_t = placement.num_transmit();
  const int n_r = placement.num_receive();
  if (method == SpectrumMethod::music && n_r <= num_sources) {
    throw std::invalid_argument(
        "MUSIC needs more receive antennas than sources");
  }

  // Virtual snapshots y(n) = z(n) kron conj(x(n)), one per sample per pulse.
  const int dim = m_t * n_r;
  CxMatrix r_hat = CxMatrix::Zero(dim, dim);
  long snapshots = 0;

  std::vector<int> pulse_ids;
  for (const auto& p : pulses) pulse_ids.push_back(p.pulse_index);
  std::sort(pulse_ids.begin(), pulse_ids.end());
  pulse_ids.erase(std::unique(pulse_ids.begin(), pulse_ids.end()),
                  pulse_ids.end());

  std::vector<const ReceivedPulse*> by_node(n_r, nullptr);
  CxVector y(dim);
  for (int pid : pulse_ids) {
    std::fill(by_node.begin(), by_node.end(), nullptr);
    for (const auto& p : pulses) {
      if (p.pulse_index == pid) by_node.at(p.node_index) = &p;
    }
    for (const auto* p : by_node) {
      if (p == nullptr) throw std::invalid_argument("missing node in pulse set");
      if (p->snapshots.size() != L) {
        throw std::invalid_argument("pulse length != L");
      }
    }
    for (int n = 0; n < L; ++n) {
      for (int l = 0; l < n_r; ++l) {
        const cxd zl = by_node[l]->snapshots(n);
        for (int i = 0; i < m_t; ++i) {
          y(l * m_t + i) = zl * std::conj(waveforms.samples(n, i));
        }
      }
      r_hat.selfadjointView<Eigen::Lower>().rankUpdate(y, 1.0);
      ++snapshots;
    }
  }
  r_hat = r_hat.selfadjointView<Eigen::Lower>();
  r_hat /= static_cast<double>(snapshots);
  const double load =
      diagonal_loading * r_hat.real().trace() / static_cast<double>(dim);
  r_hat.diagonal().array() += std::max(load, 1e-300);

  const double phase_scale = 2.0 * kPi / params.wavelength_m();
  auto steering = [&](double azimuth) {
    CxVector g(dim);
    for (int l = 0; l < n_r; ++l) {
      const cxd rx_phase =
          std::polar(1.0, phase_scale * eta(placement.receive[l], azimuth));
      for (int i = 0; i < m_t; ++i) {
        g(l * m_t + i) =
            rx_phase *
            std::polar(1.0, phase_scale * eta(placement.transmit[i], azimuth));
      }
    }
    return g;
  };

  SpectrumEstimate spec;
  spec.method = method;
  spec.grid = grid;
  spec.values.resize(grid.size());

  if (method == SpectrumMethod::capon) {
    const Eigen::LDLT<CxMatrix> ldlt(r_hat);
    for (int n = 0; n < grid.size(); ++n) {
      const CxVector g = steering(grid.points[n].azimuth_rad);
      const double denom = std::real(g.dot(ldlt.solve(g)));
      spec.values(n) = denom > 0 ? 1.0 / denom : 0.0;
    }
  } else {
    Eigen::SelfAdjointEigenSolver<CxMatrix> eig(r_hat);
    const int noise_dim = dim - num_sources;
    if (noise_dim <= 0) {
      throw std::invalid_argument("num_sources >= virtual array size");
    }
    const CxMatrix noise_basis = eig.eigenvectors().leftCols(noise_dim);
    for (int n = 0; n < grid.size(); ++n) {
      const CxVector g = steering(grid.points[n].azimuth_rad);
      const double denom = (noise_basis.adjoint() * g).squaredNorm();
      spec.values(n) = denom > 0 ? 1.0 / denom : 0.0;
    }
  }
  return spec;
}

std::vector<int> top_peaks(const RealVector& values, int k) {
  std::vector<int> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t keep = std::min<std::size_t>(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + keep, idx.end(),
                    [&](int a, int b) { return values(a) > values(b); });
  idx.resize(keep);
  return idx;
}

}  // namespace csradar
