#include "csradar/sensing.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace csradar {

AngleDopplerGrid AngleDopplerGrid::uniform(double angle_min_rad,
                                           double angle_max_rad,
                                           double angle_step_rad,
                                           double doppler_min_hz,
                                           double doppler_max_hz,
                                           double doppler_step_hz) {
  if (angle_step_rad <= 0) throw std::invalid_argument("angle step must be > 0");
  if (angle_max_rad < angle_min_rad) throw std::invalid_argument("bad angle range");

  auto sweep = [](double lo, double hi, double step) {
    std::vector<double> values;
    if (step <= 0) {
      values.push_back(lo);
      return values;
    }
    const int count = static_cast<int>(std::floor((hi - lo) / step + 0.5)) + 1;
    values.reserve(count);
    for (int i = 0; i < count; ++i) values.push_back(lo + i * step);
    return values;
  };

  AngleDopplerGrid grid;
  grid.angle_step_rad = angle_step_rad;
  grid.doppler_step_hz = doppler_step_hz;
  const auto angles = sweep(angle_min_rad, angle_max_rad, angle_step_rad);
  const auto dopplers = sweep(doppler_min_hz, doppler_max_hz, doppler_step_hz);
  grid.points.reserve(angles.size() * dopplers.size());
  for (double b : dopplers) {
    for (double a : angles) grid.points.push_back({a, b});
  }
  return grid;
}

int AngleDopplerGrid::nearest_index(double azimuth_rad,
                                    double doppler_hz) const {
  int best = -1;
  double best_dist = 0.0;
  // Doppler is rescaled so that one angle step weighs equal to one Doppler
  // step when both are defined.
  const double wa = angle_step_rad > 0 ? 1.0 / angle_step_rad : 1.0;
  const double wb = doppler_step_hz > 0 ? 1.0 / doppler_step_hz : 1.0;
  for (int n = 0; n < size(); ++n) {
    const double da = (points[n].azimuth_rad - azimuth_rad) * wa;
    const double db = (points[n].doppler_hz - doppler_hz) * wb;
    const double dist = da * da + db * db;
    if (best < 0 || dist < best_dist) {
      best = n;
      best_dist = dist;
    }
  }
  return best;
}

MeasurementMatrix generate_measurement_matrix(MeasurementKind kind, int M,
                                              int L,
                                              const WaveformMatrix* waveforms,
                                              bool orthonormal_rows,
                                              std::uint64_t seed) {
  if (M < 1) throw std::invalid_argument("M must be >= 1");
  if (M >= L) throw std::invalid_argument("M must be smaller than L");

  MeasurementMatrix mm;
  mm.kind = kind;
  mm.orthonormal_rows = orthonormal_rows;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto gaussian_matrix = [&](int rows, int cols, double variance) {
    const double s = std::sqrt(variance / 2.0);
    CxMatrix g(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) g(i, j) = cxd(s * gauss(rng), s * gauss(rng));
    }
    return g;
  };

  if (kind == MeasurementKind::gaussian) {
    mm.matrix = gaussian_matrix(M, L, 1.0 / L);
  } else {
    if (waveforms == nullptr) {
      throw std::invalid_argument("modified kind needs the waveform matrix");
    }
    const int m_t = waveforms->num_transmit();
    if (M > m_t) {
      throw std::invalid_argument(
          "modified kind: M beyond M_t adds no rank (Phi' is M x M_t)");
    }
    mm.generator = gaussian_matrix(M, m_t, 1.0 / m_t);
    if (orthonormal_rows) {
      // Phi' Phi'^H = I via Gram-Schmidt on rows.
      CxMatrix gt = mm.generator.adjoint();
      Eigen::HouseholderQR<CxMatrix> qr(gt);
      CxMatrix q = qr.householderQ() * CxMatrix::Identity(m_t, M);
      mm.generator = q.adjoint();
    }
    mm.matrix = mm.generator * waveforms->samples.adjoint();
    return mm;
  }

  if (orthonormal_rows) {
    CxMatrix gt = mm.matrix.adjoint();  // L x M
    Eigen::HouseholderQR<CxMatrix> qr(gt);
    CxMatrix q = qr.householderQ() * CxMatrix::Identity(L, M);
    mm.matrix = q.adjoint();
  }
  return mm;
}

CxMatrix basis_matrix(const NodePlacement& placement, const RadarParams& params,
                      const WaveformMatrix& waveforms,
                      const AngleDopplerGrid& grid, int node_l, int pulse_m) {
  if (grid.size() == 0) throw std::invalid_argument("grid must be nonempty");
  if (node_l < 0 || node_l >= placement.num_receive()) {
    throw std::invalid_argument("node_l out of range");
  }
  if (pulse_m < 1) throw std::invalid_argument("pulse_m is 1-based");

  const int L = params.snapshots_per_pulse;
  const int N = grid.size();
  const double phase_scale = 2.0 * kPi / params.wavelength_m();
  const PolarNode& rx = placement.receive[node_l];

  CxMatrix psi(L, N);
  for (int n = 0; n < N; ++n) {
    const GridPoint& gp = grid.points[n];
    const cxd scalar =
        std::polar(1.0, phase_scale * eta(rx, gp.azimuth_rad)) *
        std::polar(1.0, 2.0 * kPi * gp.doppler_hz * (pulse_m - 1) *
                            params.pulse_repetition_s);
    const CxVector xv =
        waveforms.samples * steering_vector(placement, params, gp.azimuth_rad);
    psi.col(n) =
        scalar *
        doppler_diagonal(gp.doppler_hz, L, params.sample_period_s).cwiseProduct(xv);
  }
  return psi;
}

namespace {

SensingProblem assemble(const RadarParams& params,
                        const NodePlacement& placement,
                        const WaveformMatrix& waveforms,
                        const AngleDopplerGrid& grid,
                        std::span<const MeasurementMatrix> measurements,
                        std::span<const ReceivedPulse> pulses,
                        bool per_pulse_measurements) {
  const int n_r = placement.num_receive();
  const int n_p = params.num_pulses;
  const int N = grid.size();
  if (N == 0) throw std::invalid_argument("grid must be nonempty");
  const std::size_t expected_measurements =
      per_pulse_measurements ? static_cast<std::size_t>(n_r) * n_p
                             : static_cast<std::size_t>(n_r);
  if (measurements.size() != expected_measurements) {
    throw std::invalid_argument("wrong number of measurement matrices");
  }
  if (pulses.size() != static_cast<std::size_t>(n_r) * n_p) {
    throw std::invalid_argument("expected one received pulse per (node, pulse)");
  }
  const int M = measurements[0].rows();
  for (const auto& mm : measurements) {
    if (mm.rows() != M) throw std::invalid_argument("inconsistent M across nodes");
    if (mm.matrix.cols() != params.snapshots_per_pulse) {
      throw std::invalid_argument("measurement matrix column count != L");
    }
  }

  SensingProblem problem;
  problem.grid = grid;
  problem.num_receive = n_r;
  problem.num_pulses = n_p;
  problem.measurements_per_pulse = M;
  problem.theta.resize(static_cast<Eigen::Index>(M) * n_r * n_p, N);
  problem.observations.resize(static_cast<Eigen::Index>(M) * n_r * n_p);

  // Precompute D(b_n) X v(a_n) for every grid point; only scalar phases vary
  // across (l, m).
  CxMatrix u(params.snapshots_per_pulse, N);
  for (int n = 0; n < N; ++n) {
    const GridPoint& gp = grid.points[n];
    const CxVector xv =
        waveforms.samples * steering_vector(placement, params, gp.azimuth_rad);
    u.col(n) = doppler_diagonal(gp.doppler_hz, params.snapshots_per_pulse,
                                params.sample_period_s)
                   .cwiseProduct(xv);
  }
  const double phase_scale = 2.0 * kPi / params.wavelength_m();

  double row_energy_sum = 0.0;
  for (int l = 0; l < n_r; ++l) {
    const MeasurementMatrix& base_mm = measurements[per_pulse_measurements
                                                        ? l * n_p
                                                        : l];
    row_energy_sum += base_mm.matrix.rowwise().squaredNorm().mean();
    // Phi_l applied to the shared column prototypes.
    CxMatrix compressed_u;
    if (!per_pulse_measurements) compressed_u = base_mm.matrix * u;
    for (int m = 1; m <= n_p; ++m) {
      const MeasurementMatrix& mm =
          per_pulse_measurements ? measurements[l * n_p + (m - 1)] : base_mm;
      CxMatrix block = per_pulse_measurements ? CxMatrix(mm.matrix * u)
                                              : compressed_u;
      for (int n = 0; n < N; ++n) {
        const GridPoint& gp = grid.points[n];
        const cxd scalar =
            std::polar(1.0, phase_scale *
                                eta(placement.receive[l], gp.azimuth_rad)) *
            std::polar(1.0, 2.0 * kPi * gp.doppler_hz * (m - 1) *
                                params.pulse_repetition_s);
        block.col(n) *= scalar;
      }
      const Eigen::Index row0 =
          (static_cast<Eigen::Index>(l) * n_p + (m - 1)) * M;
      problem.theta.middleRows(row0, M) = block;

      const ReceivedPulse& pulse = pulses[l * n_p + (m - 1)];
      if (pulse.node_index != l || pulse.pulse_index != m) {
        throw std::invalid_argument("pulses span not in (node, pulse) order");
      }
      if (pulse.snapshots.size() != params.snapshots_per_pulse) {
        throw std::invalid_argument("received pulse length != L");
      }
      problem.observations.segment(row0, M) = mm.matrix * pulse.snapshots;
    }
  }
  problem.mean_row_energy = row_energy_sum / n_r;
  problem.sigma_max = std::sqrt(problem.theta.colwise().squaredNorm().maxCoeff());
  return problem;
}

}  // namespace

SensingProblem build_sensing_problem(
    const RadarParams& params, const NodePlacement& placement,
    const WaveformMatrix& waveforms, const AngleDopplerGrid& grid,
    std::span<const MeasurementMatrix> measurement_per_node,
    std::span<const ReceivedPulse> pulses) {
  return assemble(params, placement, waveforms, grid, measurement_per_node,
                  pulses, false);
}

SensingProblem build_sensing_problem_per_pulse(
    const RadarParams& params, const NodePlacement& placement,
    const WaveformMatrix& waveforms, const AngleDopplerGrid& grid,
    std::span<const MeasurementMatrix> measurement_per_node_pulse,
    std::span<const ReceivedPulse> pulses) {
  return assemble(params, placement, waveforms, grid,
                  measurement_per_node_pulse, pulses, true);
}

double column_correlation(const CxMatrix& columns, int i, int j) {
  if (i < 0 || j < 0 || i >= columns.cols() || j >= columns.cols()) {
    throw std::invalid_argument("column index out of range");
  }
  return std::abs(columns.col(i).dot(columns.col(j)));
}

double normalized_column_correlation(const CxMatrix& columns, int i, int j) {
  const double ni = columns.col(i).norm();
  const double nj = columns.col(j).norm();
  if (ni == 0.0 || nj == 0.0) return 0.0;
  return column_correlation(columns, i, j) / (ni * nj);
}

GroundTruthVector ground_truth_vector(const RadarParams& params,
                                      std::span<const Target> targets,
                                      const AngleDopplerGrid& grid) {
  GroundTruthVector truth;
  truth.values = CxVector::Zero(grid.size());
  for (const Target& target : targets) {
    const int idx =
        grid.nearest_index(target.azimuth_rad, target.doppler_hz(params));
    if (idx < 0) throw std::invalid_argument("empty grid");
    truth.values(idx) += target_gain(params, target);
    truth.support.push_back(idx);
  }
  return truth;
}

GridStepResult select_grid_step(
    const RadarParams& params, const NodePlacement& placement,
    const WaveformMatrix& waveforms, const MeasurementMatrix& measurement,
    double angle_min_rad, double angle_max_rad, double doppler_min_hz,
    double doppler_max_hz, std::span<const GridStepCandidate> candidates,
    double threshold) {
  if (threshold < 0.0 || threshold >= 1.0) {
    throw std::invalid_argument("threshold must lie in [0, 1)");
  }
  GridStepResult result;
  for (const GridStepCandidate& cand : candidates) {
    AngleDopplerGrid grid = AngleDopplerGrid::uniform(
        angle_min_rad, angle_max_rad, cand.angle_step_rad, doppler_min_hz,
        doppler_max_hz, cand.doppler_step_hz);
    AngleDopplerGrid shifted = grid;
    for (auto& gp : shifted.points) {
      gp.azimuth_rad += cand.angle_step_rad / 2.0;
      gp.doppler_hz += cand.doppler_step_hz / 2.0;
    }
    const CxMatrix cols =
        measurement.matrix * basis_matrix(placement, params, waveforms, grid, 0, 1);
    const CxMatrix cols_shifted =
        measurement.matrix *
        basis_matrix(placement, params, waveforms, shifted, 0, 1);
    double sum = 0.0;
    for (int n = 0; n < grid.size(); ++n) {
      const double denom = cols.col(n).norm() * cols_shifted.col(n).norm();
      if (denom > 0.0) {
        sum += std::abs(cols.col(n).dot(cols_shifted.col(n))) / denom;
      }
    }
    const double avg = sum / grid.size();
    if (avg >= threshold) {
      result.feasible = true;
      result.step = cand;
      result.average_correlation = avg;
      return result;
    }
  }
  return result;  // no feasible step
}

double unambiguous_speed_span(const RadarParams& params) {
  return kSpeedOfLight /
         (2.0 * params.carrier_freq_hz * params.pulse_repetition_s);
}

}  // namespace csradar
