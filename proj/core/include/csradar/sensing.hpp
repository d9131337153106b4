#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "csradar/scene.hpp"
#include "csradar/signal.hpp"
#include "csradar/types.hpp"
#include "csradar/waveform.hpp"

namespace csradar {

struct GridPoint {
  double azimuth_rad = 0.0;
  double doppler_hz = 0.0;
};

/// Ordered angle-Doppler grid. For a uniform grid the angle points run
/// fastest (angle-major within each Doppler slice), matching the ordering
/// used for the moving-target experiment grids.
struct AngleDopplerGrid {
  std::vector<GridPoint> points;
  double angle_step_rad = 0.0;
  double doppler_step_hz = 0.0;

  int size() const { return static_cast<int>(points.size()); }

  /// angle sweep [angle_min, angle_max] step angle_step; doppler sweep
  /// [doppler_min, doppler_max] step doppler_step (a zero doppler step
  /// produces the single slice doppler_min).
  static AngleDopplerGrid uniform(double angle_min_rad, double angle_max_rad,
                                  double angle_step_rad, double doppler_min_hz,
                                  double doppler_max_hz,
                                  double doppler_step_hz);

  /// Index of the grid point closest to (azimuth, doppler); -1 when the grid
  /// is empty.
  int nearest_index(double azimuth_rad, double doppler_hz) const;
};

enum class MeasurementKind { gaussian, modified };

/// M x L compressing projection applied at a receive node. The gaussian kind
/// has i.i.d. CN(0, 1/L) entries; the modified kind is Phi' X^H with Phi'
/// an M x M_t CN(0, 1/M_t) matrix (stored in `generator`).
struct MeasurementMatrix {
  MeasurementKind kind = MeasurementKind::gaussian;
  CxMatrix matrix;     // M x L
  CxMatrix generator;  // M x M_t, modified kind only
  bool orthonormal_rows = false;

  int rows() const { return static_cast<int>(matrix.rows()); }
};

MeasurementMatrix generate_measurement_matrix(MeasurementKind kind, int M,
                                              int L,
                                              const WaveformMatrix* waveforms,
                                              bool orthonormal_rows,
                                              std::uint64_t seed);

/// Basis matrix Psi_lm: column n =
/// e^{j2pi/lambda eta_l^r(a_n)} e^{j2pi b_n (m-1) T} D(b_n) X v(a_n).
CxMatrix basis_matrix(const NodePlacement& placement, const RadarParams& params,
                      const WaveformMatrix& waveforms,
                      const AngleDopplerGrid& grid, int node_l, int pulse_m);

/// Stacked sensing matrix Theta and compressed observations r, rows ordered
/// node-major then pulse (r_11..r_1Np..r_Nr1..r_NrNp).
struct SensingProblem {
  CxMatrix theta;        // (M_total) x N
  CxVector observations; // M_total
  AngleDopplerGrid grid;
  double sigma_max = 0.0;  // max column 2-norm of theta
  int num_receive = 0;
  int num_pulses = 0;
  int measurements_per_pulse = 0;
  double mean_row_energy = 1.0;  // average squared row norm of the Phi_l
};

/// Builds Theta from per-node measurement matrices (one Phi_l per receive
/// node, reused across pulses) and compresses the received pulses. The pulses
/// span must hold node-major, pulse-minor entries for every (l, m).
SensingProblem build_sensing_problem(
    const RadarParams& params, const NodePlacement& placement,
    const WaveformMatrix& waveforms, const AngleDopplerGrid& grid,
    std::span<const MeasurementMatrix> measurement_per_node,
    std::span<const ReceivedPulse> pulses);

/// As above with one fresh measurement matrix per (node, pulse) pair
/// (general Eq.-15-style model).
SensingProblem build_sensing_problem_per_pulse(
    const RadarParams& params, const NodePlacement& placement,
    const WaveformMatrix& waveforms, const AngleDopplerGrid& grid,
    std::span<const MeasurementMatrix> measurement_per_node_pulse,
    std::span<const ReceivedPulse> pulses);

/// |g_i^H g_j| over the columns of `columns`.
double column_correlation(const CxMatrix& columns, int i, int j);

/// |g_i^H g_j| / (||g_i|| * ||g_j||).
double normalized_column_correlation(const CxMatrix& columns, int i, int j);

/// Ground-truth sparse vector over the grid: gamma_k at the nearest grid
/// point of each target (targets are expected to lie on the grid; a target
/// farther than half a step from its nearest point still maps there).
GroundTruthVector ground_truth_vector(const RadarParams& params,
                                      std::span<const Target> targets,
                                      const AngleDopplerGrid& grid);

struct GridStepCandidate {
  double angle_step_rad = 0.0;
  double doppler_step_hz = 0.0;
};

struct GridStepResult {
  bool feasible = false;
  GridStepCandidate step;
  double average_correlation = 0.0;
};

/// Worst-case off-grid capture check: for each candidate step (scanned in the
/// given order, coarsest first) builds the uniform grid over the stated
/// ranges, correlates each column with the column shifted by half a step, and
/// returns the first (largest) step whose average normalized correlation
/// meets the threshold. The columns are single-node single-pulse compressed
/// columns built with the supplied measurement matrix.
GridStepResult select_grid_step(
    const RadarParams& params, const NodePlacement& placement,
    const WaveformMatrix& waveforms, const MeasurementMatrix& measurement,
    double angle_min_rad, double angle_max_rad, double doppler_min_hz,
    double doppler_max_hz, std::span<const GridStepCandidate> candidates,
    double threshold);

/// c / (2 f T): span of relative radial speed distinguishable across pulses.
double unambiguous_speed_span(const RadarParams& params);

}  // namespace csradar
