#include <doctest.h>

#include <cmath>
#include <vector>

#include "csradar/sensing.hpp"

using namespace csradar;

namespace {

RadarParams paper_params() {
  RadarParams p;
  p.carrier_freq_hz = 5e9;
  p.sample_period_s = 5e-8;
  p.pulse_repetition_s = 2.5e-4;
  p.snapshots_per_pulse = 512;
  p.num_pulses = 1;
  p.disk_radius_m = 10.0;
  return p;
}

std::vector<ReceivedPulse> noiseless_pulses(const RadarParams& p,
                                            const NodePlacement& placement,
                                            const WaveformMatrix& wf,
                                            std::span<const Target> targets) {
  std::vector<ReceivedPulse> pulses;
  for (int l = 0; l < placement.num_receive(); ++l) {
    for (int m = 1; m <= p.num_pulses; ++m) {
      pulses.push_back(synthesize_received(p, placement, targets, nullptr, wf,
                                           nullptr, 0.0, l, m, 0));
    }
  }
  return pulses;
}

}  // namespace

TEST_CASE("uniform grid covers the paper's stationary sweep") {
  const AngleDopplerGrid grid = AngleDopplerGrid::uniform(
      deg_to_rad(-8.0), deg_to_rad(8.0), deg_to_rad(0.2), 0.0, 0.0, 0.0);
  CHECK(grid.size() == 81);
  CHECK(grid.points.front().azimuth_rad == doctest::Approx(deg_to_rad(-8.0)));
  CHECK(grid.points.back().azimuth_rad == doctest::Approx(deg_to_rad(8.0)));
  CHECK(grid.nearest_index(deg_to_rad(0.21), 0.0) ==
        grid.nearest_index(deg_to_rad(0.2), 0.0));
}

TEST_CASE("basis column with centered nodes and zero Doppler is X v(a)") {
  RadarParams p = paper_params();
  p.snapshots_per_pulse = 32;
  p.disk_radius_m = 0.0;
  const NodePlacement placement = sample_node_placement(p, 5, 2, 1);
  const WaveformMatrix wf =
      generate_qpsk(32, 5, WaveformNormalization::raw_qpsk, 2);
  AngleDopplerGrid grid;
  grid.points = {{0.12, 0.0}};
  const CxMatrix psi = basis_matrix(placement, p, wf, grid, 1, 1);
  const CxVector expected =
      wf.samples * steering_vector(placement, p, 0.12);
  CHECK((psi.col(0) - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("basis column norm is independent of node and pulse") {
  RadarParams p = paper_params();
  p.snapshots_per_pulse = 64;
  p.num_pulses = 3;
  const NodePlacement placement = sample_node_placement(p, 6, 3, 4);
  const WaveformMatrix wf =
      generate_qpsk(64, 6, WaveformNormalization::raw_qpsk, 5);
  const AngleDopplerGrid grid = AngleDopplerGrid::uniform(
      deg_to_rad(-1.0), deg_to_rad(1.0), deg_to_rad(0.5), 0.0, 2000.0, 1000.0);

  const CxMatrix ref = basis_matrix(placement, p, wf, grid, 0, 1);
  for (int l = 0; l < 3; ++l) {
    for (int m = 1; m <= 3; ++m) {
      const CxMatrix psi = basis_matrix(placement, p, wf, grid, l, m);
      for (int n = 0; n < grid.size(); ++n) {
        CHECK(psi.col(n).norm() ==
              doctest::Approx(ref.col(n).norm()).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("measurement matrix preconditions") {
  const WaveformMatrix wf =
      generate_qpsk(64, 8, WaveformNormalization::raw_qpsk, 3);
  CHECK_THROWS_AS(generate_measurement_matrix(MeasurementKind::gaussian, 64,
                                              64, &wf, false, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_measurement_matrix(MeasurementKind::modified, 9, 64,
                                              &wf, false, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_measurement_matrix(MeasurementKind::modified, 8, 64,
                                              nullptr, false, 1),
                  std::invalid_argument);
}

TEST_CASE("gaussian measurement matrix trace statistics") {
  const int M = 30;
  const int L = 512;
  double acc = 0.0;
  const int seeds = 800;
  for (int s = 0; s < seeds; ++s) {
    const MeasurementMatrix mm = generate_measurement_matrix(
        MeasurementKind::gaussian, M, L, nullptr, false, 10 + s);
    acc += mm.matrix.squaredNorm();  // Tr(Phi^H Phi)
  }
  CHECK(acc / seeds == doctest::Approx(static_cast<double>(M)).epsilon(0.02));
}

TEST_CASE("modified measurement matrix with orthonormal factors") {
  const WaveformMatrix wf =
      generate_qpsk(128, 16, WaveformNormalization::column_orthonormal, 21);
  const MeasurementMatrix mm = generate_measurement_matrix(
      MeasurementKind::modified, 8, 128, &wf, true, 22);
  // Phi~ X = Phi' X^H X = Phi', so Tr(Phi~ X X^H Phi~^H) = Tr(Phi' Phi'^H) = M
  const CxMatrix prod = mm.matrix * wf.samples;
  CHECK((prod - mm.generator).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(prod.squaredNorm() - 8.0) < 1e-10);
  // rows of Phi' are orthonormal
  const CxMatrix gg = mm.generator * mm.generator.adjoint();
  CHECK((gg - CxMatrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("single-block sensing problem is Phi * Psi") {
  RadarParams p = paper_params();
  p.snapshots_per_pulse = 64;
  const NodePlacement placement = sample_node_placement(p, 4, 1, 6);
  const WaveformMatrix wf =
      generate_qpsk(64, 4, WaveformNormalization::raw_qpsk, 7);
  const AngleDopplerGrid grid = AngleDopplerGrid::uniform(
      deg_to_rad(-2.0), deg_to_rad(2.0), deg_to_rad(1.0), 0.0, 0.0, 0.0);
  const std::vector<MeasurementMatrix> mms{generate_measurement_matrix(
      MeasurementKind::gaussian, 8, 64, &wf, false, 8)};

  Target t;
  t.azimuth_rad = deg_to_rad(1.0);
  t.initial_range_m = 1e4;
  const std::vector<Target> targets{t};
  const auto pulses = noiseless_pulses(p, placement, wf, targets);
  const SensingProblem problem =
      build_sensing_problem(p, placement, wf, grid, mms, pulses);

  CHECK(problem.theta.rows() == 8);
  CHECK(problem.theta.cols() == 5);
  const CxMatrix expected =
      mms[0].matrix * basis_matrix(placement, p, wf, grid, 0, 1);
  CHECK((problem.theta - expected).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("stacked problem shape and model consistency at paper scale") {
  RadarParams p = paper_params();
  const int n_r = 10;
  const NodePlacement placement = sample_node_placement(p, 30, n_r, 42);
  const WaveformMatrix wf =
      generate_qpsk(512, 30, WaveformNormalization::raw_qpsk, 43);
  const AngleDopplerGrid grid = AngleDopplerGrid::uniform(
      deg_to_rad(-8.0), deg_to_rad(8.0), deg_to_rad(0.2), 0.0, 0.0, 0.0);

  std::vector<MeasurementMatrix> mms;
  for (int l = 0; l < n_r; ++l) {
    mms.push_back(generate_measurement_matrix(MeasurementKind::gaussian, 30,
                                              512, &wf, false, 100 + l));
  }

  std::vector<Target> targets(2);
  targets[0].azimuth_rad = deg_to_rad(0.2);
  targets[0].initial_range_m = 1e4;
  targets[1].azimuth_rad = deg_to_rad(-0.2);
  targets[1].initial_range_m = 1e4;

  const auto pulses = noiseless_pulses(p, placement, wf, targets);
  const SensingProblem problem =
      build_sensing_problem(p, placement, wf, grid, mms, pulses);

  CHECK(problem.theta.rows() == 300);
  CHECK(problem.theta.cols() == 81);

  // noiseless on-grid scene satisfies r = Theta * s exactly
  const GroundTruthVector truth = ground_truth_vector(p, targets, grid);
  const CxVector residual = problem.observations - problem.theta * truth.values;
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-10);

  // block (l, m) of Theta reproduces Phi_l * Psi_lm
  const int l = 7;
  const CxMatrix block = problem.theta.middleRows(l * 30, 30);
  const CxMatrix expected =
      mms[l].matrix * basis_matrix(placement, p, wf, grid, l, 1);
  CHECK((block - expected).cwiseAbs().maxCoeff() < 1e-12);

  CHECK(problem.sigma_max ==
        doctest::Approx(
            std::sqrt(problem.theta.colwise().squaredNorm().maxCoeff())));
}

TEST_CASE("column correlation primitives") {
  CxMatrix cols(4, 2);
  cols.col(0) << cxd(1, 0), cxd(0, 1), cxd(0, 0), cxd(1, 0);
  cols.col(1) << cxd(0, 1), cxd(1, 0), cxd(0, 0), cxd(0, 0);
  CHECK(column_correlation(cols, 0, 0) == doctest::Approx(3.0));
  CHECK(normalized_column_correlation(cols, 0, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(column_correlation(cols, 0, 5), std::invalid_argument);
}

TEST_CASE("grid step selection scans coarse to fine") {
  RadarParams p = paper_params();
  p.snapshots_per_pulse = 256;
  const NodePlacement placement = sample_node_placement(p, 30, 1, 17);
  const WaveformMatrix wf =
      generate_qpsk(256, 30, WaveformNormalization::raw_qpsk, 18);
  const MeasurementMatrix mm = generate_measurement_matrix(
      MeasurementKind::gaussian, 30, 256, &wf, false, 19);

  const std::vector<GridStepCandidate> candidates{
      {deg_to_rad(0.8), 0.0}, {deg_to_rad(0.4), 0.0},
      {deg_to_rad(0.2), 0.0}, {deg_to_rad(0.1), 0.0}};

  // threshold 0: any correlation passes, so the largest step wins
  const GridStepResult loose = select_grid_step(
      p, placement, wf, mm, deg_to_rad(-4.0), deg_to_rad(4.0), 0.0, 0.0,
      candidates, 0.0);
  CHECK(loose.feasible);
  CHECK(loose.step.angle_step_rad == doctest::Approx(deg_to_rad(0.8)));

  // raising the threshold never returns a larger step
  double previous = deg_to_rad(0.8);
  for (double threshold : {0.5, 0.8, 0.9, 0.97}) {
    const GridStepResult r = select_grid_step(
        p, placement, wf, mm, deg_to_rad(-4.0), deg_to_rad(4.0), 0.0, 0.0,
        candidates, threshold);
    if (!r.feasible) {
      previous = 0.0;
      continue;
    }
    CHECK(r.step.angle_step_rad <= previous + 1e-15);
    previous = r.step.angle_step_rad;
  }

  // half-step shift of a vanishing step correlates to 1 (continuity)
  const std::vector<GridStepCandidate> tiny{{deg_to_rad(1e-4), 0.0}};
  const GridStepResult cont = select_grid_step(
      p, placement, wf, mm, deg_to_rad(-0.01), deg_to_rad(0.01), 0.0, 0.0,
      tiny, 0.999);
  CHECK(cont.feasible);
  CHECK(cont.average_correlation > 0.999);
}

TEST_CASE("unambiguous speed span") {
  RadarParams p = paper_params();
  p.pulse_repetition_s = 1.0 / 4000.0;
  const double span = unambiguous_speed_span(p);
  CHECK(span == doctest::Approx(2.99792458e8 / (2.0 * 5e9 / 4000.0)));
  CHECK(span == doctest::Approx(119.917).epsilon(1e-4));

  RadarParams doubled = p;
  doubled.pulse_repetition_s *= 2.0;
  CHECK(unambiguous_speed_span(doubled) == doctest::Approx(span / 2.0));
}
