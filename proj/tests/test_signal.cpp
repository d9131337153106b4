#include <doctest.h>

#include <cmath>
#include <vector>

#include "csradar/sensing.hpp"
#include "csradar/signal.hpp"

using namespace csradar;

namespace {
RadarParams small_params() {
  RadarParams p;
  p.carrier_freq_hz = 5e9;
  p.sample_period_s = 5e-8;
  p.pulse_repetition_s = 2.5e-4;
  p.snapshots_per_pulse = 64;
  p.num_pulses = 3;
  p.disk_radius_m = 10.0;
  return p;
}
}  // namespace

TEST_CASE("Doppler diagonal basics") {
  const CxVector d0 = doppler_diagonal(0.0, 8, 5e-8);
  for (int n = 0; n < 8; ++n) {
    CHECK(d0(n).real() == doctest::Approx(1.0));
    CHECK(d0(n).imag() == doctest::Approx(0.0));
  }

  const CxVector d = doppler_diagonal(1234.5, 32, 5e-8);
  for (int n = 0; n < 32; ++n) {
    CHECK(std::abs(d(n)) == doctest::Approx(1.0).epsilon(1e-12));
  }

  // one full revolution across the pulse: entry at L/2 is -1 for even L
  const int L = 16;
  const double ts = 5e-8;
  const CxVector rev = doppler_diagonal(1.0 / (L * ts), L, ts);
  CHECK(rev(L / 2).real() == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("empty scene with zero noise synthesizes to zero") {
  const RadarParams p = small_params();
  const NodePlacement placement = sample_node_placement(p, 4, 2, 1);
  const WaveformMatrix wf =
      generate_qpsk(p.snapshots_per_pulse, 4, WaveformNormalization::raw_qpsk, 2);
  const ReceivedPulse z = synthesize_received(p, placement, {}, nullptr, wf,
                                              nullptr, 0.0, 0, 1, 0);
  CHECK(z.snapshots.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noiseless on-grid synthesis equals Psi * s to machine precision") {
  const RadarParams p = small_params();
  const NodePlacement placement = sample_node_placement(p, 6, 3, 5);
  const WaveformMatrix wf =
      generate_qpsk(p.snapshots_per_pulse, 6, WaveformNormalization::raw_qpsk, 6);

  const AngleDopplerGrid grid = AngleDopplerGrid::uniform(
      deg_to_rad(-2.0), deg_to_rad(2.0), deg_to_rad(0.5), 0.0, 4000.0, 1000.0);

  std::vector<Target> targets(2);
  targets[0].azimuth_rad = deg_to_rad(-1.0);
  targets[0].radial_speed_mps = 1000.0 * kSpeedOfLight / (2.0 * p.carrier_freq_hz);
  targets[0].initial_range_m = 1e4;
  targets[0].reflectivity = cxd(0.8, 0.3);
  targets[1].azimuth_rad = deg_to_rad(1.5);
  targets[1].radial_speed_mps = 3000.0 * kSpeedOfLight / (2.0 * p.carrier_freq_hz);
  targets[1].initial_range_m = 1.3e4;
  targets[1].reflectivity = cxd(-0.5, 1.0);

  const GroundTruthVector truth = ground_truth_vector(p, targets, grid);
  REQUIRE(truth.support.size() == 2);
  // targets must actually be on grid points for the exact identity
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const GridPoint& gp = grid.points[truth.support[k]];
    CHECK(gp.azimuth_rad == doctest::Approx(targets[k].azimuth_rad));
    CHECK(gp.doppler_hz ==
          doctest::Approx(targets[k].doppler_hz(p)).epsilon(1e-12));
  }

  for (int l = 0; l < placement.num_receive(); ++l) {
    for (int m = 1; m <= p.num_pulses; ++m) {
      const ReceivedPulse z = synthesize_received(p, placement, targets,
                                                  nullptr, wf, nullptr, 0.0, l,
                                                  m, 0);
      const CxMatrix psi = basis_matrix(placement, p, wf, grid, l, m);
      const CxVector model = psi * truth.values;
      CHECK((z.snapshots - model).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("synthesis is linear in the target set") {
  const RadarParams p = small_params();
  const NodePlacement placement = sample_node_placement(p, 5, 1, 8);
  const WaveformMatrix wf =
      generate_qpsk(p.snapshots_per_pulse, 5, WaveformNormalization::raw_qpsk, 9);

  Target a;
  a.azimuth_rad = 0.01;
  a.radial_speed_mps = 40.0;
  a.initial_range_m = 1e4;
  Target b;
  b.azimuth_rad = -0.03;
  b.radial_speed_mps = 70.0;
  b.initial_range_m = 1.2e4;
  b.reflectivity = cxd(0.0, 2.0);

  const std::vector<Target> both{a, b};
  const std::vector<Target> only_a{a};
  const std::vector<Target> only_b{b};
  const ReceivedPulse zab =
      synthesize_received(p, placement, both, nullptr, wf, nullptr, 0.0, 0, 2, 0);
  const ReceivedPulse za = synthesize_received(p, placement, only_a, nullptr,
                                               wf, nullptr, 0.0, 0, 2, 0);
  const ReceivedPulse zb = synthesize_received(p, placement, only_b, nullptr,
                                               wf, nullptr, 0.0, 0, 2, 0);
  CHECK((zab.snapshots - za.snapshots - zb.snapshots).cwiseAbs().maxCoeff() <
        1e-14);
}

TEST_CASE("jammer-only compressed power approximates beta^2 M / L per pulse") {
  const RadarParams p = small_params();
  const NodePlacement placement = sample_node_placement(p, 4, 1, 3);
  const WaveformMatrix wf =
      generate_qpsk(p.snapshots_per_pulse, 4, WaveformNormalization::raw_qpsk, 4);
  Jammer jam;
  jam.azimuth_rad = deg_to_rad(7.0);
  jam.range_m = 1e4;
  jam.amplitude = 20.0;

  const int M = 16;
  const int trials = 400;
  double acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    const JammerWaveform jw =
        generate_jammer_waveform(p.snapshots_per_pulse, 1, 100 + t);
    const MeasurementMatrix mm = generate_measurement_matrix(
        MeasurementKind::gaussian, M, p.snapshots_per_pulse, &wf, false,
        5000 + t);
    const ReceivedPulse z = synthesize_received(p, placement, {}, &jam, wf,
                                                &jw, 0.0, 0, 1, 0);
    acc += (mm.matrix * z.snapshots).squaredNorm();
  }
  const double expected =
      jam.amplitude * jam.amplitude * M / p.snapshots_per_pulse;
  CHECK(acc / trials == doctest::Approx(expected).epsilon(0.15));
}

TEST_CASE("dimension mismatches are rejected") {
  const RadarParams p = small_params();
  const NodePlacement placement = sample_node_placement(p, 4, 1, 3);
  const WaveformMatrix wrong =
      generate_qpsk(p.snapshots_per_pulse, 3, WaveformNormalization::raw_qpsk, 4);
  CHECK_THROWS_AS(synthesize_received(p, placement, {}, nullptr, wrong,
                                      nullptr, 0.0, 0, 1, 0),
                  std::invalid_argument);
}
