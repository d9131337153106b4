#include <doctest.h>

#include <cmath>

#include "csradar/waveform.hpp"

using namespace csradar;

TEST_CASE("raw QPSK entries all have modulus 1/sqrt(L)") {
  const WaveformMatrix wf =
      generate_qpsk(512, 30, WaveformNormalization::raw_qpsk, 11);
  const double expected = 1.0 / std::sqrt(512.0);
  CHECK(wf.samples.rows() == 512);
  CHECK(wf.samples.cols() == 30);
  for (int c = 0; c < wf.samples.cols(); ++c) {
    for (int n = 0; n < wf.samples.rows(); ++n) {
      CHECK(std::abs(wf.samples(n, c)) == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(wf.samples.col(c).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("single column is unit norm in both modes") {
  for (auto mode : {WaveformNormalization::raw_qpsk,
                    WaveformNormalization::column_orthonormal}) {
    const WaveformMatrix wf = generate_qpsk(64, 1, mode, 5);
    CHECK(wf.samples.col(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("column_orthonormal gives X^H X = I to 1e-12") {
  const WaveformMatrix wf =
      generate_qpsk(128, 16, WaveformNormalization::column_orthonormal, 3);
  const CxMatrix gram = wf.samples.adjoint() * wf.samples;
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) {
      const double expect = i == j ? 1.0 : 0.0;
      CHECK(std::abs(gram(i, j) - expect) < 1e-12);
    }
  }
  CHECK_THROWS_AS(
      generate_qpsk(8, 16, WaveformNormalization::column_orthonormal, 3),
      std::invalid_argument);
}

TEST_CASE("QPSK cross-correlation stays below the recorded bound") {
  // Monte Carlo regression bound on max off-diagonal |(X^H X)_{ij}| for
  // L = 512, M_t = 30 over 100 seeds.
  double worst = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    const WaveformMatrix wf =
        generate_qpsk(512, 30, WaveformNormalization::raw_qpsk, seed);
    const CxMatrix gram = wf.samples.adjoint() * wf.samples;
    for (int i = 0; i < 30; ++i) {
      for (int j = i + 1; j < 30; ++j) {
        worst = std::max(worst, std::abs(gram(i, j)));
      }
    }
  }
  CHECK(worst < 0.15);
}

TEST_CASE("jammer waveform is normalized to unit expected pulse energy") {
  const int L = 64;
  double mean_energy = 0.0;
  const int draws = 100000;
  const JammerWaveform jw = [&] {
    JammerWaveform all;
    for (int d = 0; d < draws / 10; ++d) {
      const JammerWaveform one = generate_jammer_waveform(L, 10, 1000 + d);
      for (const auto& pulse : one.pulses) all.pulses.push_back(pulse);
    }
    return all;
  }();
  for (const auto& pulse : jw.pulses) mean_energy += pulse.squaredNorm();
  mean_energy /= jw.pulses.size();
  CHECK(mean_energy == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("jammer waveform with L = 1 has unit variance") {
  double acc = 0.0;
  const int draws = 200000;
  for (int d = 0; d < draws; ++d) {
    const JammerWaveform jw = generate_jammer_waveform(1, 1, 50000 + d);
    acc += std::norm(jw.pulses[0](0));
  }
  CHECK(acc / draws == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("jammer waveform is uncorrelated with a QPSK column") {
  const int L = 512;
  const WaveformMatrix wf =
      generate_qpsk(L, 1, WaveformNormalization::raw_qpsk, 77);
  cxd acc{0.0, 0.0};
  const int draws = 2000;
  for (int d = 0; d < draws; ++d) {
    const JammerWaveform jw = generate_jammer_waveform(L, 1, 900 + d);
    acc += wf.samples.col(0).dot(jw.pulses[0]);
  }
  // per-draw correlation has std ~ 1/sqrt(L); the mean shrinks another
  // sqrt(draws)
  CHECK(std::abs(acc) / draws < 3.0 / std::sqrt(static_cast<double>(L)));
}

TEST_CASE("noise generator variance and reproducibility") {
  CHECK(generate_noise(16, 0.0, 4).cwiseAbs().maxCoeff() == 0.0);

  const int L = 1'000'000;
  const double variance = 2.5;
  const CxVector e = generate_noise(L, variance, 123);
  CHECK(e.squaredNorm() / L == doctest::Approx(variance).epsilon(0.01));

  const CxVector again = generate_noise(64, 1.0, 9);
  const CxVector once = generate_noise(64, 1.0, 9);
  CHECK((again - once).cwiseAbs().maxCoeff() == 0.0);
}
