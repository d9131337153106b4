#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "csradar/bessel.hpp"
#include "csradar/metrics.hpp"

using namespace csradar;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

RadarParams sjr_params(int L = 512, int n_p = 1) {
  RadarParams p;
  p.carrier_freq_hz = 5e9;
  p.sample_period_s = 5e-8;
  p.pulse_repetition_s = 2.5e-4;
  p.snapshots_per_pulse = L;
  p.num_pulses = n_p;
  p.disk_radius_m = 10.0;
  return p;
}

Target make_target(double az_deg, double beta_re = 1.0) {
  Target t;
  t.azimuth_rad = deg_to_rad(az_deg);
  t.initial_range_m = 1e4;
  t.reflectivity = cxd(beta_re, 0.0);
  return t;
}
}  // namespace

TEST_CASE("PRR handles clean and uniform estimates") {
  CxVector clean = CxVector::Zero(10);
  clean(3) = cxd(2.0, 0.0);
  const std::vector<int> targets{3};
  const auto clean_prr = prr(clean, targets, std::nullopt);
  CHECK(clean_prr.size() == 1);
  CHECK(std::isinf(clean_prr[0]));

  const int n = 81;
  CxVector uniform = CxVector::Constant(n, cxd(0.7, 0.2));
  const auto uprr = prr(uniform, std::vector<int>{5}, std::nullopt);
  CHECK(uprr[0] == doctest::Approx(1.0 / (n - 1)));

  CHECK_THROWS_AS(prr(uniform, std::vector<int>{5}, std::optional<int>(5)),
                  std::invalid_argument);
}

TEST_CASE("PRR and PJR are invariant to global complex scaling") {
  CxVector est(6);
  est << cxd(1, 2), cxd(0.1, 0), cxd(0, 0.4), cxd(2, -1), cxd(0.3, 0.3),
      cxd(0, -0.2);
  const std::vector<int> targets{0, 3};
  const int jam = 2;
  const auto base_prr = prr(est, targets, jam);
  const double base_pjr = pjr(est, targets, jam);

  const CxVector scaled = cxd(0.3, -1.7) * est;
  const auto s_prr = prr(scaled, targets, jam);
  for (std::size_t k = 0; k < base_prr.size(); ++k) {
    CHECK(s_prr[k] == doctest::Approx(base_prr[k]));
  }
  CHECK(pjr(scaled, targets, jam) == doctest::Approx(base_pjr));
}

TEST_CASE("PJR sentinels and simple values") {
  CxVector est = CxVector::Zero(8);
  est(1) = cxd(1.0, 0.0);
  CHECK(std::isinf(pjr(est, std::vector<int>{1}, 4)));
  est(4) = cxd(1.0, 0.0);
  CHECK(pjr(est, std::vector<int>{1}, 4) == doctest::Approx(1.0));
}

TEST_CASE("MSE / PFA binarization") {
  const int n = 81;
  CxVector perfect = CxVector::Zero(n);
  perfect(10) = cxd(1, 0);
  perfect(20) = cxd(0, 1);
  const std::vector<int> truth{10, 20};
  for (double tau : {0.1, 0.5, 0.9}) {
    const MsePfa r = mse_pfa(perfect, truth, tau);
    CHECK(r.mse == 0.0);
    CHECK(r.pfa == 0.0);
  }

  const CxVector ones = CxVector::Constant(n, cxd(1, 0));
  const MsePfa r = mse_pfa(ones, truth, 0.5);
  CHECK(r.mse == doctest::Approx(79.0 / 81.0));
  CHECK(r.pfa == doctest::Approx(1.0));

  CHECK_THROWS_AS(mse_pfa(ones, truth, 0.0), std::invalid_argument);
}

TEST_CASE("analytic SJR closed forms") {
  const RadarParams p = sjr_params();
  Jammer jam;
  jam.azimuth_rad = deg_to_rad(7.0);
  jam.amplitude = 20.0;

  SUBCASE("single unit target has no cross term") {
    const std::vector<Target> targets{make_target(0.0)};
    const SjrReport r = analytic_sjr(p, targets, jam, 30, 30, SjrKind::standard);
    CHECK(r.phi == doctest::Approx(0.0));
    CHECK(r.analytic_standard == doctest::Approx(30.0 / 400.0));
    CHECK(r.analytic_modified == doctest::Approx(512.0 / 400.0));
    CHECK(r.jammer_power == doctest::Approx(400.0 * 30.0 / 512.0));
  }

  SUBCASE("modified over standard gain is L / M_t") {
    const std::vector<Target> targets{make_target(0.2), make_target(-0.2)};
    const SjrReport r = analytic_sjr(p, targets, jam, 30, 30, SjrKind::standard);
    CHECK(r.analytic_modified / r.analytic_standard ==
          doctest::Approx(512.0 / 30.0));
  }

  SUBCASE("standard SJR ignores M and N_p") {
    const std::vector<Target> targets{make_target(0.2), make_target(-0.2)};
    const SjrReport a = analytic_sjr(p, targets, jam, 30, 30, SjrKind::standard);
    const SjrReport b = analytic_sjr(p, targets, jam, 7, 30, SjrKind::standard);
    RadarParams p5 = p;
    p5.num_pulses = 5;
    const SjrReport c = analytic_sjr(p5, targets, jam, 30, 30, SjrKind::standard);
    CHECK(a.analytic_standard == doctest::Approx(b.analytic_standard));
    CHECK(a.analytic_standard == doctest::Approx(c.analytic_standard));
  }

  SUBCASE("zero jammer amplitude gives the infinity sentinel") {
    Jammer none = jam;
    none.amplitude = 0.0;
    const std::vector<Target> targets{make_target(0.0)};
    const SjrReport r = analytic_sjr(p, targets, none, 30, 30, SjrKind::standard);
    CHECK(std::isinf(r.analytic_standard));
  }
}

TEST_CASE("empirical SJR matches the analytic standard form (light run)") {
  SjrExperimentConfig cfg;
  cfg.params = sjr_params();
  cfg.m_t = 30;
  cfg.M = 30;
  cfg.targets = {make_target(0.2), make_target(-0.2)};
  cfg.jammer.azimuth_rad = deg_to_rad(7.0);
  cfg.jammer.range_m = 1e4;
  cfg.jammer.amplitude = 20.0;
  cfg.kind = SjrKind::standard;
  cfg.waveform_mode = WaveformNormalization::column_orthonormal;
  cfg.trials = 300;
  cfg.seed = 9;

  const auto samples = run_sjr_trials(cfg);
  const double emp = empirical_sjr(samples);
  const SjrReport an =
      analytic_sjr(cfg.params, cfg.targets, cfg.jammer, cfg.M, cfg.m_t,
                   SjrKind::standard);
  CHECK(emp == doctest::Approx(an.analytic_standard).epsilon(0.2));
  CHECK_THROWS_AS(empirical_sjr({}), std::invalid_argument);
}

TEST_CASE("moving-target empirical SJR stays near the stationary value") {
  SjrExperimentConfig cfg;
  cfg.params = sjr_params(256, 2);
  cfg.m_t = 10;
  cfg.M = 10;
  cfg.targets = {make_target(0.2), make_target(-0.2)};
  cfg.jammer.amplitude = 20.0;
  cfg.kind = SjrKind::standard;
  cfg.trials = 400;
  cfg.seed = 31;
  const double stationary = empirical_sjr(run_sjr_trials(cfg));

  cfg.targets[0].radial_speed_mps = 80.0;
  cfg.targets[1].radial_speed_mps = 80.0;
  const double moving = empirical_sjr(run_sjr_trials(cfg));
  CHECK(moving == doctest::Approx(stationary).epsilon(0.1));
}

TEST_CASE("disk projection distribution and Bessel identity") {
  SUBCASE("alpha -> 0 limit") {
    const BesselCheck c = bessel_expectation_check(1e-13, 1000, 5);
    CHECK(c.analytic == doctest::Approx(1.0));
  }

  SUBCASE("alpha = 2 against J1") {
    const BesselCheck c = bessel_expectation_check(2.0, 1'000'000, 6);
    CHECK(c.analytic == doctest::Approx(bessel_j1(2.0)));
    CHECK(std::abs(c.empirical - c.analytic) < 0.005);
  }

  SUBCASE("h has density (2/pi) sqrt(1 - h^2)") {
    const int n = 1'000'000;
    RealVector h = disk_projection_samples(n, 77, 0.3);
    std::vector<double> sorted(h.data(), h.data() + n);
    std::sort(sorted.begin(), sorted.end());
    auto cdf = [](double x) {
      x = std::clamp(x, -1.0, 1.0);
      return 0.5 + (x * std::sqrt(1.0 - x * x) + std::asin(x)) / kPi;
    };
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
      const double model = cdf(sorted[i]);
      ks = std::max({ks, std::abs(model - static_cast<double>(i) / n),
                     std::abs(model - static_cast<double>(i + 1) / n)});
    }
    CHECK(ks < 0.002);
  }
}

TEST_CASE("empirical CDF basics") {
  const std::vector<double> single{3.25};
  const EmpiricalCdf cdf = empirical_cdf(single);
  CHECK(cdf(3.24) == 0.0);
  CHECK(cdf(3.25) == 1.0);

  const std::vector<double> mixed{1.0, kInf, 0.5, 2.0};
  const EmpiricalCdf m = empirical_cdf(mixed);
  CHECK(m.sorted_values.back() == kInf);
  CHECK(m(m.sorted_values[2]) == doctest::Approx(0.75));
  CHECK(m(2.0) == doctest::Approx(0.75));

  CHECK_THROWS_AS(empirical_cdf({}), std::invalid_argument);
}
