#include "csradar/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "csradar/bessel.hpp"
#include "csradar/signal.hpp"

namespace csradar {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_indices(const CxVector& estimate, std::span<const int> target_indices,
                   std::optional<int> jammer_index) {
  std::set<int> seen;
  for (int idx : target_indices) {
    if (idx < 0 || idx >= estimate.size()) {
      throw std::invalid_argument("target index out of range");
    }
    seen.insert(idx);
  }
  if (jammer_index) {
    if (*jammer_index < 0 || *jammer_index >= estimate.size()) {
      throw std::invalid_argument("jammer index out of range");
    }
    if (seen.count(*jammer_index)) {
      throw std::invalid_argument("jammer index overlaps a target index");
    }
  }
}
}  // namespace

std::vector<double> prr(const CxVector& estimate,
                        std::span<const int> target_indices,
                        std::optional<int> jammer_index) {
  check_indices(estimate, target_indices, jammer_index);
  double denom = estimate.squaredNorm();
  for (int idx : target_indices) denom -= std::norm(estimate(idx));
  if (jammer_index) denom -= std::norm(estimate(*jammer_index));

  std::vector<double> out;
  out.reserve(target_indices.size());
  for (int idx : target_indices) {
    out.push_back(denom > 0.0 ? std::norm(estimate(idx)) / denom : kInf);
  }
  return out;
}

double pjr(const CxVector& estimate, std::span<const int> target_indices,
           int jammer_index) {
  check_indices(estimate, target_indices, jammer_index);
  if (target_indices.empty()) throw std::invalid_argument("no targets");
  double mean_peak = 0.0;
  for (int idx : target_indices) mean_peak += std::norm(estimate(idx));
  mean_peak /= static_cast<double>(target_indices.size());
  const double jam = std::norm(estimate(jammer_index));
  return jam > 0.0 ? mean_peak / jam : kInf;
}

std::vector<int> detect_support(const CxVector& estimate, double tau) {
  std::vector<int> support;
  const double peak = estimate.cwiseAbs().maxCoeff();
  if (peak <= 0.0) return support;
  const double level = tau * peak;
  for (int n = 0; n < estimate.size(); ++n) {
    if (std::abs(estimate(n)) >= level) support.push_back(n);
  }
  return support;
}

MsePfa mse_pfa(const CxVector& estimate, std::span<const int> truth_support,
               double tau) {
  if (tau <= 0.0) throw std::invalid_argument("tau must be positive");
  const int n = static_cast<int>(estimate.size());
  std::vector<char> truth(n, 0);
  for (int idx : truth_support) {
    if (idx < 0 || idx >= n) throw std::invalid_argument("truth index out of range");
    truth[idx] = 1;
  }
  std::vector<char> detected(n, 0);
  for (int idx : detect_support(estimate, tau)) detected[idx] = 1;

  int mismatches = 0;
  int false_pos = 0;
  int truth_count = 0;
  for (int i = 0; i < n; ++i) {
    truth_count += truth[i];
    if (detected[i] != truth[i]) ++mismatches;
    if (detected[i] && !truth[i]) ++false_pos;
  }
  MsePfa result;
  result.mse = static_cast<double>(mismatches) / n;
  const int negatives = n - truth_count;
  result.pfa = negatives > 0 ? static_cast<double>(false_pos) / negatives : 0.0;
  return result;
}

TrialMetrics compute_trial_metrics(const CxVector& estimate,
                                   std::span<const int> target_indices,
                                   std::optional<int> jammer_index,
                                   double tau) {
  TrialMetrics tm;
  tm.prr_per_target = prr(estimate, target_indices, jammer_index);
  tm.pjr = jammer_index ? pjr(estimate, target_indices, *jammer_index) : kInf;
  std::vector<int> truth(target_indices.begin(), target_indices.end());
  const MsePfa mp = mse_pfa(estimate, truth, tau);
  tm.mse = mp.mse;
  tm.pfa = mp.pfa;
  tm.detected_support = detect_support(estimate, tau);
  return tm;
}

SjrReport analytic_sjr(const RadarParams& params, std::span<const Target> targets,
                       const Jammer& jammer, int M, int m_t, SjrKind kind) {
  const double lambda = params.wavelength_m();
  for (const Target& t : targets) {
    if (std::abs(t.doppler_hz(params)) * params.pulse_repetition_s > 0.1) {
      throw std::invalid_argument("analytic SJR requires f_k * T << 1");
    }
  }

  double beta_sq_sum = 0.0;
  for (const Target& t : targets) beta_sq_sum += std::norm(t.reflectivity);

  cxd phi_c{0.0, 0.0};
  for (std::size_t k = 0; k < targets.size(); ++k) {
    for (std::size_t kp = 0; kp < targets.size(); ++kp) {
      if (k == kp) continue;
      const Target& tk = targets[k];
      const Target& tkp = targets[kp];
      const double s =
          varsigma(4.0 * std::sin((tkp.azimuth_rad - tk.azimuth_rad) / 2.0),
                   params.disk_radius_m, lambda);
      const double range_phase =
          4.0 * kPi / lambda * (tk.initial_range_m - tkp.initial_range_m);
      phi_c += std::conj(tk.reflectivity) * tkp.reflectivity *
               std::polar(1.0, range_phase) * s * s;
    }
  }
  const double phi = phi_c.real();

  SjrReport report;
  report.phi = phi;
  const double jam_pow = jammer.amplitude * jammer.amplitude;
  const int L = params.snapshots_per_pulse;
  const int n_p = params.num_pulses;
  report.jammer_power = n_p * jam_pow * static_cast<double>(M) / L;
  report.signal_power =
      kind == SjrKind::standard
          ? n_p * static_cast<double>(M) * m_t / L * (beta_sq_sum + phi)
          : n_p * static_cast<double>(M) * (beta_sq_sum + phi);
  if (jam_pow <= 0.0) {
    report.analytic_standard = kInf;
    report.analytic_modified = kInf;
  } else {
    report.analytic_standard = m_t * (beta_sq_sum + phi) / jam_pow;
    report.analytic_modified = L * (beta_sq_sum + phi) / jam_pow;
  }
  return report;
}

double empirical_sjr(std::span<const SjrSample> samples) {
  if (samples.empty()) throw std::invalid_argument("no SJR samples");
  double sig = 0.0;
  double jam = 0.0;
  for (const SjrSample& s : samples) {
    sig += s.signal_power;
    jam += s.jammer_power;
  }
  return jam > 0.0 ? sig / jam : kInf;
}

std::vector<SjrSample> run_sjr_trials(const SjrExperimentConfig& config) {
  const RadarParams& p = config.params;
  const int L = p.snapshots_per_pulse;
  std::vector<SjrSample> samples;
  samples.reserve(config.trials);

  for (int trial = 0; trial < config.trials; ++trial) {
    const std::uint64_t ts = mix_seed(config.seed, trial);
    const NodePlacement placement =
        sample_node_placement(p, config.m_t, 1, mix_seed(ts, 0));
    const WaveformMatrix wf =
        generate_qpsk(L, config.m_t, config.waveform_mode, mix_seed(ts, 1));
    const MeasurementMatrix mm = generate_measurement_matrix(
        config.kind == SjrKind::standard ? MeasurementKind::gaussian
                                         : MeasurementKind::modified,
        config.M, L, &wf, false, mix_seed(ts, 2));
    const JammerWaveform jw =
        generate_jammer_waveform(L, p.num_pulses, mix_seed(ts, 3));

    SjrSample sample;
    for (int m = 1; m <= p.num_pulses; ++m) {
      const ReceivedPulse zs =
          synthesize_received(p, placement, config.targets, nullptr, wf,
                              nullptr, 0.0, 0, m, 0);
      sample.signal_power += (mm.matrix * zs.snapshots).squaredNorm();
      const double amp = config.jammer.amplitude;
      sample.jammer_power += amp * amp * (mm.matrix * jw.pulses[m - 1]).squaredNorm();
    }
    samples.push_back(sample);
  }
  return samples;
}

RealVector disk_projection_samples(int num_samples, std::uint64_t seed,
                                   double psi0) {
  if (num_samples < 1) throw std::invalid_argument("need at least one sample");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  RealVector h(num_samples);
  for (int i = 0; i < num_samples; ++i) {
    const double rho_over_r = std::sqrt(unif(rng));
    const double alpha = -kPi + 2.0 * kPi * unif(rng);
    h(i) = rho_over_r * std::sin(alpha - psi0);
  }
  return h;
}

BesselCheck bessel_expectation_check(double alpha, int num_samples,
                                     std::uint64_t seed) {
  const RealVector h = disk_projection_samples(num_samples, seed, 0.3);
  double acc = 0.0;
  for (int i = 0; i < h.size(); ++i) acc += std::cos(alpha * h(i));
  BesselCheck check;
  check.empirical = acc / num_samples;
  check.analytic = std::abs(alpha) < 1e-12 ? 1.0 : 2.0 * bessel_j1(alpha) / alpha;
  return check;
}

double EmpiricalCdf::operator()(double x) const {
  const auto it =
      std::upper_bound(sorted_values.begin(), sorted_values.end(), x);
  return static_cast<double>(it - sorted_values.begin()) /
         static_cast<double>(sorted_values.size());
}

EmpiricalCdf empirical_cdf(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  EmpiricalCdf cdf;
  cdf.sorted_values.assign(samples.begin(), samples.end());
  std::sort(cdf.sorted_values.begin(), cdf.sorted_values.end());
  return cdf;
}

}  // namespace csradar
