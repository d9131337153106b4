#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "csradar/scene.hpp"
#include "csradar/sensing.hpp"
#include "csradar/types.hpp"

namespace csradar {

/// Per-trial evaluation quantities. Ratios use +infinity as the sentinel for
/// a zero denominator (a perfectly clean estimate), so CDFs can rank them
/// above every finite value.
struct TrialMetrics {
  std::vector<double> prr_per_target;
  double pjr = 0.0;
  double mse = 0.0;
  double pfa = 0.0;
  std::vector<int> detected_support;
};

/// PRR_k = |s_k|^2 / (s^H s - sum_i |s_target_i|^2 - |s_jammer|^2).
std::vector<double> prr(const CxVector& estimate,
                        std::span<const int> target_indices,
                        std::optional<int> jammer_index);

/// PJR = mean_k |s_target_k|^2 / |s_jammer|^2.
double pjr(const CxVector& estimate, std::span<const int> target_indices,
           int jammer_index);

struct MsePfa {
  double mse = 0.0;
  double pfa = 0.0;
};

/// Binarizes |estimate| at tau * max|estimate| and compares against the
/// indicator vector of truth_support. PFA counts false positives over the
/// N - |truth| non-target cells.
MsePfa mse_pfa(const CxVector& estimate, std::span<const int> truth_support,
               double tau);

/// Indices with |estimate_n| >= tau * max|estimate| (empty for a zero
/// estimate).
std::vector<int> detect_support(const CxVector& estimate, double tau);

TrialMetrics compute_trial_metrics(const CxVector& estimate,
                                   std::span<const int> target_indices,
                                   std::optional<int> jammer_index, double tau);

enum class SjrKind { standard, modified };

struct SjrReport {
  double analytic_standard = 0.0;  // M_t (sum_k |beta_k|^2 + phi) / |beta|^2
  double analytic_modified = 0.0;  // L   (sum_k |beta_k|^2 + phi) / |beta|^2
  double empirical = 0.0;          // Monte Carlo power ratio, when computed
  double signal_power = 0.0;       // analytic P_s for the requested kind
  double jammer_power = 0.0;       // N_p |beta|^2 M / L
  double phi = 0.0;                // disk-averaged cross-target term
};

/// Closed-form SJR from the disk-distribution identities. Requires slow or
/// stationary targets (f_k T << 1).
SjrReport analytic_sjr(const RadarParams& params, std::span<const Target> targets,
                       const Jammer& jammer, int M, int m_t, SjrKind kind);

/// One Monte Carlo draw of compressed signal and jammer power at a node.
struct SjrSample {
  double signal_power = 0.0;
  double jammer_power = 0.0;
};

/// Ratio of mean compressed signal power to mean compressed jammer power.
double empirical_sjr(std::span<const SjrSample> samples);

struct SjrExperimentConfig {
  RadarParams params;
  int m_t = 30;
  int M = 30;
  std::vector<Target> targets;
  Jammer jammer;
  SjrKind kind = SjrKind::standard;
  WaveformNormalization waveform_mode = WaveformNormalization::column_orthonormal;
  int trials = 1000;
  std::uint64_t seed = 1;
};

/// Draws (placement, waveforms, measurement matrix, jammer waveform) per
/// trial and records per-node compressed powers.
std::vector<SjrSample> run_sjr_trials(const SjrExperimentConfig& config);

/// Samples h = (rho/r) sin(alpha - psi0) with rho, alpha drawn from the
/// disk node distribution; h has density (2/pi) sqrt(1 - h^2).
RealVector disk_projection_samples(int num_samples, std::uint64_t seed,
                                   double psi0 = 0.0);

struct BesselCheck {
  double empirical = 0.0;  // Re mean e^{j alpha h}
  double analytic = 0.0;   // 2 J1(alpha) / alpha
};

BesselCheck bessel_expectation_check(double alpha, int num_samples,
                                     std::uint64_t seed);

/// Right-continuous empirical CDF; +inf sentinels sort to the top.
struct EmpiricalCdf {
  std::vector<double> sorted_values;

  double operator()(double x) const;
};

EmpiricalCdf empirical_cdf(std::span<const double> samples);

}  // namespace csradar
