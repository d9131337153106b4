#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "csradar/baselines.hpp"
#include "csradar/metrics.hpp"
#include "csradar/scene.hpp"
#include "csradar/sensing.hpp"
#include "csradar/solver.hpp"
#include "csradar/types.hpp"

namespace csradar {

/// Grid specification in the config's units (degrees, m/s); converted to
/// radians/Hz internally. A zero speed step collapses the speed axis to the
/// single slice speed_min_mps.
struct GridSpec {
  double angle_min_deg = -8.0;
  double angle_max_deg = 8.0;
  double angle_step_deg = 0.2;
  double speed_min_mps = 0.0;
  double speed_max_mps = 0.0;
  double speed_step_mps = 0.0;
};

struct TargetSpec {
  double azimuth_deg = 0.0;
  double speed_mps = 0.0;
  double range_m = 1e4;
  cxd reflectivity{1.0, 0.0};
};

struct JammerSpec {
  bool present = false;
  double azimuth_deg = 7.0;
  double range_m = 1e4;
  double amplitude = 0.0;
};

/// Explicit mu values can be given on two scales: `internal` is the natural
/// scale of this implementation (unit-norm waveform columns); `caption`
/// matches the per-sample-unit-power convention behind the paper figures'
/// quoted thresholds and maps to internal as mu / L.
enum class MuScale { internal, caption };

struct SolverSpec {
  MuPolicy mu_policy = MuPolicy::lower_bound_scaled;
  double mu = 0.0;
  MuScale mu_scale = MuScale::internal;
  double t_scalar = 3.0;
  double feasibility_tol = 1e-7;
  double duality_gap_tol = 1e-7;
  int max_iterations = 200;
  double detection_threshold = 0.5;  // tau for support extraction
};

struct MeasurementSpec {
  int per_node = 30;  // M
  MeasurementKind kind = MeasurementKind::gaussian;
  bool orthonormal_rows = false;
  bool fresh_per_pulse = false;
};

struct ScenarioConfig {
  std::string name = "scenario";
  RadarParams radar;
  int num_transmit = 30;
  int num_receive = 1;
  GridSpec grid;
  std::vector<TargetSpec> targets;
  JammerSpec jammer;
  double snr_db = 0.0;
  MeasurementSpec measurement;
  WaveformNormalization waveform_mode = WaveformNormalization::raw_qpsk;
  SolverSpec solver;
  int trials = 1;
  std::uint64_t seed = 1;
  bool redraw_placement_per_trial = false;
  std::vector<std::string> baselines;  // "matched_filter", "capon", "music"
  std::string output_dir = "out";

  /// Collects every validation failure; throws std::invalid_argument with
  /// the joined report when any exist.
  void validate() const;

  /// Per-received-sample thermal noise variance: 10^(-snr/10) / L, i.e. the
  /// SNR is per-node waveform power over noise power in matching units.
  double noise_variance() const;

  /// Per-compressed-sample effective noise variance (thermal plus
  /// jammer-as-noise) feeding the mu lower bound.
  double noise_variance_effective() const;

  AngleDopplerGrid make_grid() const;
  std::vector<Target> make_targets() const;
  std::optional<Jammer> make_jammer() const;
  double mu_internal() const;  // resolves MuScale for explicit policies
};

ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& config);
ScenarioConfig load_config(const std::string& path);

/// Named reproductions of the paper-figure scenarios.
ScenarioConfig preset(const std::string& name);
std::vector<std::string> preset_names();

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  TrialMetrics metrics;
  double residual_inf_norm = 0.0;
  SolveStatus status = SolveStatus::optimal;
  int iterations = 0;
  double mu_used = 0.0;
  double wall_ms = 0.0;
  bool cs_peaks_correct = false;  // top-K cells == truth support
  bool mf_peaks_correct = false;  // only when matched_filter enabled
};

struct ScenarioResult {
  ScenarioConfig config;
  std::string scenario_hash;
  std::vector<TrialRecord> records;
  AngleDopplerGrid grid;
  std::vector<int> truth_support;
  std::optional<int> jammer_index;
  RealVector trial0_estimate_abs;
  std::map<std::string, RealVector> trial0_spectra;  // per baseline method
};

ScenarioResult run_scenario(const ScenarioConfig& config);

/// Timing-free deterministic summary (aggregates + config echo + hash).
nlohmann::json summary_json(const ScenarioResult& result);

/// Writes trials.csv, summary.json, prr_cdf.csv / pjr_cdf.csv and
/// spectrum_*.csv into the result's output directory (created on demand).
/// Returns the written paths.
std::vector<std::string> emit_results(const ScenarioResult& result);

/// Worker count for trial parallelism: CSRADAR_WORKERS env override, else
/// hardware concurrency.
int worker_count();

/// Runs fn(0..count-1) across the worker pool; fn must only touch its own
/// slot state.
void parallel_for(int count, const std::function<void(int)>& fn);

// --- Appendix correlation studies (sensing-matrix column geometry) -------

struct CorrelationSweep {
  std::vector<int> sweep_values;
  std::vector<double> mean_correlation;  // normalized cross-column corr
};

/// Mean normalized cross-column correlation between two angle hypotheses as
/// the number of receive nodes grows (one pulse, shared Phi across nodes).
CorrelationSweep receive_correlation_study(const RadarParams& params, int m_t,
                                           int M, double angle_a_rad,
                                           double angle_b_rad,
                                           std::span<const int> nr_values,
                                           int seeds, std::uint64_t base_seed);

/// Same sweep over the transmit node count (N_r = N_p = 1).
CorrelationSweep transmit_correlation_study(const RadarParams& params, int M,
                                            double angle_a_rad,
                                            double angle_b_rad,
                                            std::span<const int> mt_values,
                                            int seeds, std::uint64_t base_seed);

/// Auto/cross column-correlation ratio for two Doppler hypotheses at one
/// angle as the pulse count grows.
CorrelationSweep pulse_ratio_study(const RadarParams& params, int m_t, int M,
                                   double doppler_a_hz, double doppler_b_hz,
                                   std::span<const int> np_values, int seeds,
                                   std::uint64_t base_seed);

}  // namespace csradar
