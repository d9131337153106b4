#include "csradar/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace csradar {

namespace {

using nlohmann::json;

double speed_to_doppler(double speed_mps, const RadarParams& p) {
  return 2.0 * speed_mps * p.carrier_freq_hz / kSpeedOfLight;
}

std::string kind_name(MeasurementKind k) {
  return k == MeasurementKind::gaussian ? "gaussian" : "modified";
}
MeasurementKind kind_from(const std::string& s) {
  if (s == "gaussian") return MeasurementKind::gaussian;
  if (s == "modified") return MeasurementKind::modified;
  throw std::invalid_argument("unknown measurement kind: " + s);
}
std::string wf_name(WaveformNormalization m) {
  return m == WaveformNormalization::raw_qpsk ? "raw_qpsk" : "column_orthonormal";
}
WaveformNormalization wf_from(const std::string& s) {
  if (s == "raw_qpsk") return WaveformNormalization::raw_qpsk;
  if (s == "column_orthonormal") return WaveformNormalization::column_orthonormal;
  throw std::invalid_argument("unknown waveform mode: " + s);
}
std::string policy_name(MuPolicy p) {
  return p == MuPolicy::explicit_value ? "explicit" : "lower_bound_scaled";
}
MuPolicy policy_from(const std::string& s) {
  if (s == "explicit") return MuPolicy::explicit_value;
  if (s == "lower_bound_scaled") return MuPolicy::lower_bound_scaled;
  throw std::invalid_argument("unknown mu policy: " + s);
}
std::string scale_name(MuScale m) {
  return m == MuScale::internal ? "internal" : "caption";
}
MuScale scale_from(const std::string& s) {
  if (s == "internal") return MuScale::internal;
  if (s == "caption") return MuScale::caption;
  throw std::invalid_argument("unknown mu scale: " + s);
}
std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iter: return "max_iter";
    default: return "infeasible";
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

void write_double(std::ostream& os, double v) {
  if (std::isinf(v)) {
    os << (v > 0 ? "inf" : "-inf");
    return;
  }
  std::ostringstream tmp;
  tmp.precision(17);
  tmp << v;
  os << tmp.str();
}

}  // namespace

// ----------------------------------------------------------------------
// ScenarioConfig
// ----------------------------------------------------------------------

void ScenarioConfig::validate() const {
  std::vector<std::string> errors;
  auto require = [&](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };

  try {
    radar.validate();
  } catch (const std::exception& e) {
    errors.emplace_back(e.what());
  }
  require(num_transmit >= 1, "num_transmit must be >= 1");
  require(num_receive >= 1, "num_receive must be >= 1");
  require(measurement.per_node >= 1, "measurements per node must be >= 1");
  require(measurement.per_node < radar.snapshots_per_pulse,
          "measurements per node must be < L");
  if (measurement.kind == MeasurementKind::modified) {
    require(measurement.per_node <= num_transmit,
            "modified measurement needs M <= M_t");
  }
  require(!targets.empty(), "at least one target required");
  require(grid.angle_step_deg > 0, "angle step must be positive");
  require(grid.angle_max_deg >= grid.angle_min_deg, "bad angle range");
  require(trials >= 0, "trials must be nonnegative");
  if (solver.mu_policy == MuPolicy::explicit_value) {
    require(solver.mu > 0, "explicit mu must be positive");
  }
  require(solver.t_scalar > 0, "t_scalar must be positive");
  require(solver.detection_threshold > 0 && solver.detection_threshold < 1,
          "detection_threshold must lie in (0, 1)");
  for (const auto& b : baselines) {
    require(b == "matched_filter" || b == "capon" || b == "music",
            "unknown baseline: " + b);
    if (b == "music") {
      require(num_receive > static_cast<int>(targets.size()),
              "MUSIC requires num_receive > number of targets");
    }
  }
  try {
    const RadarParams& p = radar;
    for (const TargetSpec& t : targets) {
      Target target;
      target.azimuth_rad = deg_to_rad(t.azimuth_deg);
      target.radial_speed_mps = t.speed_mps;
      target.initial_range_m = t.range_m;
      target.reflectivity = t.reflectivity;
      validate_target(p, target);
    }
  } catch (const std::exception& e) {
    errors.emplace_back(e.what());
  }

  if (!errors.empty()) {
    std::string joined = "invalid scenario config:";
    for (const auto& e : errors) joined += "\n  - " + e;
    throw std::invalid_argument(joined);
  }
}

double ScenarioConfig::noise_variance() const {
  return std::pow(10.0, -snr_db / 10.0) / radar.snapshots_per_pulse;
}

double ScenarioConfig::noise_variance_effective() const {
  double v = std::pow(10.0, -snr_db / 10.0);
  if (jammer.present) v += jammer.amplitude * jammer.amplitude;
  return v / radar.snapshots_per_pulse;
}

AngleDopplerGrid ScenarioConfig::make_grid() const {
  return AngleDopplerGrid::uniform(
      deg_to_rad(grid.angle_min_deg), deg_to_rad(grid.angle_max_deg),
      deg_to_rad(grid.angle_step_deg), speed_to_doppler(grid.speed_min_mps, radar),
      speed_to_doppler(grid.speed_max_mps, radar),
      speed_to_doppler(grid.speed_step_mps, radar));
}

std::vector<Target> ScenarioConfig::make_targets() const {
  std::vector<Target> out;
  out.reserve(targets.size());
  for (const TargetSpec& t : targets) {
    Target target;
    target.azimuth_rad = deg_to_rad(t.azimuth_deg);
    target.radial_speed_mps = t.speed_mps;
    target.initial_range_m = t.range_m;
    target.reflectivity = t.reflectivity;
    out.push_back(target);
  }
  return out;
}

std::optional<Jammer> ScenarioConfig::make_jammer() const {
  if (!jammer.present || jammer.amplitude <= 0.0) return std::nullopt;
  Jammer j;
  j.azimuth_rad = deg_to_rad(jammer.azimuth_deg);
  j.range_m = jammer.range_m;
  j.amplitude = jammer.amplitude;
  return j;
}

double ScenarioConfig::mu_internal() const {
  if (solver.mu_scale == MuScale::caption) {
    return solver.mu / radar.snapshots_per_pulse;
  }
  return solver.mu;
}

// ----------------------------------------------------------------------
// JSON round trip
// ----------------------------------------------------------------------

nlohmann::json config_to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["radar"] = {{"carrier_freq_hz", c.radar.carrier_freq_hz},
                {"sample_period_s", c.radar.sample_period_s},
                {"pulse_repetition_s", c.radar.pulse_repetition_s},
                {"snapshots_per_pulse", c.radar.snapshots_per_pulse},
                {"num_pulses", c.radar.num_pulses},
                {"disk_radius_m", c.radar.disk_radius_m}};
  j["nodes"] = {{"num_transmit", c.num_transmit}, {"num_receive", c.num_receive}};
  j["grid"] = {{"angle_min_deg", c.grid.angle_min_deg},
               {"angle_max_deg", c.grid.angle_max_deg},
               {"angle_step_deg", c.grid.angle_step_deg},
               {"speed_min_mps", c.grid.speed_min_mps},
               {"speed_max_mps", c.grid.speed_max_mps},
               {"speed_step_mps", c.grid.speed_step_mps}};
  j["targets"] = json::array();
  for (const auto& t : c.targets) {
    j["targets"].push_back({{"azimuth_deg", t.azimuth_deg},
                            {"speed_mps", t.speed_mps},
                            {"range_m", t.range_m},
                            {"reflectivity_re", t.reflectivity.real()},
                            {"reflectivity_im", t.reflectivity.imag()}});
  }
  j["jammer"] = {{"present", c.jammer.present},
                 {"azimuth_deg", c.jammer.azimuth_deg},
                 {"range_m", c.jammer.range_m},
                 {"amplitude", c.jammer.amplitude}};
  j["snr_db"] = c.snr_db;
  j["measurements"] = {{"per_node", c.measurement.per_node},
                       {"kind", kind_name(c.measurement.kind)},
                       {"orthonormal_rows", c.measurement.orthonormal_rows},
                       {"fresh_per_pulse", c.measurement.fresh_per_pulse}};
  j["waveform_mode"] = wf_name(c.waveform_mode);
  j["solver"] = {{"mu_policy", policy_name(c.solver.mu_policy)},
                 {"mu", c.solver.mu},
                 {"mu_scale", scale_name(c.solver.mu_scale)},
                 {"t_scalar", c.solver.t_scalar},
                 {"feasibility_tol", c.solver.feasibility_tol},
                 {"duality_gap_tol", c.solver.duality_gap_tol},
                 {"max_iterations", c.solver.max_iterations},
                 {"detection_threshold", c.solver.detection_threshold}};
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["redraw_placement_per_trial"] = c.redraw_placement_per_trial;
  j["baselines"] = c.baselines;
  j["output_dir"] = c.output_dir;
  return j;
}

ScenarioConfig config_from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  c.name = j.value("name", c.name);
  if (j.contains("radar")) {
    const auto& r = j.at("radar");
    c.radar.carrier_freq_hz = r.value("carrier_freq_hz", c.radar.carrier_freq_hz);
    c.radar.sample_period_s = r.value("sample_period_s", c.radar.sample_period_s);
    c.radar.pulse_repetition_s =
        r.value("pulse_repetition_s", c.radar.pulse_repetition_s);
    c.radar.snapshots_per_pulse =
        r.value("snapshots_per_pulse", c.radar.snapshots_per_pulse);
    c.radar.num_pulses = r.value("num_pulses", c.radar.num_pulses);
    c.radar.disk_radius_m = r.value("disk_radius_m", c.radar.disk_radius_m);
  }
  if (j.contains("nodes")) {
    c.num_transmit = j.at("nodes").value("num_transmit", c.num_transmit);
    c.num_receive = j.at("nodes").value("num_receive", c.num_receive);
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    c.grid.angle_min_deg = g.value("angle_min_deg", c.grid.angle_min_deg);
    c.grid.angle_max_deg = g.value("angle_max_deg", c.grid.angle_max_deg);
    c.grid.angle_step_deg = g.value("angle_step_deg", c.grid.angle_step_deg);
    c.grid.speed_min_mps = g.value("speed_min_mps", c.grid.speed_min_mps);
    c.grid.speed_max_mps = g.value("speed_max_mps", c.grid.speed_max_mps);
    c.grid.speed_step_mps = g.value("speed_step_mps", c.grid.speed_step_mps);
  }
  if (j.contains("targets")) {
    c.targets.clear();
    for (const auto& t : j.at("targets")) {
      TargetSpec ts;
      ts.azimuth_deg = t.value("azimuth_deg", 0.0);
      ts.speed_mps = t.value("speed_mps", 0.0);
      ts.range_m = t.value("range_m", 1e4);
      ts.reflectivity =
          cxd(t.value("reflectivity_re", 1.0), t.value("reflectivity_im", 0.0));
      c.targets.push_back(ts);
    }
  }
  if (j.contains("jammer")) {
    const auto& jm = j.at("jammer");
    c.jammer.present = jm.value("present", false);
    c.jammer.azimuth_deg = jm.value("azimuth_deg", c.jammer.azimuth_deg);
    c.jammer.range_m = jm.value("range_m", c.jammer.range_m);
    c.jammer.amplitude = jm.value("amplitude", c.jammer.amplitude);
  }
  c.snr_db = j.value("snr_db", c.snr_db);
  if (j.contains("measurements")) {
    const auto& m = j.at("measurements");
    c.measurement.per_node = m.value("per_node", c.measurement.per_node);
    c.measurement.kind = kind_from(m.value("kind", std::string("gaussian")));
    c.measurement.orthonormal_rows =
        m.value("orthonormal_rows", c.measurement.orthonormal_rows);
    c.measurement.fresh_per_pulse =
        m.value("fresh_per_pulse", c.measurement.fresh_per_pulse);
  }
  c.waveform_mode = wf_from(j.value("waveform_mode", std::string("raw_qpsk")));
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    c.solver.mu_policy =
        policy_from(s.value("mu_policy", std::string("lower_bound_scaled")));
    c.solver.mu = s.value("mu", c.solver.mu);
    c.solver.mu_scale = scale_from(s.value("mu_scale", std::string("internal")));
    c.solver.t_scalar = s.value("t_scalar", c.solver.t_scalar);
    c.solver.feasibility_tol = s.value("feasibility_tol", c.solver.feasibility_tol);
    c.solver.duality_gap_tol = s.value("duality_gap_tol", c.solver.duality_gap_tol);
    c.solver.max_iterations = s.value("max_iterations", c.solver.max_iterations);
    c.solver.detection_threshold =
        s.value("detection_threshold", c.solver.detection_threshold);
  }
  c.trials = j.value("trials", c.trials);
  c.seed = j.value("seed", c.seed);
  c.redraw_placement_per_trial =
      j.value("redraw_placement_per_trial", c.redraw_placement_per_trial);
  if (j.contains("baselines")) {
    c.baselines = j.at("baselines").get<std::vector<std::string>>();
  }
  c.output_dir = j.value("output_dir", c.output_dir);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json j;
  in >> j;
  return config_from_json(j);
}

// ----------------------------------------------------------------------
// Presets
// ----------------------------------------------------------------------

namespace {

ScenarioConfig stationary_base() {
  ScenarioConfig c;
  c.radar = RadarParams{};
  c.num_transmit = 30;
  c.num_receive = 1;
  c.grid = GridSpec{-8.0, 8.0, 0.2, 0.0, 0.0, 0.0};
  c.targets = {TargetSpec{0.2, 0.0, 1e4, cxd(1, 0)},
               TargetSpec{-0.2, 0.0, 1e4, cxd(1, 0)}};
  c.jammer = JammerSpec{true, 7.0, 1e4, 20.0};
  c.snr_db = 0.0;
  c.measurement = MeasurementSpec{30, MeasurementKind::gaussian, false, false};
  c.waveform_mode = WaveformNormalization::raw_qpsk;
  c.solver.mu_policy = MuPolicy::explicit_value;
  c.solver.mu_scale = MuScale::caption;
  c.trials = 1000;
  c.seed = 1;
  return c;
}

ScenarioConfig moving_base() {
  ScenarioConfig c = stationary_base();
  c.radar.num_pulses = 5;
  c.grid = GridSpec{-8.0, 8.0, 0.5, 50.0, 110.0, 5.0};
  c.targets = {TargetSpec{-1.0, 60.0, 1e4, cxd(1, 0)},
               TargetSpec{0.0, 70.0, 1e4, cxd(1, 0)},
               TargetSpec{1.0, 80.0, 1e4, cxd(1, 0)}};
  c.solver.mu_policy = MuPolicy::lower_bound_scaled;
  c.solver.mu = 0.0;
  c.solver.mu_scale = MuScale::internal;
  c.solver.t_scalar = 3.0;
  c.trials = 50;
  return c;
}

}  // namespace

ScenarioConfig preset(const std::string& name) {
  ScenarioConfig c;
  if (name == "fig2") {
    c = stationary_base();
    c.num_receive = 1;
    c.solver.mu = 26.0;
  } else if (name == "fig4") {
    c = stationary_base();
    c.num_receive = 10;
    c.solver.mu = 120.0;
  } else if (name == "fig6") {
    c = stationary_base();
    c.num_receive = 30;
    c.jammer.amplitude = 60.0;
    c.solver.mu = 800.0;
  } else if (name == "fig7") {
    c = stationary_base();
    c.num_receive = 10;
    c.jammer.amplitude = 60.0;
    c.solver.mu = 280.0;
  } else if (name == "fig9") {
    c = stationary_base();
    c.num_receive = 20;
    c.snr_db = -40.0;
    c.solver.mu = 350.0;
  } else if (name == "fig12") {
    c = moving_base();
  } else if (name == "fig13") {
    c = moving_base();
    c.grid.angle_step_deg = 0.2;
    c.targets = {TargetSpec{-1.1, 62.5, 1e4, cxd(1, 0)},
                 TargetSpec{0.1, 72.5, 1e4, cxd(1, 0)},
                 TargetSpec{1.1, 82.5, 1e4, cxd(1, 0)}};
    c.trials = 1;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  c.name = name;
  c.output_dir = "out/" + name;
  return c;
}

std::vector<std::string> preset_names() {
  return {"fig2", "fig4", "fig6", "fig7", "fig9", "fig12", "fig13"};
}

// ----------------------------------------------------------------------
// Parallel execution
// ----------------------------------------------------------------------

int worker_count() {
  if (const char* env = std::getenv("CSRADAR_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

void parallel_for(int count, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= count) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ----------------------------------------------------------------------
// Scenario execution
// ----------------------------------------------------------------------

namespace {

struct TrialOutput {
  TrialRecord record;
  CxVector estimate;
};

std::vector<MeasurementMatrix> draw_measurements(const ScenarioConfig& c,
                                                 const WaveformMatrix& wf,
                                                 std::uint64_t seed) {
  const int count = c.measurement.fresh_per_pulse
                        ? c.num_receive * c.radar.num_pulses
                        : c.num_receive;
  std::vector<MeasurementMatrix> mms;
  mms.reserve(count);
  for (int i = 0; i < count; ++i) {
    mms.push_back(generate_measurement_matrix(
        c.measurement.kind, c.measurement.per_node, c.radar.snapshots_per_pulse,
        &wf, c.measurement.orthonormal_rows, mix_seed(seed, 900 + i)));
  }
  return mms;
}

bool peaks_match(const std::vector<int>& peaks, const std::set<int>& truth) {
  if (peaks.size() != truth.size()) return false;
  return std::set<int>(peaks.begin(), peaks.end()) == truth;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config) {
  config.validate();

  ScenarioResult result;
  result.config = config;
  result.scenario_hash = hex64(fnv1a(config_to_json(config).dump()));
  result.grid = config.make_grid();

  const std::vector<Target> targets = config.make_targets();
  const std::optional<Jammer> jammer = config.make_jammer();
  const GroundTruthVector truth =
      ground_truth_vector(config.radar, targets, result.grid);
  result.truth_support = truth.support;
  const std::set<int> truth_set(truth.support.begin(), truth.support.end());

  // Jammer grid cell (only when it actually falls on the grid).
  if (jammer) {
    const int idx = result.grid.nearest_index(jammer->azimuth_rad, 0.0);
    const GridPoint& gp = result.grid.points[idx];
    const double da = std::abs(gp.azimuth_rad - jammer->azimuth_rad);
    const double db = std::abs(gp.doppler_hz - 0.0);
    const double tol_a = result.grid.angle_step_rad / 2 + 1e-12;
    const double tol_b = result.grid.doppler_step_hz > 0
                             ? result.grid.doppler_step_hz / 2 + 1e-9
                             : 1e-9;
    if (da <= tol_a && db <= tol_b) result.jammer_index = idx;
  }

  const NodePlacement shared_placement = sample_node_placement(
      config.radar, config.num_transmit, config.num_receive,
      mix_seed(config.seed, 7));

  const bool run_mf =
      std::find(config.baselines.begin(), config.baselines.end(),
                "matched_filter") != config.baselines.end();

  std::vector<TrialOutput> outputs(config.trials);
  std::mutex trial0_mutex;

  auto run_trial = [&](int trial) {
    const auto t_start = std::chrono::steady_clock::now();
    const std::uint64_t ts = mix_seed(config.seed, 1000003ULL + trial);

    const NodePlacement placement =
        config.redraw_placement_per_trial
            ? sample_node_placement(config.radar, config.num_transmit,
                                    config.num_receive, mix_seed(ts, 101))
            : shared_placement;
    const WaveformMatrix wf =
        generate_qpsk(config.radar.snapshots_per_pulse, config.num_transmit,
                      config.waveform_mode, mix_seed(ts, 1));
    const std::vector<MeasurementMatrix> mms = draw_measurements(config, wf, ts);
    std::optional<JammerWaveform> jw;
    if (jammer) {
      jw = generate_jammer_waveform(config.radar.snapshots_per_pulse,
                                    config.radar.num_pulses, mix_seed(ts, 3));
    }

    std::vector<ReceivedPulse> pulses;
    pulses.reserve(config.num_receive * config.radar.num_pulses);
    for (int l = 0; l < config.num_receive; ++l) {
      for (int m = 1; m <= config.radar.num_pulses; ++m) {
        pulses.push_back(synthesize_received(
            config.radar, placement, targets, jammer ? &*jammer : nullptr, wf,
            jw ? &*jw : nullptr, config.noise_variance(), l, m,
            mix_seed(ts, 10000ULL + l * config.radar.num_pulses + m)));
      }
    }

    const SensingProblem problem =
        config.measurement.fresh_per_pulse
            ? build_sensing_problem_per_pulse(config.radar, placement, wf,
                                              result.grid, mms, pulses)
            : build_sensing_problem(config.radar, placement, wf, result.grid,
                                    mms, pulses);

    DantzigConfig dc;
    dc.mu_policy = config.solver.mu_policy;
    dc.mu = config.mu_internal();
    dc.t_scalar = config.solver.t_scalar;
    dc.noise_variance_effective = config.noise_variance_effective();
    dc.feasibility_tol = config.solver.feasibility_tol;
    dc.duality_gap_tol = config.solver.duality_gap_tol;
    dc.max_iterations = config.solver.max_iterations;

    const RecoveryResult rec = solve_dantzig(problem, dc);

    TrialOutput& out = outputs[trial];
    out.estimate = rec.estimate;
    out.record.trial = trial;
    out.record.seed = ts;
    out.record.metrics = compute_trial_metrics(
        rec.estimate, truth.support, result.jammer_index,
        config.solver.detection_threshold);
    out.record.residual_inf_norm = rec.residual_inf_norm;
    out.record.status = rec.status;
    out.record.iterations = rec.iterations;
    out.record.mu_used = rec.mu_used;
    out.record.cs_peaks_correct = peaks_match(
        top_peaks(rec.estimate.cwiseAbs(), static_cast<int>(targets.size())),
        truth_set);

    if (run_mf) {
      const SpectrumEstimate mf =
          matched_filter(pulses, placement, wf, result.grid, config.radar);
      out.record.mf_peaks_correct = peaks_match(
          top_peaks(mf.values, static_cast<int>(targets.size())), truth_set);
    }

    if (trial == 0) {
      std::lock_guard<std::mutex> lock(trial0_mutex);
      result.trial0_estimate_abs = rec.estimate.cwiseAbs();
      for (const std::string& b : config.baselines) {
        if (b == "matched_filter") {
          result.trial0_spectra["matched_filter"] =
              matched_filter(pulses, placement, wf, result.grid, config.radar)
                  .values;
        } else {
          const SpectrumMethod method =
              b == "capon" ? SpectrumMethod::capon : SpectrumMethod::music;
          result.trial0_spectra[b] =
              covariance_spectrum(pulses, placement, wf, result.grid,
                                  config.radar, method,
                                  static_cast<int>(targets.size()))
                  .values;
        }
      }
    }

    const auto t_end = std::chrono::steady_clock::now();
    out.record.wall_ms =
        std::chrono::duration<double, std::milli>(t_end - t_start).count();
  };

  parallel_for(config.trials, run_trial);

  result.records.reserve(outputs.size());
  for (auto& out : outputs) result.records.push_back(std::move(out.record));
  if (config.trials == 0) {
    result.trial0_estimate_abs = RealVector::Zero(result.grid.size());
  }
  return result;
}

// ----------------------------------------------------------------------
// Summaries and emission
// ----------------------------------------------------------------------

namespace {

double finite_mean(const std::vector<double>& values) {
  double sum = 0.0;
  int count = 0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++count;
    }
  }
  return count > 0 ? sum / count : 0.0;
}

double median_with_inf(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

json json_double(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

}  // namespace

nlohmann::json summary_json(const ScenarioResult& result) {
  std::vector<double> prr_pool, pjr_pool, mse_pool, pfa_pool;
  int cs_correct = 0, mf_correct = 0, optimal = 0;
  double iter_sum = 0.0;
  for (const TrialRecord& r : result.records) {
    for (double v : r.metrics.prr_per_target) prr_pool.push_back(v);
    pjr_pool.push_back(r.metrics.pjr);
    mse_pool.push_back(r.metrics.mse);
    pfa_pool.push_back(r.metrics.pfa);
    cs_correct += r.cs_peaks_correct ? 1 : 0;
    mf_correct += r.mf_peaks_correct ? 1 : 0;
    optimal += r.status == SolveStatus::optimal ? 1 : 0;
    iter_sum += r.iterations;
  }
  const int trials = static_cast<int>(result.records.size());

  json j;
  j["config"] = config_to_json(result.config);
  j["scenario_hash"] = result.scenario_hash;
  j["grid_size"] = result.grid.size();
  j["truth_support"] = result.truth_support;
  j["jammer_index"] =
      result.jammer_index ? json(*result.jammer_index) : json(nullptr);
  json agg;
  agg["trials"] = trials;
  agg["cs_peak_success_rate"] =
      trials > 0 ? static_cast<double>(cs_correct) / trials : 0.0;
  if (std::find(result.config.baselines.begin(), result.config.baselines.end(),
                "matched_filter") != result.config.baselines.end()) {
    agg["mf_peak_success_rate"] =
        trials > 0 ? static_cast<double>(mf_correct) / trials : 0.0;
  }
  agg["optimal_fraction"] =
      trials > 0 ? static_cast<double>(optimal) / trials : 0.0;
  agg["mean_iterations"] = trials > 0 ? iter_sum / trials : 0.0;
  agg["prr_median"] = json_double(median_with_inf(prr_pool));
  agg["prr_finite_mean"] = finite_mean(prr_pool);
  agg["pjr_median"] = json_double(median_with_inf(pjr_pool));
  agg["pjr_finite_mean"] = finite_mean(pjr_pool);
  agg["mse_mean"] = finite_mean(mse_pool);
  agg["pfa_mean"] = finite_mean(pfa_pool);
  j["aggregates"] = agg;
  return j;
}

std::vector<std::string> emit_results(const ScenarioResult& result) {
  namespace fs = std::filesystem;
  const fs::path dir(result.config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output dir: " + dir.string());

  std::vector<std::string> written;
  const std::size_t num_targets = result.config.targets.size();

  {
    const fs::path path = dir / "trials.csv";
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << "trial,seed";
    for (std::size_t k = 1; k <= num_targets; ++k) os << ",prr_" << k;
    os << ",pjr,mse,pfa,residual_inf_norm,status,wall_ms\n";
    for (const TrialRecord& r : result.records) {
      os << r.trial << "," << r.seed;
      for (std::size_t k = 0; k < num_targets; ++k) {
        os << ",";
        write_double(os, k < r.metrics.prr_per_target.size()
                             ? r.metrics.prr_per_target[k]
                             : 0.0);
      }
      os << ",";
      write_double(os, r.metrics.pjr);
      os << ",";
      write_double(os, r.metrics.mse);
      os << ",";
      write_double(os, r.metrics.pfa);
      os << ",";
      write_double(os, r.residual_inf_norm);
      os << "," << status_name(r.status) << ",";
      write_double(os, r.wall_ms);
      os << "\n";
    }
    written.push_back(path.string());
  }

  {
    const fs::path path = dir / "summary.json";
    std::ofstream os(path);
    os << summary_json(result).dump(2) << "\n";
    written.push_back(path.string());
  }

  auto write_cdf = [&](const std::string& file, std::vector<double> pool) {
    if (pool.empty()) return;
    const fs::path path = dir / file;
    std::ofstream os(path);
    const EmpiricalCdf cdf = empirical_cdf(pool);
    const std::size_t n = cdf.sorted_values.size();
    os << "value,cumulative_probability\n";
    for (std::size_t i = 0; i < n; ++i) {
      write_double(os, cdf.sorted_values[i]);
      os << ",";
      write_double(os, static_cast<double>(i + 1) / n);
      os << "\n";
    }
    written.push_back(path.string());
  };

  std::vector<double> prr_pool, pjr_pool;
  for (const TrialRecord& r : result.records) {
    for (double v : r.metrics.prr_per_target) prr_pool.push_back(v);
    if (result.jammer_index) pjr_pool.push_back(r.metrics.pjr);
  }
  write_cdf("prr_cdf.csv", std::move(prr_pool));
  write_cdf("pjr_cdf.csv", std::move(pjr_pool));

  auto write_spectrum = [&](const std::string& file, const RealVector& values) {
    if (values.size() != result.grid.size()) return;
    const fs::path path = dir / file;
    std::ofstream os(path);
    os << "angle_deg,doppler_mps,magnitude\n";
    const double f = result.config.radar.carrier_freq_hz;
    for (int n = 0; n < result.grid.size(); ++n) {
      const GridPoint& gp = result.grid.points[n];
      write_double(os, rad_to_deg(gp.azimuth_rad));
      os << ",";
      write_double(os, gp.doppler_hz * kSpeedOfLight / (2.0 * f));
      os << ",";
      write_double(os, values(n));
      os << "\n";
    }
    written.push_back(path.string());
  };

  if (result.trial0_estimate_abs.size() == result.grid.size()) {
    write_spectrum("spectrum_cs.csv", result.trial0_estimate_abs);
  }
  for (const auto& [name, values] : result.trial0_spectra) {
    write_spectrum("spectrum_" + name + ".csv", values);
  }
  return written;
}

// ----------------------------------------------------------------------
// Appendix correlation studies
// ----------------------------------------------------------------------

namespace {

CxMatrix stack_columns(const RadarParams& params, const NodePlacement& placement,
                       const WaveformMatrix& wf, const MeasurementMatrix& mm,
                       const AngleDopplerGrid& grid) {
  const int n_r = placement.num_receive();
  const int n_p = params.num_pulses;
  const int M = mm.rows();
  CxMatrix stacked(static_cast<Eigen::Index>(M) * n_r * n_p, grid.size());
  for (int l = 0; l < n_r; ++l) {
    for (int m = 1; m <= n_p; ++m) {
      stacked.middleRows((static_cast<Eigen::Index>(l) * n_p + (m - 1)) * M, M) =
          mm.matrix * basis_matrix(placement, params, wf, grid, l, m);
    }
  }
  return stacked;
}

}  // namespace

CorrelationSweep receive_correlation_study(const RadarParams& params, int m_t,
                                           int M, double angle_a_rad,
                                           double angle_b_rad,
                                           std::span<const int> nr_values,
                                           int seeds, std::uint64_t base_seed) {
  AngleDopplerGrid grid;
  grid.points = {{angle_a_rad, 0.0}, {angle_b_rad, 0.0}};
  RadarParams p = params;
  p.num_pulses = 1;

  CorrelationSweep sweep;
  for (std::size_t vi = 0; vi < nr_values.size(); ++vi) {
    const int n_r = nr_values[vi];
    std::vector<double> corr(seeds);
    parallel_for(seeds, [&](int s) {
      const std::uint64_t ts = mix_seed(base_seed, (vi << 24) + s);
      const NodePlacement placement =
          sample_node_placement(p, m_t, n_r, mix_seed(ts, 0));
      const WaveformMatrix wf = generate_qpsk(
          p.snapshots_per_pulse, m_t, WaveformNormalization::raw_qpsk,
          mix_seed(ts, 1));
      const MeasurementMatrix mm = generate_measurement_matrix(
          MeasurementKind::gaussian, M, p.snapshots_per_pulse, &wf, false,
          mix_seed(ts, 2));
      const CxMatrix cols = stack_columns(p, placement, wf, mm, grid);
      corr[s] = normalized_column_correlation(cols, 0, 1);
    });
    double mean = 0.0;
    for (double v : corr) mean += v;
    sweep.sweep_values.push_back(n_r);
    sweep.mean_correlation.push_back(mean / seeds);
  }
  return sweep;
}

CorrelationSweep transmit_correlation_study(const RadarParams& params, int M,
                                            double angle_a_rad,
                                            double angle_b_rad,
                                            std::span<const int> mt_values,
                                            int seeds, std::uint64_t base_seed) {
  AngleDopplerGrid grid;
  grid.points = {{angle_a_rad, 0.0}, {angle_b_rad, 0.0}};
  RadarParams p = params;
  p.num_pulses = 1;

  CorrelationSweep sweep;
  for (std::size_t vi = 0; vi < mt_values.size(); ++vi) {
    const int m_t = mt_values[vi];
    std::vector<double> corr(seeds);
    parallel_for(seeds, [&](int s) {
      const std::uint64_t ts = mix_seed(base_seed, (vi << 24) + 7919 + s);
      const NodePlacement placement =
          sample_node_placement(p, m_t, 1, mix_seed(ts, 0));
      const WaveformMatrix wf = generate_qpsk(
          p.snapshots_per_pulse, m_t, WaveformNormalization::raw_qpsk,
          mix_seed(ts, 1));
      const MeasurementMatrix mm = generate_measurement_matrix(
          MeasurementKind::gaussian, M, p.snapshots_per_pulse, &wf, false,
          mix_seed(ts, 2));
      const CxMatrix cols = stack_columns(p, placement, wf, mm, grid);
      corr[s] = normalized_column_correlation(cols, 0, 1);
    });
    double mean = 0.0;
    for (double v : corr) mean += v;
    sweep.sweep_values.push_back(m_t);
    sweep.mean_correlation.push_back(mean / seeds);
  }
  return sweep;
}

CorrelationSweep pulse_ratio_study(const RadarParams& params, int m_t, int M,
                                   double doppler_a_hz, double doppler_b_hz,
                                   std::span<const int> np_values, int seeds,
                                   std::uint64_t base_seed) {
  AngleDopplerGrid grid;
  grid.points = {{0.0, doppler_a_hz}, {0.0, doppler_b_hz}};

  CorrelationSweep sweep;
  for (std::size_t vi = 0; vi < np_values.size(); ++vi) {
    RadarParams p = params;
    p.num_pulses = np_values[vi];
    std::vector<double> ratio(seeds);
    parallel_for(seeds, [&](int s) {
      const std::uint64_t ts = mix_seed(base_seed, (vi << 24) + 104729 + s);
      const NodePlacement placement =
          sample_node_placement(p, m_t, 1, mix_seed(ts, 0));
      const WaveformMatrix wf = generate_qpsk(
          p.snapshots_per_pulse, m_t, WaveformNormalization::raw_qpsk,
          mix_seed(ts, 1));
      const MeasurementMatrix mm = generate_measurement_matrix(
          MeasurementKind::gaussian, M, p.snapshots_per_pulse, &wf, false,
          mix_seed(ts, 2));
      const CxMatrix cols = stack_columns(p, placement, wf, mm, grid);
      const double auto_corr = column_correlation(cols, 0, 0);
      const double cross = column_correlation(cols, 0, 1);
      ratio[s] = cross > 1e-300 ? auto_corr / cross
                                : std::numeric_limits<double>::infinity();
    });
    double mean = 0.0;
    for (double v : ratio) mean += v;
    sweep.sweep_values.push_back(np_values[vi]);
    sweep.mean_correlation.push_back(mean / seeds);
  }
  return sweep;
}

}  // namespace csradar
