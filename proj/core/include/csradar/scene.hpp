#pragma once

#include <cstdint>
#include <vector>

#include "csradar/types.hpp"

namespace csradar {

/// Carrier, timing and geometry parameters shared by every module.
struct RadarParams {
  double carrier_freq_hz = 5e9;        // f
  double sample_period_s = 5e-8;       // T_s (20 MHz sampling)
  double pulse_repetition_s = 2.5e-4;  // T
  int snapshots_per_pulse = 512;       // L
  int num_pulses = 1;                  // N_p
  double disk_radius_m = 10.0;         // r

  double wavelength_m() const { return kSpeedOfLight / carrier_freq_hz; }

  /// Throws std::invalid_argument when a field is out of range or the
  /// L samples do not fit inside one pulse repetition interval.
  void validate() const;
};

struct PolarNode {
  double radius_m = 0.0;
  double angle_rad = 0.0;
};

struct NodePlacement {
  std::vector<PolarNode> transmit;
  std::vector<PolarNode> receive;

  int num_transmit() const { return static_cast<int>(transmit.size()); }
  int num_receive() const { return static_cast<int>(receive.size()); }
};

struct Target {
  double azimuth_rad = 0.0;
  double radial_speed_mps = 0.0;
  double initial_range_m = 1e4;  // d_k(0)
  cxd reflectivity{1.0, 0.0};    // beta_k

  double doppler_hz(const RadarParams& p) const {
    return 2.0 * radial_speed_mps * p.carrier_freq_hz / kSpeedOfLight;
  }
};

struct Jammer {
  double azimuth_rad = 0.0;
  double range_m = 1e4;
  double amplitude = 0.0;  // beta, sqrt of jammer power per pulse
};

/// Validation thresholds for the far-field and slow-target assumptions.
struct SceneLimits {
  double far_field_ratio = 100.0;       // d_k(0) / disk radius
  double max_doppler_sample_prod = 0.01;  // f_k * T_s
};

/// Draws m_t transmit and n_r receive nodes uniformly on the disk:
/// radius density 2*rho/r^2 (inverse CDF rho = r*sqrt(u)), angle uniform
/// on [-pi, pi). Deterministic for a fixed seed.
NodePlacement sample_node_placement(const RadarParams& params, int m_t,
                                    int n_r, std::uint64_t seed);

/// Projection of a node onto the direction theta: r_i * cos(theta - alpha_i).
double eta(const PolarNode& node, double azimuth_rad);

/// Transmit steering vector v(theta), element i = exp(j*2pi/lambda * eta_i^t).
CxVector steering_vector(const NodePlacement& placement,
                         const RadarParams& params, double azimuth_rad);

/// Checks far-field and slow-target assumptions for one target; throws
/// std::invalid_argument with a descriptive message on violation.
void validate_target(const RadarParams& params, const Target& target,
                     const SceneLimits& limits = {});

void validate_placement(const RadarParams& params,
                        const NodePlacement& placement);

}  // namespace csradar
