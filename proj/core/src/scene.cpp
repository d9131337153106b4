#include "csradar/scene.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace csradar {

void RadarParams::validate() const {
  if (carrier_freq_hz <= 0) throw std::invalid_argument("carrier_freq_hz must be positive");
  if (sample_period_s <= 0) throw std::invalid_argument("sample_period_s must be positive");
  if (pulse_repetition_s <= 0) throw std::invalid_argument("pulse_repetition_s must be positive");
  if (snapshots_per_pulse < 1) throw std::invalid_argument("snapshots_per_pulse must be >= 1");
  if (num_pulses < 1) throw std::invalid_argument("num_pulses must be >= 1");
  if (disk_radius_m < 0) throw std::invalid_argument("disk_radius_m must be nonnegative");
  if (static_cast<double>(snapshots_per_pulse) * sample_period_s >
      pulse_repetition_s * (1.0 + 1e-12)) {
    throw std::invalid_argument("L * T_s exceeds the pulse repetition interval");
  }
}

NodePlacement sample_node_placement(const RadarParams& params, int m_t,
                                    int n_r, std::uint64_t seed) {
  if (m_t < 1) throw std::invalid_argument("m_t must be >= 1");
  if (n_r < 1) throw std::invalid_argument("n_r must be >= 1");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  auto draw = [&](int count) {
    std::vector<PolarNode> nodes(count);
    for (auto& node : nodes) {
      // density 2*rho/r^2 on [0, r] via inverse CDF
      node.radius_m = params.disk_radius_m * std::sqrt(unif(rng));
      node.angle_rad = -kPi + 2.0 * kPi * unif(rng);
    }
    return nodes;
  };

  NodePlacement placement;
  placement.transmit = draw(m_t);
  placement.receive = draw(n_r);
  return placement;
}

double eta(const PolarNode& node, double azimuth_rad) {
  return node.radius_m * std::cos(azimuth_rad - node.angle_rad);
}

CxVector steering_vector(const NodePlacement& placement,
                         const RadarParams& params, double azimuth_rad) {
  const double scale = 2.0 * kPi / params.wavelength_m();
  CxVector v(placement.num_transmit());
  for (int i = 0; i < placement.num_transmit(); ++i) {
    v(i) = std::polar(1.0, scale * eta(placement.transmit[i], azimuth_rad));
  }
  return v;
}

void validate_target(const RadarParams& params, const Target& target,
                     const SceneLimits& limits) {
  if (target.initial_range_m <= 0) {
    throw std::invalid_argument("target initial_range_m must be positive");
  }
  if (params.disk_radius_m > 0 &&
      target.initial_range_m < limits.far_field_ratio * params.disk_radius_m) {
    throw std::invalid_argument(
        "far-field assumption violated: range " +
        std::to_string(target.initial_range_m) + " m < " +
        std::to_string(limits.far_field_ratio) + " x disk radius");
  }
  const double fk_ts =
      std::abs(target.doppler_hz(params)) * params.sample_period_s;
  if (fk_ts >= limits.max_doppler_sample_prod) {
    throw std::invalid_argument(
        "slow-target assumption violated: f_k*T_s = " + std::to_string(fk_ts));
  }
}

void validate_placement(const RadarParams& params,
                        const NodePlacement& placement) {
  auto check = [&](const std::vector<PolarNode>& nodes, const char* label) {
    for (const auto& node : nodes) {
      if (node.radius_m < 0 || node.radius_m > params.disk_radius_m * (1 + 1e-12)) {
        throw std::invalid_argument(std::string(label) + " node radius outside disk");
      }
      if (node.angle_rad < -kPi || node.angle_rad >= kPi) {
        throw std::invalid_argument(std::string(label) + " node angle outside [-pi, pi)");
      }
    }
  };
  check(placement.transmit, "transmit");
  check(placement.receive, "receive");
  if (placement.transmit.empty() || placement.receive.empty()) {
    throw std::invalid_argument("placement needs at least one node per side");
  }
}

}  // namespace csradar
