#pragma once

#include <functional>
#include <optional>

#include "csradar/sensing.hpp"
#include "csradar/types.hpp"

namespace csradar {

enum class MuPolicy { explicit_value, lower_bound_scaled };

struct DantzigConfig {
  MuPolicy mu_policy = MuPolicy::explicit_value;
  double mu = 0.0;        // used when mu_policy == explicit_value
  double t_scalar = 3.0;  // lower_bound_scaled: mu = (1 + 1/t) * lower bound
  /// Per-compressed-sample noise variance feeding the lower bound
  /// (thermal plus jammer-as-noise when present).
  double noise_variance_effective = 0.0;
  double feasibility_tol = 1e-7;
  double duality_gap_tol = 1e-7;
  int max_iterations = 200;
};

enum class SolveStatus { optimal, max_iter, infeasible };

struct RecoveryResult {
  CxVector estimate;             // s-hat over the grid
  double objective = 0.0;        // ||s-hat||_1
  double residual_inf_norm = 0.0;  // ||Theta^H (r - Theta s-hat)||_inf
  int iterations = 0;
  SolveStatus status = SolveStatus::optimal;
  double mu_used = 0.0;
  double duality_gap = 0.0;
};

struct MuBounds {
  double lower = 0.0;  // sqrt(2 ln N * sigma_tilde^2) * sigma_max
  double upper = 0.0;  // ||Theta^H r||_inf; zero estimate is optimal above it
};

/// Both bounds are always returned; lower may exceed upper at extreme noise.
MuBounds mu_bounds(const SensingProblem& problem,
                   double noise_variance_effective);

/// min ||s||_1  s.t.  ||Theta^H (r - Theta s)||_inf <= mu, solved as a
/// second-order cone program over the real/imaginary parts with one epigraph
/// cone per grid cell and one 2-ball cone per correlated-residual entry.
RecoveryResult solve_dantzig(const SensingProblem& problem,
                             const DantzigConfig& config);

/// Same solver on precomputed Gram data: gram = Theta^H Theta (Hermitian),
/// correlated = Theta^H r. Used by grid refinement and tests.
RecoveryResult solve_dantzig_gram(const CxMatrix& gram,
                                  const CxVector& correlated, double mu,
                                  const DantzigConfig& config);

struct RefineResult {
  RecoveryResult result;
  AngleDopplerGrid grid;
  bool detection = false;  // false when the coarse estimate was all zero
};

/// Coarse-to-fine refinement: keeps grid cells whose coarse |estimate|
/// exceeds candidate_fraction of the peak, builds a refined grid of step
/// coarse_step / refinement_factor covering +-window around each, rebuilds
/// the sensing problem through the callback and re-solves.
RefineResult refine_grid(
    const std::function<SensingProblem(const AngleDopplerGrid&)>& rebuild,
    const AngleDopplerGrid& initial_grid, const RecoveryResult& initial,
    int refinement_factor, double angle_window_rad, double doppler_window_hz,
    const DantzigConfig& config, double candidate_fraction = 0.1);

}  // namespace csradar
