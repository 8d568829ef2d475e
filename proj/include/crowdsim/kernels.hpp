#pragma once

#include <string>
#include <vector>

namespace crowdsim {

/// Amplitudes (m/s per unit mass) and radii (m) of the pairwise interaction kernels.
struct KernelParams {
  double F_opp = 0.3;
  double F_own = 0.3;
  double F_w = 0.5;
  double R_r_opp = 2.0;
  double R_r_own = 0.5;
  double R_a_own = 2.0;
  double R_w = 0.5;
  double sigma = 0.5;

  /// Largest radius over which two agents interact.
  double interaction_range() const { return R_a_own > R_r_opp ? R_a_own : R_r_opp; }

  /// Constraint violations, empty when valid. max(R_a_own, R_r_opp) must not
  /// exceed max_radius_fraction * corridor_length.
  std::vector<std::string> check(double corridor_length, double max_radius_fraction = 0.25) const;
};

/// Opposite-group repulsion: -F_opp (1/s^2 - 1/R_r_opp^2) on (0, R_r_opp], 0 beyond.
/// Throws std::domain_error for s <= 0.
double f_opp(double s, const KernelParams& p);

/// Own-group kernel: repulsive below R_r_own, attractive on (R_r_own, R_a_own), 0 beyond.
/// Throws std::domain_error for s <= 0.
double f_own(double s, const KernelParams& p);

/// Directional weight sigma + (1 - sigma)(1 + cos alpha)/2. Angles are wrapped into [-pi, pi].
double g_aniso(double alpha, const KernelParams& p);

/// Wall repulsion with the f_opp profile over radius R_w. Non-positive s is
/// clamped to 1e-3 R_w.
double f_wall(double s, const KernelParams& p);

}  // namespace crowdsim
