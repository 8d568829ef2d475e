#include "crowdsim/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace crowdsim {

std::vector<std::string> KernelParams::check(double corridor_length, double max_radius_fraction) const {
  std::vector<std::string> problems;
  if (!(F_opp >= 0.0)) problems.emplace_back("kernels: F_opp must be >= 0");
  if (!(F_own >= 0.0)) problems.emplace_back("kernels: F_own must be >= 0");
  if (!(F_w >= 0.0)) problems.emplace_back("kernels: F_w must be >= 0");
  if (!(R_r_own > 0.0 && R_r_own < R_a_own)) {
    problems.push_back(fmt::format("kernels: require 0 < R_r_own < R_a_own (got R_r_own={}, R_a_own={})",
                                   R_r_own, R_a_own));
  }
  if (!(R_r_opp > 0.0)) problems.push_back(fmt::format("kernels: require 0 < R_r_opp (got {})", R_r_opp));
  if (!(R_w > 0.0)) problems.push_back(fmt::format("kernels: require 0 < R_w (got {})", R_w));
  if (!(sigma >= 0.0 && sigma <= 1.0)) problems.push_back(fmt::format("kernels: sigma must lie in [0,1] (got {})", sigma));
  if (max_radius_fraction > 0.0 && interaction_range() > max_radius_fraction * corridor_length) {
    problems.push_back(fmt::format("kernels: require max(R_a_own, R_r_opp) <= {} L (got {} with L={})",
                                   max_radius_fraction, interaction_range(), corridor_length));
  }
  return problems;
}

double f_opp(double s, const KernelParams& p) {
  if (!(s > 0.0)) throw std::domain_error(fmt::format("f_opp: distance must be positive (got {})", s));
  if (s > p.R_r_opp) return 0.0;
  return -p.F_opp * (1.0 / (s * s) - 1.0 / (p.R_r_opp * p.R_r_opp));
}

double f_own(double s, const KernelParams& p) {
  if (!(s > 0.0)) throw std::domain_error(fmt::format("f_own: distance must be positive (got {})", s));
  if (s > p.R_a_own) return 0.0;
  return -p.F_own * (1.0 / s - 1.0 / p.R_r_own) * (1.0 / s - 1.0 / p.R_a_own);
}

double g_aniso(double alpha, const KernelParams& p) {
  const double a = std::remainder(alpha, 2.0 * std::numbers::pi);
  return p.sigma + (1.0 - p.sigma) * 0.5 * (1.0 + std::cos(a));
}

double f_wall(double s, const KernelParams& p) {
  if (!(s > 0.0)) s = 1e-3 * p.R_w;
  if (s > p.R_w) return 0.0;
  return -p.F_w * (1.0 / (s * s) - 1.0 / (p.R_w * p.R_w));
}

}  // namespace crowdsim
