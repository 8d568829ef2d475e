#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "crowdsim/geometry.hpp"
#include "crowdsim/kernels.hpp"
#include "crowdsim/measures.hpp"
#include "crowdsim/vec2.hpp"

namespace crowdsim {

/// How the interaction term sees the other pedestrians.
enum class Variant {
  explicit_,         ///< current distance, angle against the desired velocity
  actual_angle,      ///< current distance, angle against the actual velocity
  predict_fixed,     ///< distance extrapolated over a fixed horizon dt_pred
  predict_interval,  ///< kernel averaged over extrapolated distances on [0, dt_max]
  predict_weighted,  ///< as predict_interval, integrand weighted by weight_fn
};

struct WeightFunction {
  enum class Kind { constant, linear_decay, exponential_decay };
  Kind kind = Kind::constant;
  double rate = 1.0;  // exponential_decay only, 1/s

  /// Weight in [0,1] for look-ahead time tau in [0, horizon].
  double operator()(double tau, double horizon) const;
};

struct VelocityModel {
  std::array<Vec2, 2> v_des{Vec2{1.34, 0.0}, Vec2{-1.34, 0.0}};
  KernelParams kernels;
  Variant variant = Variant::explicit_;
  double dt_pred = 0.5;
  double dt_max = 1.0;
  WeightFunction weight_fn;
  std::size_t quadrature_nodes = 16;
  double fp_tol = 1e-8;
  std::size_t fp_max_iter = 50;
  /// Bound on the magnitude of the interaction contribution (m/s).
  double speed_cap = std::numeric_limits<double>::infinity();

  bool is_implicit() const { return variant != Variant::explicit_; }
  /// Largest look-ahead time used by the prediction variants, 0 otherwise.
  double horizon() const;
};

/// Per-agent and per-cell velocities for both subpopulations. Agent entries
/// follow the order of MicroMeasure::agents; cell entries are indexed by cell.
struct VelocityField {
  std::array<std::vector<Vec2>, 2> agents;
  std::array<std::vector<Vec2>, 2> cells;

  /// Every agent and every cell set to the desired velocity of its group.
  static VelocityField desired(const TwoScaleState& state, const VelocityModel& model);
};

/// Evaluation point of the interaction term: position, the velocity currently
/// assigned there (used by the implicit variants), and whether the wall
/// repulsion applies.
struct Probe {
  Vec2 position;
  Vec2 velocity;
  bool wall = true;
};

/// Signed angle from reference_velocity to y - x in [-pi, pi]; 0 when the
/// reference velocity vanishes. Throws std::domain_error when y == x.
double alpha_angle(Vec2 x, Vec2 y, Vec2 reference_velocity);

/// |(y + vy tau) - (x + vx tau)|.
double predicted_kernel_arg(Vec2 x, Vec2 y, Vec2 vx, Vec2 vy, double tau);

using Kernel = std::function<double(double)>;

/// (1/dt_max) int_0^dt_max f(predicted distance) h(tau) dtau by the composite
/// midpoint rule. h is weight_fn for Variant::predict_weighted and 1 otherwise.
double interval_averaged_kernel(const Kernel& f, Vec2 x, Vec2 y, Vec2 vx, Vec2 vy,
                                const VelocityModel& model);

/// Unweighted pieces of the interaction velocity at one probe.
struct InteractionParts {
  Vec2 own_micro;
  Vec2 own_macro;
  Vec2 opp_micro;
  Vec2 opp_macro;
  Vec2 wall;
};

enum class NeighborSearch { direct, cell_list };

/// Evaluates the interaction velocity of one subpopulation at arbitrary points
/// for a fixed state. With NeighborSearch::cell_list agents are binned and
/// macro cells are restricted to a window around the probe; the accumulation
/// order (agent index, then cell index) is the same as the direct sum.
class InteractionEvaluator {
 public:
  InteractionEvaluator(const TwoScaleState& state, const Domain& domain, const VelocityModel& model,
                       const VelocityField* guess, NeighborSearch search = NeighborSearch::cell_list);

  InteractionParts parts(std::size_t pop, const Probe& probe) const;

  /// theta-weighted combination of the parts plus wall term, clamped to speed_cap.
  Vec2 evaluate(std::size_t pop, const Probe& probe, bool* capped = nullptr) const;

 private:
  struct Bins {
    std::size_t nbx = 1, nby = 1;
    double wx = 1.0, wy = 1.0;
    std::vector<std::vector<std::size_t>> members;
  };

  Vec2 micro_sum(std::size_t pop, std::size_t source, const Probe& probe) const;
  Vec2 macro_integral(std::size_t pop, std::size_t source, const Probe& probe) const;
  Vec2 pair_term(std::size_t pop, std::size_t source, Vec2 d, Vec2 vx, Vec2 vy) const;
  std::vector<std::size_t> candidates(std::size_t source, Vec2 x) const;

  const TwoScaleState& state_;
  const Domain& domain_;
  const VelocityModel& model_;
  const VelocityField* guess_;
  NeighborSearch search_;
  double cutoff_ = 0.0;
  std::array<Bins, 2> bins_;
};

/// Interaction velocity at probe.position by direct summation. Throws
/// ContractViolation when an implicit variant is used without a guess.
Vec2 interaction_velocity(const Probe& probe, std::size_t pop, const TwoScaleState& state,
                          const Domain& domain, const VelocityModel& model,
                          const VelocityField* guess);

struct VelocitySolution {
  VelocityField field;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = true;
  std::size_t capped = 0;  // evaluations where speed_cap was active
};

/// One application of v -> v_des + interaction(v) at every agent and at every
/// open cell of populations carrying macro mass.
VelocitySolution apply_velocity_map(const TwoScaleState& state, const Domain& domain,
                                    const VelocityModel& model, const VelocityField* guess,
                                    NeighborSearch search = NeighborSearch::cell_list);

/// Picard iteration from v = v_des until the max-norm update drops below
/// fp_tol or fp_max_iter is reached (then flagged unconverged).
VelocitySolution solve_implicit_velocity(const TwoScaleState& state, const Domain& domain,
                                         const VelocityModel& model);

/// Explicit variant: a single map application; implicit variants: Picard iteration.
VelocitySolution resolve_velocities(const TwoScaleState& state, const Domain& domain,
                                    const VelocityModel& model);

}  // namespace crowdsim
