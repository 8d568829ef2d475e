#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "crowdsim/geometry.hpp"
#include "crowdsim/measures.hpp"
#include "crowdsim/velocity.hpp"

namespace crowdsim {

struct StepConfig {
  double dt = 0.05;
  double cfl = 0.9;
  double t_end = 15.0;
  /// Fixed macro substep count; derived from the CFL condition when empty.
  std::optional<std::size_t> macro_substeps;

  void validate() const;
};

/// Explicit Euler along characteristics, then x wrap/removal, wall reflection
/// and mirroring out of obstacles. Throws SimulationError when an agent cannot
/// be returned to the walkable region.
std::array<MicroMeasure, 2> micro_step(const TwoScaleState& state, const VelocityField& velocities,
                                       const Domain& domain, double dt);

/// Single-agent move used by micro_step; returns nullopt when the agent leaves
/// through an open x boundary.
std::optional<Vec2> advance_position(Vec2 p, Vec2 v, const Domain& domain, double dt);

/// Outgoing face-velocity sum per unit length that bounds a stable macro step:
/// dt <= cfl * h / rate.
double macro_outflow_rate(const MacroField& field, const std::vector<Vec2>& cell_velocities,
                          const Domain& domain);

/// First-order upwind finite-volume update of rho phi h^2 with face-averaged
/// normal velocities. Faces touching phi = 0 cells and the y walls carry no
/// flux; x faces are periodic or outflow-only. Substeps internally so that each
/// substep satisfies the CFL bound (or uses the fixed substep count).
MacroField macro_step(const MacroField& field, const std::vector<Vec2>& cell_velocities,
                      const Domain& domain, double dt, double cfl = 0.9,
                      std::optional<std::size_t> substeps = std::nullopt);

struct StepDiagnostics {
  double t = 0.0;
  std::array<double, 2> mass{};
  double max_speed = 0.0;
  std::size_t fp_iterations = 0;
  double fp_residual = 0.0;
  bool unconverged = false;
  std::size_t capped = 0;
};

struct StepResult {
  TwoScaleState state;
  StepDiagnostics diagnostics;
};

/// Resolve velocities, move both subpopulations and transport both densities.
StepResult coupled_step(const TwoScaleState& state, const VelocityModel& model, const Domain& domain,
                        const StepConfig& config);

/// Smooth scalar test field with analytic gradient.
struct TestField {
  std::string name;
  std::function<double(Vec2)> value;
  std::function<Vec2(Vec2)> gradient;
};

/// Named fields: linear_x, linear_y, quadratic, bump, trig. The corridor size
/// sets the bump centre and the trig periods. Throws ValidationError for unknown names.
TestField make_test_field(const std::string& name, double length, double width);
std::vector<std::string> test_field_names();

/// Central difference of t -> integral of psi against mu^i minus the integral
/// of v . grad psi against mu^i, for every interior sample of a uniformly
/// spaced trajectory. Velocities are recomputed from each state.
std::vector<double> weak_form_residual(const std::vector<TwoScaleState>& trajectory,
                                       const TestField& psi, std::size_t pop,
                                       const VelocityModel& model, const Domain& domain);

}  // namespace crowdsim
