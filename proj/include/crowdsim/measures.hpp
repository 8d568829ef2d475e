#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "crowdsim/geometry.hpp"
#include "crowdsim/vec2.hpp"

namespace crowdsim {

using AgentId = std::uint32_t;

struct Agent {
  AgentId id = 0;
  Vec2 position;
};

/// Counting measure sum_k delta_{p_k}. Agents are kept in ascending id order,
/// which is also the accumulation order for every sum over them.
struct MicroMeasure {
  std::vector<Agent> agents;

  std::size_t size() const { return agents.size(); }
  bool empty() const { return agents.empty(); }
};

/// Half-open box [x0,x1) x [y0,y1).
struct Box {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  bool contains(Vec2 p) const { return p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1; }
};

/// Number of agents inside a half-open box; disjoint tilings partition the count.
std::size_t micro_mass_in(const MicroMeasure& m, const Box& box);

/// Cell-averaged density rho with respect to the porosity measure. The density
/// with respect to area is rho_hat = rho * phi.
class MacroField {
 public:
  explicit MacroField(std::shared_ptr<const PorosityGrid> grid);
  MacroField(std::shared_ptr<const PorosityGrid> grid, std::vector<double> rho);

  const PorosityGrid& grid() const { return *grid_; }
  const std::shared_ptr<const PorosityGrid>& grid_ptr() const { return grid_; }
  const std::vector<double>& rho() const { return rho_; }
  std::vector<double>& rho() { return rho_; }
  double rho(std::size_t cell) const { return rho_[cell]; }
  double rho_hat(std::size_t cell) const { return rho_[cell] * grid_->phi(cell); }
  /// rho phi h^2 for one cell.
  double cell_mass(std::size_t cell) const { return rho_hat(cell) * grid_->cell_area(); }

 private:
  std::shared_ptr<const PorosityGrid> grid_;
  std::vector<double> rho_;
};

/// Sum of rho phi h^2 over the given cells.
double macro_mass_in(const MacroField& field, const std::vector<std::size_t>& cells);
/// Sum of rho phi h^2 over the whole grid.
double macro_mass(const MacroField& field);

struct MacroInit {
  enum class Kind { none, constant, gaussian };
  Kind kind = Kind::none;
  double mass = 0.0;
  Box region;        // constant: support of the plateau
  Vec2 center;       // gaussian
  double spread = 1.0;  // gaussian standard deviation (m), truncated at 3 spread
};

/// Plateau or truncated Gaussian, masked by phi and rescaled to the requested mass.
MacroField make_macro_field(std::shared_ptr<const PorosityGrid> grid, const MacroInit& init);

struct Population {
  MicroMeasure micro;
  MacroField macro;
  double theta = 1.0;
};

/// mu^i = theta_i m^i + (1 - theta_i) M^i for the two subpopulations.
struct TwoScaleState {
  double time = 0.0;
  std::array<Population, 2> pops;

  explicit TwoScaleState(std::shared_ptr<const PorosityGrid> grid)
      : pops{Population{{}, MacroField(grid), 1.0}, Population{{}, MacroField(grid), 1.0}} {}

  const PorosityGrid& grid() const { return pops[0].macro.grid(); }
  std::size_t agent_count() const { return pops[0].micro.size() + pops[1].micro.size(); }
};

using ScalarField = std::function<double(Vec2)>;

/// theta_i sum_k psi(p_k) + (1-theta_i) sum_cells psi(center) rho phi h^2.
double integrate_test_function(const TwoScaleState& state, std::size_t pop, const ScalarField& psi);

/// theta_i N^i + (1 - theta_i) * macro mass.
double total_mass(const TwoScaleState& state, std::size_t pop);

/// theta = N / (N + macro mass), 1 when both vanish.
double auto_theta(std::size_t agents, double macro_mass);

/// Rows `t,agent_id,subpop,x,y` (no header); subpop is 1-based.
void write_trajectory_rows(std::ostream& out, const TwoScaleState& state);
/// Rows `t,i,j,rho` (no header).
void write_density_rows(std::ostream& out, double t, const MacroField& field);

}  // namespace crowdsim
