#include "crowdsim/measures.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "crowdsim/errors.hpp"

namespace crowdsim {

std::size_t micro_mass_in(const MicroMeasure& m, const Box& box) {
  return static_cast<std::size_t>(std::count_if(
      m.agents.begin(), m.agents.end(), [&](const Agent& a) { return box.contains(a.position); }));
}

MacroField::MacroField(std::shared_ptr<const PorosityGrid> grid)
    : grid_(std::move(grid)), rho_(grid_->cell_count(), 0.0) {}

MacroField::MacroField(std::shared_ptr<const PorosityGrid> grid, std::vector<double> rho)
    : grid_(std::move(grid)), rho_(std::move(rho)) {
  if (rho_.size() != grid_->cell_count()) throw ContractViolation("macro field size does not match grid");
  for (double r : rho_) {
    if (!(r >= 0.0)) throw ContractViolation("macro density must be non-negative");
  }
}

double macro_mass_in(const MacroField& field, const std::vector<std::size_t>& cells) {
  double sum = 0.0;
  for (auto c : cells) sum += field.cell_mass(c);
  return sum;
}

double macro_mass(const MacroField& field) {
  double sum = 0.0;
  for (std::size_t c = 0; c < field.grid().cell_count(); ++c) sum += field.cell_mass(c);
  return sum;
}

MacroField make_macro_field(std::shared_ptr<const PorosityGrid> grid, const MacroInit& init) {
  MacroField field(grid);
  if (init.kind == MacroInit::Kind::none || init.mass <= 0.0) return field;
  auto& rho = field.rho();
  for (std::size_t c = 0; c < grid->cell_count(); ++c) {
    if (grid->phi(c) == 0.0) continue;
    const Vec2 x = grid->center(c);
    if (init.kind == MacroInit::Kind::constant) {
      rho[c] = init.region.contains(x) ? 1.0 : 0.0;
    } else {
      const double r = norm(x - init.center);
      if (r <= 3.0 * init.spread) rho[c] = std::exp(-0.5 * r * r / (init.spread * init.spread));
    }
  }
  const double mass = macro_mass(field);
  if (!(mass > 0.0)) throw ValidationError("macro initial condition has no support in the walkable region");
  for (auto& r : rho) r *= init.mass / mass;
  return field;
}

double integrate_test_function(const TwoScaleState& state, std::size_t pop, const ScalarField& psi) {
  const auto& p = state.pops.at(pop);
  double micro = 0.0;
  for (const auto& a : p.micro.agents) micro += psi(a.position);
  double macro = 0.0;
  if (p.theta < 1.0) {
    const auto& grid = p.macro.grid();
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      const double m = p.macro.cell_mass(c);
      if (m != 0.0) macro += psi(grid.center(c)) * m;
    }
  }
  return p.theta * micro + (1.0 - p.theta) * macro;
}

double total_mass(const TwoScaleState& state, std::size_t pop) {
  const auto& p = state.pops.at(pop);
  const double micro = static_cast<double>(p.micro.size());
  if (p.theta == 1.0) return micro;
  return p.theta * micro + (1.0 - p.theta) * macro_mass(p.macro);
}

double auto_theta(std::size_t agents, double macro_mass) {
  const double n = static_cast<double>(agents);
  if (n + macro_mass <= 0.0) return 1.0;
  return n / (n + macro_mass);
}

void write_trajectory_rows(std::ostream& out, const TwoScaleState& state) {
  for (std::size_t i = 0; i < 2; ++i) {
    for (const auto& a : state.pops[i].micro.agents) {
      out << fmt::format("{},{},{},{},{}\n", state.time, a.id, i + 1, a.position.x, a.position.y);
    }
  }
}

void write_density_rows(std::ostream& out, double t, const MacroField& field) {
  const auto& grid = field.grid();
  for (std::size_t j = 0; j < grid.ny(); ++j) {
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      out << fmt::format("{},{},{},{}\n", t, i, j, field.rho(grid.index(i, j)));
    }
  }
}

}  // namespace crowdsim
