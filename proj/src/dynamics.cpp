#include "crowdsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "crowdsim/errors.hpp"

namespace crowdsim {

void StepConfig::validate() const {
  std::vector<std::string> problems;
  if (!(dt > 0.0)) problems.push_back(fmt::format("step: dt must be > 0 (got {})", dt));
  if (!(cfl > 0.0 && cfl <= 1.0)) problems.push_back(fmt::format("step: cfl must lie in (0,1] (got {})", cfl));
  if (!(t_end > 0.0)) problems.push_back(fmt::format("step: t_end must be > 0 (got {})", t_end));
  if (macro_substeps && *macro_substeps == 0) problems.emplace_back("step: macro_substeps must be >= 1");
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

namespace {

Vec2 mirror_out(const Obstacle& obstacle, Vec2 p) {
  if (const auto* r = std::get_if<Rect>(&obstacle)) {
    const double depth[] = {p.x - r->x0, r->x1 - p.x, p.y - r->y0, r->y1 - p.y};
    const auto k = std::min_element(std::begin(depth), std::end(depth)) - std::begin(depth);
    switch (k) {
      case 0: return {2.0 * r->x0 - p.x, p.y};
      case 1: return {2.0 * r->x1 - p.x, p.y};
      case 2: return {p.x, 2.0 * r->y0 - p.y};
      default: return {p.x, 2.0 * r->y1 - p.y};
    }
  }
  const auto& d = std::get<Disc>(obstacle);
  const Vec2 off = p - d.center;
  const double r = norm(off);
  if (r == 0.0) return p;
  return d.center + ((2.0 * d.radius - r) / r) * off;
}

}  // namespace

std::optional<Vec2> advance_position(Vec2 p, Vec2 v, const Domain& domain, double dt) {
  Vec2 q = p + dt * v;
  const double L = domain.length;
  const double d = domain.width;
  if (domain.boundary_x == BoundaryX::periodic) {
    q.x -= L * std::floor(q.x / L);
    if (q.x >= L) q.x = 0.0;
  } else if (q.x < 0.0 || q.x >= L) {
    return std::nullopt;
  }
  if (q.y < 0.0) q.y = -q.y;
  if (q.y > d) q.y = 2.0 * d - q.y;
  for (const auto& o : domain.obstacles) {
    if (strictly_inside(o, q)) q = mirror_out(o, q);
  }
  if (!domain.walkable(q)) {
    throw SimulationError(fmt::format(
        "agent moved from ({}, {}) to ({}, {}) and could not be projected back into the walkable region; "
        "reduce dt",
        p.x, p.y, q.x, q.y));
  }
  return q;
}

std::array<MicroMeasure, 2> micro_step(const TwoScaleState& state, const VelocityField& velocities,
                                       const Domain& domain, double dt) {
  std::array<MicroMeasure, 2> out;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& agents = state.pops[i].micro.agents;
    if (velocities.agents[i].size() != agents.size()) {
      throw ContractViolation("micro_step: velocity count does not match agent count");
    }
    out[i].agents.reserve(agents.size());
    for (std::size_t k = 0; k < agents.size(); ++k) {
      if (auto q = advance_position(agents[k].position, velocities.agents[i][k], domain, dt)) {
        out[i].agents.push_back({agents[k].id, *q});
      }
    }
  }
  return out;
}

namespace {

// Visits every flux-carrying face once as (upstream-candidate pair, face normal velocity).
// Boundary x faces of an open corridor are reported with a missing neighbour.
template <typename Fn>
void for_each_face(const PorosityGrid& grid, const std::vector<Vec2>& u, const Domain& domain, Fn&& fn) {
  const std::size_t nx = grid.nx();
  const std::size_t ny = grid.ny();
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  const bool periodic = domain.boundary_x == BoundaryX::periodic;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i <= nx; ++i) {
      std::size_t left = none, right = none;
      if (i == 0) {
        if (periodic) continue;  // handled as the i == nx face
        right = grid.index(0, j);
      } else if (i == nx) {
        left = grid.index(nx - 1, j);
        if (periodic) right = grid.index(0, j);
      } else {
        left = grid.index(i - 1, j);
        right = grid.index(i, j);
      }
      double speed;
      if (left != none && right != none) speed = 0.5 * (u[left].x + u[right].x);
      else speed = left != none ? u[left].x : u[right].x;
      fn(left, right, speed);
    }
  }
  for (std::size_t j = 1; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const auto below = grid.index(i, j - 1);
      const auto above = grid.index(i, j);
      fn(below, above, 0.5 * (u[below].y + u[above].y));
    }
  }
}

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

bool blocked(const PorosityGrid& grid, std::size_t a, std::size_t b) {
  return (a != kNone && grid.phi(a) == 0.0) || (b != kNone && grid.phi(b) == 0.0);
}

}  // namespace

double macro_outflow_rate(const MacroField& field, const std::vector<Vec2>& cell_velocities,
                          const Domain& domain) {
  const auto& grid = field.grid();
  std::vector<double> out(grid.cell_count(), 0.0);
  for_each_face(grid, cell_velocities, domain, [&](std::size_t lo, std::size_t hi, double speed) {
    if (blocked(grid, lo, hi)) return;
    if (speed > 0.0 && lo != kNone) out[lo] += speed;
    if (speed < 0.0 && hi != kNone) out[hi] -= speed;
  });
  return out.empty() ? 0.0 : *std::max_element(out.begin(), out.end());
}

MacroField macro_step(const MacroField& field, const std::vector<Vec2>& cell_velocities,
                      const Domain& domain, double dt, double cfl, std::optional<std::size_t> substeps) {
  const auto& grid = field.grid();
  if (cell_velocities.size() != grid.cell_count()) {
    throw ContractViolation("macro_step: one velocity per cell required");
  }
  const double h = grid.h();
  const double area = grid.cell_area();
  std::size_t steps = 1;
  if (substeps) {
    steps = *substeps;
  } else {
    const double rate = macro_outflow_rate(field, cell_velocities, domain);
    if (rate > 0.0) steps = static_cast<std::size_t>(std::ceil(dt * rate / (cfl * h)));
    steps = std::max<std::size_t>(steps, 1);
  }
  const double sub = dt / static_cast<double>(steps);

  std::vector<double> mass(grid.cell_count());
  for (std::size_t c = 0; c < mass.size(); ++c) mass[c] = field.cell_mass(c);
  std::vector<double> delta(mass.size());

  for (std::size_t s = 0; s < steps; ++s) {
    std::fill(delta.begin(), delta.end(), 0.0);
    for_each_face(grid, cell_velocities, domain, [&](std::size_t lo, std::size_t hi, double speed) {
      if (speed == 0.0 || blocked(grid, lo, hi)) return;
      const std::size_t upstream = speed > 0.0 ? lo : hi;
      if (upstream == kNone) return;  // nothing enters through an open boundary
      const double moved = sub * std::abs(speed) * h * mass[upstream] / area;
      const std::size_t downstream = speed > 0.0 ? hi : lo;
      delta[upstream] -= moved;
      if (downstream != kNone) delta[downstream] += moved;
    });
    double scale = 0.0;
    for (double m : mass) scale = std::max(scale, m);
    for (std::size_t c = 0; c < mass.size(); ++c) {
      mass[c] += delta[c];
      if (mass[c] < 0.0) {
        if (mass[c] < -1e-13 * scale) {
          throw SimulationError(fmt::format("macro_step: negative mass {} in cell {} (CFL violated?)", mass[c], c));
        }
        mass[c] = 0.0;
      }
    }
  }

  MacroField next(field.grid_ptr());
  auto& rho = next.rho();
  for (std::size_t c = 0; c < mass.size(); ++c) {
    const double phi = grid.phi(c);
    rho[c] = phi > 0.0 ? mass[c] / (phi * area) : 0.0;
  }
  return next;
}

StepResult coupled_step(const TwoScaleState& state, const VelocityModel& model, const Domain& domain,
                        const StepConfig& config) {
  const auto solution = resolve_velocities(state, domain, model);
  auto micro = micro_step(state, solution.field, domain, config.dt);

  StepResult result{state, {}};
  result.state.time = state.time + config.dt;
  double max_speed = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    auto& pop = result.state.pops[i];
    pop.micro = std::move(micro[i]);
    for (const auto& v : solution.field.agents[i]) max_speed = std::max(max_speed, norm(v));
    if (pop.theta < 1.0 && macro_mass(pop.macro) > 0.0) {
      const auto& cells = solution.field.cells[i];
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (pop.macro.rho(c) > 0.0) max_speed = std::max(max_speed, norm(cells[c]));
      }
      pop.macro = macro_step(pop.macro, cells, domain, config.dt, config.cfl, config.macro_substeps);
    }
  }
  auto& diag = result.diagnostics;
  diag.t = result.state.time;
  diag.mass = {total_mass(result.state, 0), total_mass(result.state, 1)};
  diag.max_speed = max_speed;
  diag.fp_iterations = solution.iterations;
  diag.fp_residual = solution.residual;
  diag.unconverged = !solution.converged;
  diag.capped = solution.capped;
  return result;
}

std::vector<std::string> test_field_names() { return {"linear_x", "linear_y", "quadratic", "bump", "trig"}; }

TestField make_test_field(const std::string& name, double length, double width) {
  const Vec2 mid{0.5 * length, 0.5 * width};
  if (name == "linear_x") return {name, [](Vec2 p) { return p.x; }, [](Vec2) { return Vec2{1.0, 0.0}; }};
  if (name == "linear_y") return {name, [](Vec2 p) { return p.y; }, [](Vec2) { return Vec2{0.0, 1.0}; }};
  if (name == "quadratic") {
    return {name, [mid](Vec2 p) { const Vec2 r = p - mid; return dot(r, r); },
            [mid](Vec2 p) { return 2.0 * (p - mid); }};
  }
  if (name == "bump") {
    const double w = 0.25 * std::min(length, width);
    return {name,
            [mid, w](Vec2 p) { const Vec2 r = p - mid; return std::exp(-0.5 * dot(r, r) / (w * w)); },
            [mid, w](Vec2 p) {
              const Vec2 r = p - mid;
              return (-std::exp(-0.5 * dot(r, r) / (w * w)) / (w * w)) * r;
            }};
  }
  if (name == "trig") {
    const double kx = 2.0 * std::numbers::pi / length;
    const double ky = std::numbers::pi / width;
    return {name, [kx, ky](Vec2 p) { return std::sin(kx * p.x) * std::cos(ky * p.y); },
            [kx, ky](Vec2 p) {
              return Vec2{kx * std::cos(kx * p.x) * std::cos(ky * p.y), -ky * std::sin(kx * p.x) * std::sin(ky * p.y)};
            }};
  }
  throw ValidationError(fmt::format("unknown test field '{}'", name));
}

std::vector<double> weak_form_residual(const std::vector<TwoScaleState>& trajectory, const TestField& psi,
                                       std::size_t pop, const VelocityModel& model, const Domain& domain) {
  if (trajectory.size() < 3) throw ContractViolation("weak_form_residual: need at least 3 samples");
  const double spacing = trajectory[1].time - trajectory[0].time;
  for (std::size_t n = 1; n < trajectory.size(); ++n) {
    const double gap = trajectory[n].time - trajectory[n - 1].time;
    if (!(spacing > 0.0) || std::abs(gap - spacing) > 1e-9 * std::max(1.0, spacing)) {
      throw ContractViolation("weak_form_residual: samples must be uniformly spaced in time");
    }
  }
  std::vector<double> lhs_values(trajectory.size());
  for (std::size_t n = 0; n < trajectory.size(); ++n) {
    lhs_values[n] = integrate_test_function(trajectory[n], pop, psi.value);
  }
  std::vector<double> residual;
  residual.reserve(trajectory.size() - 2);
  for (std::size_t n = 1; n + 1 < trajectory.size(); ++n) {
    const auto& state = trajectory[n];
    const double lhs = (lhs_values[n + 1] - lhs_values[n - 1]) / (trajectory[n + 1].time - trajectory[n - 1].time);
    const auto velocities = resolve_velocities(state, domain, model);
    const auto& p = state.pops[pop];
    double micro = 0.0;
    for (std::size_t k = 0; k < p.micro.size(); ++k) {
      const Vec2 x = p.micro.agents[k].position;
      micro += dot(velocities.field.agents[pop][k], psi.gradient(x));
    }
    double macro = 0.0;
    if (p.theta < 1.0) {
      const auto& grid = state.grid();
      for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        const double m = p.macro.cell_mass(c);
        if (m != 0.0) macro += dot(velocities.field.cells[pop][c], psi.gradient(grid.center(c))) * m;
      }
    }
    residual.push_back(lhs - (p.theta * micro + (1.0 - p.theta) * macro));
  }
  return residual;
}

}  // namespace crowdsim
