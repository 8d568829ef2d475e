#include "crowdsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "crowdsim/errors.hpp"

namespace crowdsim {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

namespace {

std::vector<Vec2> place_agents(const ScenarioConfig& config, std::size_t pop, std::uint64_t seed) {
  const auto& spec = config.pops[pop];
  const auto& domain = config.domain;
  const double margin = domain.width > 0.4 ? 0.2 : 0.0;
  const Rect region = spec.region.value_or(Rect{0.0, margin, domain.length, domain.width - margin});
  std::vector<Vec2> out;
  out.reserve(spec.count);
  switch (spec.placement) {
    case Placement::explicit_list:
      return spec.positions;
    case Placement::uniform_random: {
      SplitMix64 rng(seed ^ (0xD1B54A32D192ED03ULL * (pop + 1)));
      std::size_t attempts = 0;
      while (out.size() < spec.count) {
        if (++attempts > 10000 * (spec.count + 1)) {
          throw ValidationError(fmt::format("pop{}: could not place agents in the walkable part of the region", pop + 1));
        }
        const Vec2 p{region.x0 + rng.uniform() * (region.x1 - region.x0),
                     region.y0 + rng.uniform() * (region.y1 - region.y0)};
        if (domain.walkable(p)) out.push_back(p);
      }
      return out;
    }
    case Placement::grid: {
      if (spec.count == 0) return out;
      const double w = region.x1 - region.x0;
      const double h = region.y1 - region.y0;
      auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(spec.count) * w / h)));
      cols = std::max<std::size_t>(cols, 1);
      const std::size_t rows = (spec.count + cols - 1) / cols;
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          const Vec2 p{region.x0 + (static_cast<double>(c) + 0.5) * w / static_cast<double>(cols),
                       region.y0 + (static_cast<double>(r) + 0.5) * h / static_cast<double>(rows)};
          if (out.size() < spec.count && domain.walkable(p)) out.push_back(p);
        }
      }
      if (out.size() < spec.count) {
        throw ValidationError(fmt::format("pop{}: grid placement hits obstacles; enlarge the region", pop + 1));
      }
      return out;
    }
  }
  return out;
}

std::size_t steps_for(double t, double dt) {
  const double ratio = t / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) < 1e-9 * std::max(1.0, ratio)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(ratio));
}

}  // namespace

TwoScaleState initial_state(const ScenarioConfig& config, std::shared_ptr<const PorosityGrid> grid,
                            std::uint64_t seed) {
  TwoScaleState state(grid);
  AgentId next_id = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    auto& pop = state.pops[i];
    const auto& spec = config.pops[i];
    pop.macro = make_macro_field(grid, spec.macro);
    for (const auto& p : place_agents(config, i, seed)) pop.micro.agents.push_back({next_id++, p});
    pop.theta = spec.theta.value_or(auto_theta(pop.micro.size(), macro_mass(pop.macro)));
  }
  return state;
}

Simulation::Simulation(ScenarioConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      grid_(std::make_shared<const PorosityGrid>(
          build_porosity_grid(config_.domain, config_.nx, config_.ny, config_.samples_per_cell))),
      state_(initial_state(config_, grid_, seed)),
      total_steps_(steps_for(config_.step.t_end, config_.step.dt)) {}

StepDiagnostics Simulation::advance() {
  auto result = coupled_step(state_, config_.velocity, config_.domain, config_.step);
  ++step_;
  result.state.time = static_cast<double>(step_) * config_.step.dt;
  result.diagnostics.t = result.state.time;
  state_ = std::move(result.state);
  return result.diagnostics;
}

Frame Simulation::frame() const {
  Frame f;
  for (std::size_t i = 0; i < 2; ++i) {
    for (const auto& a : state_.pops[i].micro.agents) f[i].push_back(a.position);
  }
  return f;
}

LaneReport Simulation::lanes() const {
  LaneOptions options;
  options.gap_threshold = config_.output.lane_gap;
  options.link_distance = config_.cluster_link();
  if (config_.domain.boundary_x == BoundaryX::periodic) options.periodic_length = config_.domain.length;
  return detect_lanes(frame(), options);
}

std::vector<std::size_t> frame_steps(const ScenarioConfig& config) {
  const double dt = config.step.dt;
  const std::size_t last = steps_for(config.step.t_end, dt);
  std::set<std::size_t> steps{0, last};
  const double interval = config.output.frame_interval;
  for (std::size_t k = 1;; ++k) {
    const double t = static_cast<double>(k) * interval;
    if (t > config.step.t_end * (1.0 + 1e-12)) break;
    steps.insert(std::min(last, static_cast<std::size_t>(std::llround(t / dt))));
  }
  for (double t : config.output.snapshot_times) {
    if (t >= 0.0 && t <= config.step.t_end * (1.0 + 1e-12)) {
      steps.insert(std::min(last, static_cast<std::size_t>(std::llround(t / dt))));
    }
  }
  return {steps.begin(), steps.end()};
}

std::string lane_report_json(const LaneReport& report) {
  nlohmann::json j;
  j["total_lanes"] = report.total_lanes;
  j["cluster_count"] = report.cluster_count;
  for (std::size_t i = 0; i < 2; ++i) {
    nlohmann::json lanes = nlohmann::json::array();
    for (const auto& lane : report.lanes[i]) {
      lanes.push_back({{"center", lane.center},
                       {"y_min", lane.y_min},
                       {"y_max", lane.y_max},
                       {"occupancy", lane.occupancy},
                       {"cluster_sizes", lane.cluster_sizes}});
    }
    j["subpop"][std::to_string(i + 1)] = {{"lane_count", report.lanes[i].size()}, {"lanes", lanes}};
  }
  return j.dump(2);
}

RunSummary run(const ScenarioConfig& config, std::uint64_t seed, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  Simulation sim(config, seed);

  {
    std::ofstream cfg(out_dir / "config.cfg");
    cfg << "; seed = " << seed << "\n" << serialize_config(config);
    std::ofstream porosity(out_dir / "porosity.csv");
    sim.grid()->write_csv(porosity);
  }

  std::ofstream trajectory(out_dir / "trajectory.csv");
  trajectory << "t,agent_id,subpop,x,y\n";
  std::array<std::unique_ptr<std::ofstream>, 2> density;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& pop = sim.state().pops[i];
    if (pop.theta < 1.0 && macro_mass(pop.macro) > 0.0) {
      density[i] = std::make_unique<std::ofstream>(out_dir / fmt::format("density_{}.csv", i + 1));
      *density[i] << "t,i,j,rho\n";
    }
  }
  std::ofstream diagnostics(out_dir / "diagnostics.csv");
  diagnostics << "t,mass_1,mass_2,max_speed,fp_iters,fp_residual,unconverged_flag\n";

  RunSummary summary;
  std::size_t last_written = static_cast<std::size_t>(-1);
  auto write_frame = [&] {
    write_trajectory_rows(trajectory, sim.state());
    for (std::size_t i = 0; i < 2; ++i) {
      if (density[i]) write_density_rows(*density[i], sim.state().time, sim.state().pops[i].macro);
    }
    last_written = sim.step_index();
    ++summary.frames;
  };

  const auto steps = frame_steps(config);
  auto next_frame = steps.begin();
  diagnostics << fmt::format("{},{},{},{},{},{},{}\n", 0.0, total_mass(sim.state(), 0), total_mass(sim.state(), 1),
                             0.0, 0, 0.0, 0);
  if (next_frame != steps.end() && *next_frame == 0) {
    write_frame();
    ++next_frame;
  }
  try {
    while (!sim.finished()) {
      const auto d = sim.advance();
      diagnostics << fmt::format("{},{},{},{},{},{},{}\n", d.t, d.mass[0], d.mass[1], d.max_speed, d.fp_iterations,
                                 d.fp_residual, d.unconverged ? 1 : 0);
      if (d.unconverged) ++summary.unconverged_steps;
      ++summary.steps;
      if (next_frame != steps.end() && *next_frame == sim.step_index()) {
        write_frame();
        ++next_frame;
      }
    }
  } catch (const SimulationError&) {
    if (last_written != sim.step_index()) write_frame();
    trajectory.flush();
    diagnostics.flush();
    throw;
  }

  summary.final_lanes = sim.lanes();
  std::ofstream lanes(out_dir / "lanes.json");
  lanes << lane_report_json(summary.final_lanes) << "\n";
  return summary;
}

}  // namespace crowdsim
