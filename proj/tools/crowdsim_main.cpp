// crowdsim: run, analyse and audit two-population counterflow scenarios.
//
// Exit codes: 0 success, 2 validation error, 3 runtime abort.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <future>
#include <iostream>
#include <map>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "crowdsim/analysis.hpp"
#include "crowdsim/config.hpp"
#include "crowdsim/errors.hpp"
#include "crowdsim/io.hpp"
#include "crowdsim/simulation.hpp"

namespace fs = std::filesystem;
using namespace crowdsim;

namespace {

constexpr int kValidationExit = 2;
constexpr int kRuntimeExit = 3;

int cmd_run(const fs::path& config_path, std::uint64_t seed, const fs::path& out) {
  const auto config = load_config(config_path);
  const auto summary = run(config, seed, out);
  std::cout << fmt::format("steps={} frames={} unconverged_steps={} total_lanes={}\n", summary.steps,
                           summary.frames, summary.unconverged_steps, summary.final_lanes.total_lanes);
  return 0;
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const auto s = std::stoull(text);
      return {s, s};
    }
    const auto a = std::stoull(text.substr(0, dots));
    const auto b = std::stoull(text.substr(dots + 2));
    if (b < a) throw std::invalid_argument(text);
    return {a, b};
  } catch (const std::exception&) {
    throw ValidationError(fmt::format("--seeds expects A..B (got '{}')", text));
  }
}

int cmd_sweep(const fs::path& config_path, const std::string& seeds, const fs::path& out, std::size_t jobs) {
  const auto config = load_config(config_path);
  const auto [first, last] = parse_seed_range(seeds);
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());

  std::map<std::uint64_t, RunSummary> results;
  std::map<std::uint64_t, std::string> failures;
  std::vector<std::pair<std::uint64_t, std::future<RunSummary>>> pending;
  auto drain = [&](std::size_t keep) {
    while (pending.size() > keep) {
      auto& [seed, fut] = pending.front();
      try {
        results.emplace(seed, fut.get());
      } catch (const std::exception& e) {
        failures.emplace(seed, e.what());
      }
      pending.erase(pending.begin());
    }
  };
  for (auto seed = first; seed <= last; ++seed) {
    drain(jobs - 1);
    pending.emplace_back(seed, std::async(std::launch::async, [&config, seed, &out] {
                           return run(config, seed, out / fmt::format("seed_{}", seed));
                         }));
  }
  drain(0);

  std::ofstream summary(out / "sweep_summary.csv");
  summary << "seed,total_lanes,lanes_1,lanes_2,clusters,unconverged_steps\n";
  for (const auto& [seed, s] : results) {
    summary << fmt::format("{},{},{},{},{},{}\n", seed, s.final_lanes.total_lanes, s.final_lanes.lanes[0].size(),
                           s.final_lanes.lanes[1].size(), s.final_lanes.cluster_count, s.unconverged_steps);
  }
  for (const auto& [seed, what] : failures) std::cerr << fmt::format("seed {} aborted: {}\n", seed, what);
  std::cout << fmt::format("completed {} of {} runs\n", results.size(), last - first + 1);
  return failures.empty() ? 0 : kRuntimeExit;
}

const TrajectoryFrame& pick_frame(const std::vector<TrajectoryFrame>& frames, std::optional<double> time) {
  if (frames.empty()) throw ValidationError("trajectory has no frames");
  if (!time) return frames.back();
  const auto best = std::min_element(frames.begin(), frames.end(), [&](const auto& a, const auto& b) {
    return std::abs(a.t - *time) < std::abs(b.t - *time);
  });
  return *best;
}

int cmd_analyze(const fs::path& trajectory, std::optional<double> time, bool lanes, bool clusters, double gap,
                double link, std::optional<double> period) {
  const auto frames = read_trajectory(trajectory);
  const auto& frame = pick_frame(frames, time);
  const auto positions = frame.positions();
  nlohmann::json out;
  out["t"] = frame.t;
  if (lanes || !clusters) {
    LaneOptions options{gap, link, period};
    out["lanes"] = nlohmann::json::parse(lane_report_json(detect_lanes(positions, options)));
  }
  if (clusters) {
    for (std::size_t i = 0; i < 2; ++i) {
      out["clusters"][std::to_string(i + 1)] = detect_clusters(positions, i, link, period);
    }
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_audit(const fs::path& trajectory, const std::string& psi_name, const fs::path& config_path,
              std::size_t subpop, const std::array<std::string, 2>& density_files) {
  if (subpop < 1 || subpop > 2) throw ValidationError("--subpop must be 1 or 2");
  const auto config = load_config(config_path);
  const Simulation reference(config, 0);
  const auto& grid = reference.grid();
  const auto psi = make_test_field(psi_name, config.domain.length, config.domain.width);

  std::array<std::vector<DensityFrame>, 2> densities;
  for (std::size_t i = 0; i < 2; ++i) {
    if (!density_files[i].empty()) densities[i] = read_density(density_files[i], grid->nx(), grid->ny());
  }

  std::vector<TwoScaleState> states;
  for (const auto& frame : read_trajectory(trajectory)) {
    TwoScaleState state(grid);
    state.time = frame.t;
    auto rows = frame.rows;
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (const auto& r : rows) state.pops[r.subpop].micro.agents.push_back({r.id, r.position});
    for (std::size_t i = 0; i < 2; ++i) {
      state.pops[i].theta = reference.state().pops[i].theta;
      const auto match = std::find_if(densities[i].begin(), densities[i].end(),
                                      [&](const DensityFrame& d) { return d.t == frame.t; });
      if (match != densities[i].end()) state.pops[i].macro = MacroField(grid, match->rho);
    }
    states.push_back(std::move(state));
  }
  const auto residual = weak_form_residual(states, psi, subpop - 1, config.velocity, config.domain);
  std::cout << "t,residual\n";
  double worst = 0.0;
  for (std::size_t n = 0; n < residual.size(); ++n) {
    std::cout << fmt::format("{},{}\n", states[n + 1].time, residual[n]);
    worst = std::max(worst, std::abs(residual[n]));
  }
  std::cerr << fmt::format("max |residual| = {}\n", worst);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-population crowd counterflow simulator"};
  app.require_subcommand(1);

  fs::path config_path, out_dir, trajectory;
  std::uint64_t seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario");
  run_cmd->add_option("--config", config_path, "Scenario config file")->required();
  run_cmd->add_option("--seed", seed, "Random seed")->required();
  run_cmd->add_option("--out", out_dir, "Output directory")->required();

  std::optional<double> time, period;
  bool lanes = false, clusters = false;
  double gap = 0.5, link = 2.0;
  auto* analyze_cmd = app.add_subcommand("analyze", "Lane and cluster analysis of a trajectory frame");
  analyze_cmd->add_option("--trajectory", trajectory, "trajectory.csv")->required();
  analyze_cmd->add_option("--time", time, "Frame time (default: last frame)");
  analyze_cmd->add_flag("--lanes", lanes, "Report lanes");
  analyze_cmd->add_flag("--clusters", clusters, "Report clusters per subpopulation");
  analyze_cmd->add_option("--gap", gap, "Lane gap threshold (m)")->capture_default_str();
  analyze_cmd->add_option("--link", link, "Cluster link distance (m)")->capture_default_str();
  analyze_cmd->add_option("--period", period, "Periodic corridor length for distances");

  std::string psi_name;
  std::size_t subpop = 1;
  std::array<std::string, 2> density_files;
  auto* audit_cmd = app.add_subcommand("audit", "Weak-form residual of a trajectory");
  audit_cmd->add_option("--trajectory", trajectory, "trajectory.csv")->required();
  audit_cmd->add_option("--psi", psi_name, "Test field: linear_x, linear_y, quadratic, bump, trig")->required();
  audit_cmd->add_option("--config", config_path, "Scenario config used for the run")->required();
  audit_cmd->add_option("--subpop", subpop, "Subpopulation (1 or 2)")->capture_default_str();
  audit_cmd->add_option("--density-1", density_files[0], "density_1.csv of the run");
  audit_cmd->add_option("--density-2", density_files[1], "density_2.csv of the run");

  std::string seeds;
  std::size_t jobs = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a seed range, one output directory per seed");
  sweep_cmd->add_option("--config", config_path, "Scenario config file")->required();
  sweep_cmd->add_option("--seeds", seeds, "Seed range A..B")->required();
  sweep_cmd->add_option("--out", out_dir, "Output directory")->required();
  sweep_cmd->add_option("--jobs", jobs, "Concurrent runs (default: hardware threads)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationExit;
  }

  try {
    if (*run_cmd) return cmd_run(config_path, seed, out_dir);
    if (*analyze_cmd) return cmd_analyze(trajectory, time, lanes, clusters, gap, link, period);
    if (*audit_cmd) return cmd_audit(trajectory, psi_name, config_path, subpop, density_files);
    if (*sweep_cmd) return cmd_sweep(config_path, seeds, out_dir, jobs);
  } catch (const ValidationError& e) {
    std::cerr << "validation error:\n" << e.what() << "\n";
    return kValidationExit;
  } catch (const std::exception& e) {
    std::cerr << "aborted: " << e.what() << "\n";
    return kRuntimeExit;
  }
  return 0;
}
