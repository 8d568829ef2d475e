#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <vector>

#include "crowdsim/analysis.hpp"
#include "crowdsim/config.hpp"
#include "crowdsim/dynamics.hpp"

namespace crowdsim {

/// splitmix64 stream; identical sequences on every platform for a given seed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// Uniform double in [0,1) from the top 53 bits.
  double uniform();

 private:
  std::uint64_t state_;
};

/// Initial two-scale state for a scenario: porosity grid, agent placement and
/// macro densities. Agent ids are 0..N1-1 for pop1 and N1.. for pop2.
TwoScaleState initial_state(const ScenarioConfig& config, std::shared_ptr<const PorosityGrid> grid,
                            std::uint64_t seed);

/// Owns the evolving state of one run. Time is step_index * dt.
class Simulation {
 public:
  Simulation(ScenarioConfig config, std::uint64_t seed);

  const ScenarioConfig& config() const { return config_; }
  const TwoScaleState& state() const { return state_; }
  const std::shared_ptr<const PorosityGrid>& grid() const { return grid_; }
  std::size_t step_index() const { return step_; }
  std::size_t total_steps() const { return total_steps_; }
  bool finished() const { return step_ >= total_steps_; }

  StepDiagnostics advance();

  Frame frame() const;
  LaneReport lanes() const;

 private:
  ScenarioConfig config_;
  std::shared_ptr<const PorosityGrid> grid_;
  TwoScaleState state_;
  std::size_t step_ = 0;
  std::size_t total_steps_ = 0;
};

/// Step indices at which frames are written: every frame_interval plus the
/// snapshot times, always including the first and last step.
std::vector<std::size_t> frame_steps(const ScenarioConfig& config);

struct RunSummary {
  std::size_t steps = 0;
  std::size_t frames = 0;
  std::size_t unconverged_steps = 0;
  LaneReport final_lanes;
};

/// Runs to t_end and writes trajectory.csv, density_<i>.csv (populations with
/// macro mass), diagnostics.csv, porosity.csv, lanes.json and the resolved
/// config into out_dir. A step failure rethrows after flushing the last
/// consistent frame.
RunSummary run(const ScenarioConfig& config, std::uint64_t seed, const std::filesystem::path& out_dir);

/// Serialises a lane report as JSON text.
std::string lane_report_json(const LaneReport& report);

}  // namespace crowdsim
