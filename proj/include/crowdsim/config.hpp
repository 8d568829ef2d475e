#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crowdsim/dynamics.hpp"
#include "crowdsim/geometry.hpp"
#include "crowdsim/measures.hpp"
#include "crowdsim/velocity.hpp"

namespace crowdsim {

enum class Placement { uniform_random, grid, explicit_list };

struct PopulationSpec {
  std::size_t count = 0;
  std::optional<double> theta;  ///< empty means auto: N / (N + macro mass)
  Placement placement = Placement::uniform_random;
  std::optional<Rect> region;   ///< default [0,L] x [0.2, d-0.2]
  std::vector<Vec2> positions;  ///< Placement::explicit_list
  MacroInit macro;
};

struct OutputSpec {
  double frame_interval = 0.5;
  double lane_gap = 0.5;
  std::optional<double> cluster_link;  ///< defaults to R_a_own
  std::vector<double> snapshot_times{0.0, 7.5, 15.0};
};

/// Everything needed to reproduce a run together with the seed.
struct ScenarioConfig {
  Domain domain;
  std::size_t nx = 80;
  std::size_t ny = 16;
  std::size_t samples_per_cell = 16;
  double max_radius_fraction = 0.25;
  bool counterflow = true;
  VelocityModel velocity;
  StepConfig step;
  std::array<PopulationSpec, 2> pops;
  OutputSpec output;

  double cluster_link() const { return output.cluster_link.value_or(velocity.kernels.R_a_own); }
};

/// Parses the INI-style scenario format (sections [domain] [grid] [kernels]
/// [velocity] [step] [pop1] [pop2] [output]). Unknown sections or keys and
/// every constraint violation are collected into one ValidationError.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ScenarioConfig& config);

}  // namespace crowdsim
