#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "crowdsim/analysis.hpp"
#include "crowdsim/measures.hpp"

namespace crowdsim {

struct TrajectoryRow {
  AgentId id = 0;
  std::size_t subpop = 0;  ///< 0-based
  Vec2 position;
};

struct TrajectoryFrame {
  double t = 0.0;
  std::vector<TrajectoryRow> rows;

  /// Positions per subpopulation in ascending agent id order.
  Frame positions() const;
};

/// Reads `t,agent_id,subpop,x,y` rows grouped by t in file order.
std::vector<TrajectoryFrame> read_trajectory(const std::filesystem::path& path);

struct DensityFrame {
  double t = 0.0;
  std::vector<double> rho;  ///< indexed j*nx + i
};

/// Reads `t,i,j,rho` rows for a grid of nx x ny cells.
std::vector<DensityFrame> read_density(const std::filesystem::path& path, std::size_t nx, std::size_t ny);

}  // namespace crowdsim
