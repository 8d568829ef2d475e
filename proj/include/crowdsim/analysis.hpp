#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "crowdsim/vec2.hpp"

namespace crowdsim {

/// Agent positions of both subpopulations at one instant.
using Frame = std::array<std::vector<Vec2>, 2>;

struct Lane {
  double center = 0.0;  ///< mean y of the members (m)
  double y_min = 0.0;
  double y_max = 0.0;
  std::size_t occupancy = 0;
  std::vector<std::size_t> cluster_sizes;  ///< descending
};

struct LaneReport {
  std::array<std::vector<Lane>, 2> lanes;  ///< per subpopulation, centres increasing
  /// Bands of all subpopulations merged where their y-ranges overlap; a mixed
  /// region counts once, segregated bands count separately.
  std::size_t total_lanes = 0;
  std::size_t cluster_count = 0;
};

struct LaneOptions {
  double gap_threshold = 0.5;
  double link_distance = 2.0;
  /// Corridor length when x is periodic, for minimum-image cluster distances.
  std::optional<double> periodic_length;
};

/// Splits each subpopulation into bands wherever consecutive y values (sorted)
/// differ by more than gap_threshold, then finds clusters inside every band.
LaneReport detect_lanes(const Frame& frame, const LaneOptions& options = {});

/// Single-linkage components (edges at distance <= link_distance); sizes sorted descending.
std::vector<std::size_t> detect_clusters(const std::vector<Vec2>& points, double link_distance,
                                         std::optional<double> periodic_length = std::nullopt);

inline std::vector<std::size_t> detect_clusters(const Frame& frame, std::size_t pop, double link_distance,
                                                std::optional<double> periodic_length = std::nullopt) {
  return detect_clusters(frame.at(pop), link_distance, periodic_length);
}

/// Number of opposite-group pairs closer than radius.
std::size_t count_close_opposite_pairs(const Frame& frame, double radius,
                                       std::optional<double> periodic_length = std::nullopt);

}  // namespace crowdsim
