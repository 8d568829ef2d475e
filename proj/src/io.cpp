#include "crowdsim/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "crowdsim/errors.hpp"

namespace crowdsim {

namespace {

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

std::ifstream open_csv(const std::filesystem::path& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", path.string()));
  std::string first;
  std::getline(in, first);
  if (!first.empty() && first.back() == '\r') first.pop_back();
  if (first != header) {
    throw ValidationError(fmt::format("'{}': expected header '{}'", path.string(), header));
  }
  return in;
}

}  // namespace

Frame TrajectoryFrame::positions() const {
  auto sorted = rows;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  Frame f;
  for (const auto& r : sorted) f[r.subpop].push_back(r.position);
  return f;
}

std::vector<TrajectoryFrame> read_trajectory(const std::filesystem::path& path) {
  auto in = open_csv(path, "t,agent_id,subpop,x,y");
  std::vector<TrajectoryFrame> frames;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = fields_of(line);
    try {
      if (f.size() != 5) throw std::invalid_argument("field count");
      const double t = std::stod(f[0]);
      const auto subpop = std::stoul(f[2]);
      if (subpop < 1 || subpop > 2) throw std::invalid_argument("subpop");
      const TrajectoryRow row{static_cast<AgentId>(std::stoul(f[1])), subpop - 1, {std::stod(f[3]), std::stod(f[4])}};
      if (frames.empty() || frames.back().t != t) frames.push_back({t, {}});
      frames.back().rows.push_back(row);
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("'{}' line {}: malformed trajectory row", path.string(), line_no));
    }
  }
  return frames;
}

std::vector<DensityFrame> read_density(const std::filesystem::path& path, std::size_t nx, std::size_t ny) {
  auto in = open_csv(path, "t,i,j,rho");
  std::vector<DensityFrame> frames;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = fields_of(line);
    try {
      if (f.size() != 4) throw std::invalid_argument("field count");
      const double t = std::stod(f[0]);
      const auto i = std::stoul(f[1]);
      const auto j = std::stoul(f[2]);
      if (i >= nx || j >= ny) throw std::invalid_argument("cell");
      if (frames.empty() || frames.back().t != t) frames.push_back({t, std::vector<double>(nx * ny, 0.0)});
      frames.back().rho[j * nx + i] = std::stod(f[3]);
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("'{}' line {}: malformed density row", path.string(), line_no));
    }
  }
  return frames;
}

}  // namespace crowdsim
