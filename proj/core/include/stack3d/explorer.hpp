#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "stack3d/config.hpp"

namespace stack3d {

struct RoadmapPoint {
  std::string label;
  double pitch_um = 0.0;
  double density_per_mm2 = 0.0;  // (1000/pitch_um)^2, square-grid assumption
};

// sorted by descending pitch
std::vector<RoadmapPoint> roadmap_table(
    const std::vector<std::pair<std::string, double>>& points);

struct RunOptions {
  std::filesystem::path config_path;
  std::filesystem::path out_dir;
  std::vector<std::uint64_t> seeds;  // overrides flow.seeds when non-empty
  int jobs = 1;
  std::string format = "csv";  // csv | json where applicable
};

// Subcommand drivers. Artifacts are written atomically under out_dir;
// any failure throws (ConfigError -> exit 2, others -> exit 3) before
// partial files become visible.
void run_cost(const RunOptions& opts);
void run_flow(const RunOptions& opts);
void run_roadmap(const RunOptions& opts);
void run_pdn(const RunOptions& opts);
void run_calibrate(const RunOptions& opts);

}  // namespace stack3d
