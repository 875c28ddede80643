#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stack3d/netlist.hpp"

namespace stack3d {

/// Linear wire-delay proxy. The default wire delay constant is set so
/// wire delay matches intrinsic gate delay on the median path of a
/// placed 1000-cell synthetic bench (median length ~440 um, median
/// intrinsic ~0.14 ns).
struct DelayModel {
  double wire_delay_per_um = 0.0003;  // ns/um
  double tier_hop_delay = 0.0;        // ns per tier boundary crossed
  double via_penalty_um = 0.0;        // forwarded to path_length
};

struct PathRecord {
  std::string path_id;
  int n_cells = 0;
  double length_um = 0.0;
  double delay_ns = 0.0;
  double slack_ns = 0.0;  // required - delay
};

/// delay = sum(cell delays) + wire_delay_per_um * path_length
///       + tier_hop_delay * crossings; records sorted by ascending slack
/// (ties by path id).
std::vector<PathRecord> evaluate_paths(const Netlist& nl, const Placement& pl,
                                       const DelayModel& model);

struct DesignPathStats {
  double max_length_um = 0.0;
  long failing = 0;  // slack < 0
  double mean_length_um = 0.0;
  double stddev_length_um = 0.0;  // population
};

DesignPathStats summarize_paths(const std::vector<PathRecord>& records);

struct PathStatsSummary {
  DesignPathStats d2;
  DesignPathStats d3;
  double delta_max_length_um = 0.0;   // 3d - 2d
  long delta_failing = 0;
  double delta_stddev_um = 0.0;
};

// errors on empty inputs
PathStatsSummary path_stats(const std::vector<PathRecord>& records_2d,
                            const std::vector<PathRecord>& records_3d);

// CSV schema: path_id,n_cells,length_um,delay_ns,slack_ns,design
void write_path_csv(std::ostream& out, const std::vector<PathRecord>& records,
                    const std::string& design_label);

std::string path_stats_json(const PathStatsSummary& summary);

}  // namespace stack3d
