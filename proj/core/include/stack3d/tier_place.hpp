#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "stack3d/netlist.hpp"

namespace stack3d {

struct TierAssignment {
  std::unordered_map<std::string, int> tier_of;
  int num_tiers = 2;
  long cut_nets = 0;
  std::vector<double> balance;  // per-tier area fraction, sums to 1
};

struct AnnealSchedule {
  double t0 = 0.0;          // 0 = auto: ~80% of initial random moves accept
  double cooling = 0.95;    // geometric, in (0,1)
  double moves_per_cell = 100.0;  // moves per temperature = this * n
  double min_accept = 0.01;       // stop when acceptance falls below
  int max_temperatures = 1000;
  int stagnation_temps = 30;      // stop when best has not improved
};

// optional test hook: initial state + accepted moves, for audit replay
struct PlacementTrace {
  std::vector<Coord> initial;           // by netlist cell index
  struct Move {
    int cell_a;
    Coord to_a;
    int cell_b;   // -1 for a relocation, else swap partner
    Coord to_b;
  };
  std::vector<Move> accepted;
  double initial_cost = 0.0;
};

struct PlaceConfig {
  double footprint_scale = 0.5;  // 3D footprint area / 2D footprint area
  std::uint64_t seed = 1;
  AnnealSchedule schedule;
  double balance_tol = 0.05;     // per-tier area fraction tolerance
  double via_penalty = 0.0;      // um per tier boundary crossed
  double target_utilization = 0.8;  // sets the 2D footprint from cell area
  double site_fill = 0.8;           // site-grid density target
  PlacementTrace* trace = nullptr;  // not owned; test instrumentation
};

/// Two-way min-cut partition by Fiduccia-Mattheyses passes with gain
/// buckets. Area balance per side stays within balance_tol of 1/2 (moves
/// during a pass may wander one max-cell-area beyond; returned prefixes
/// always satisfy the band). Deterministic for a fixed seed; ties broken
/// by lowest cell index.
TierAssignment fm_bipartition(const Netlist& nl, double balance_tol,
                              std::uint64_t seed);

/// Multi-tier co-placement: simulated annealing over site-grid positions
/// on a footprint of footprint_scale times the 2D footprint area, shared
/// by all tiers. Cross-tier relocations and swaps re-check balance_tol.
/// Cost is hpwl with cfg.via_penalty. Final cost never exceeds initial.
Placement coplace(const Netlist& nl, const TierAssignment& assignment,
                  const PlaceConfig& cfg);

/// Single-tier baseline on the full footprint (footprint_scale forced 1).
Placement place_2d(const Netlist& nl, const PlaceConfig& cfg);

/// Snaps cells to non-overlapping square row sites of the given pitch,
/// per tier, greedily minimizing displacement. row_pitch <= 0 picks the
/// placer's own grid for the placement's cell count.
Placement legalize(const Placement& pl, double row_pitch);

// sum over nets of (distinct tiers spanned - 1)
long count_3d_vias(const Netlist& nl, const Placement& pl);

struct ViaDensity {
  double supply = 0.0;       // connections available at this pitch
  double utilization = 0.0;  // demand / supply
  bool pass = false;         // utilization <= 1
};

ViaDensity via_density_check(long via_count, double footprint_mm2,
                             double pitch_um);

/// Site grid used by the placers: odd m so a central site exists,
/// m^2 >= cells_per_tier / site_fill. Exposed so legalization and the
/// flow can reproduce the same grid.
struct SiteGrid {
  int m = 1;           // sites per side
  double pitch = 0.0;  // um
};
SiteGrid site_grid_for(int cells_per_tier, double footprint_width_um,
                       double site_fill);

/// Via penalty that keeps the annealer from treating tier crossings as
/// free: twice the site pitch of the scaled multi-tier grid. With zero
/// penalty, co-locating cells across tiers costs nothing and the placer
/// folds whole nets vertically, which no real 3D via budget allows.
double recommended_via_penalty(const Netlist& nl, const TierAssignment& ta,
                               const PlaceConfig& cfg);

}  // namespace stack3d
