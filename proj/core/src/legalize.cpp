#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "stack3d/errors.hpp"
#include "stack3d/tier_place.hpp"

namespace stack3d {

Placement legalize(const Placement& pl, double row_pitch) {
  if (pl.coords.empty()) return pl;
  if (!(pl.width > 0.0 && pl.height > 0.0))
    throw std::invalid_argument("legalize: placement has no footprint");

  // group cells per tier, deterministic order
  std::map<int, std::vector<const std::pair<const std::string, Coord>*>> tiers;
  for (const auto& kv : pl.coords) {
    if (kv.second.tier < 0 || kv.second.tier >= pl.num_tiers)
      throw std::invalid_argument("legalize: cell '" + kv.first +
                                  "' on tier " + std::to_string(kv.second.tier));
    tiers[kv.second.tier].push_back(&kv);
  }

  double pitch = row_pitch;
  if (pitch <= 0.0) {
    size_t max_cells = 0;
    for (const auto& [t, cells] : tiers) max_cells = std::max(max_cells, cells.size());
    pitch = site_grid_for(static_cast<int>(max_cells), pl.width, 0.8).pitch;
  }

  const int rows = static_cast<int>(std::floor(pl.height / pitch + 1e-9));
  const int cols = static_cast<int>(std::floor(pl.width / pitch + 1e-9));
  if (rows < 1 || cols < 1)
    throw ModelError("legalize: pitch " + std::to_string(pitch) +
                     " leaves no rows in the footprint");

  Placement out;
  out.width = pl.width;
  out.height = pl.height;
  out.num_tiers = pl.num_tiers;

  for (auto& [t, cells] : tiers) {
    if (static_cast<long>(cells.size()) > static_cast<long>(rows) * cols)
      throw ModelError("legalize: tier " + std::to_string(t) + " holds " +
                       std::to_string(cells.size()) + " cells but only " +
                       std::to_string(rows * cols) + " sites");

    std::sort(cells.begin(), cells.end(), [](const auto* a, const auto* b) {
      if (a->second.y != b->second.y) return a->second.y < b->second.y;
      if (a->second.x != b->second.x) return a->second.x < b->second.x;
      return a->first < b->first;
    });

    std::vector<std::set<int>> free_cols(rows);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) free_cols[r].insert(c);

    auto row_y = [&](int r) { return (r + 0.5) * pitch; };
    auto col_x = [&](int c) { return (c + 0.5) * pitch; };

    for (const auto* kv : cells) {
      const Coord& pos = kv->second;
      int r0 = std::clamp(static_cast<int>(std::lround(pos.y / pitch - 0.5)), 0,
                          rows - 1);
      int ci = std::clamp(static_cast<int>(std::lround(pos.x / pitch - 0.5)), 0,
                          cols - 1);

      double best_cost = std::numeric_limits<double>::infinity();
      int best_r = -1, best_c = -1;

      // scan rows outward from the ideal one; row distance alone bounds
      // the reachable cost, so the scan stops early
      for (int d = 0; d < rows; ++d) {
        bool any = false;
        for (int r : {r0 - d, r0 + d}) {
          if (r < 0 || r >= rows) continue;
          if (d > 0 && r == r0) continue;
          any = true;
          double dy = std::abs(row_y(r) - pos.y);
          if (dy >= best_cost) continue;
          const std::set<int>& free = free_cols[r];
          if (free.empty()) continue;
          auto it = free.lower_bound(ci);
          for (auto cand : {it, it == free.begin() ? free.end() : std::prev(it)}) {
            if (cand == free.end()) continue;
            double cost = dy + std::abs(col_x(*cand) - pos.x);
            if (cost < best_cost - 1e-12 ||
                (cost < best_cost + 1e-12 &&
                 (r < best_r || (r == best_r && *cand < best_c)))) {
              best_cost = cost;
              best_r = r;
              best_c = *cand;
            }
          }
        }
        if (!any) break;
        // rows d+1 away sit at least d*pitch from y; nothing closer remains
        if (best_r >= 0 && static_cast<double>(d) * pitch > best_cost) break;
      }

      if (best_r < 0)
        throw ModelError("legalize: no free site for cell '" + kv->first + "'");
      free_cols[best_r].erase(best_c);
      out.coords[kv->first] = {col_x(best_c), row_y(best_r), t};
    }
  }
  return out;
}

long count_3d_vias(const Netlist& nl, const Placement& pl) {
  long vias = 0;
  std::set<int> tiers;
  for (int net = 0; net < nl.num_nets(); ++net) {
    tiers.clear();
    for (int c : nl.pins_of(net)) tiers.insert(pl.at(nl.cell(c).id).tier);
    vias += static_cast<long>(tiers.size()) - 1;
  }
  return vias;
}

ViaDensity via_density_check(long via_count, double footprint_mm2,
                             double pitch_um) {
  if (!(pitch_um > 0.0))
    throw std::invalid_argument("via_density_check: pitch must be > 0");
  if (!(footprint_mm2 > 0.0))
    throw std::invalid_argument("via_density_check: zero footprint");
  if (via_count < 0)
    throw std::invalid_argument("via_density_check: negative via count");

  const double pitch_mm = pitch_um / 1000.0;
  ViaDensity out;
  out.supply = footprint_mm2 / (pitch_mm * pitch_mm);
  out.utilization = static_cast<double>(via_count) / out.supply;
  out.pass = out.utilization <= 1.0;
  return out;
}

}  // namespace stack3d
