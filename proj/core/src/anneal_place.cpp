#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "stack3d/errors.hpp"
#include "stack3d/rng.hpp"
#include "stack3d/tier_place.hpp"

namespace stack3d {

namespace {

struct SaState {
  const Netlist& nl;
  int n = 0;
  int tiers = 1;
  double width = 0.0;

  std::vector<double> x, y;
  std::vector<int> tier;
  std::vector<char> movable;
  std::vector<int> movable_ids;

  SiteGrid grid;
  // occupancy per tier: site -> cell (-1 empty); empties with O(1) sampling
  std::vector<std::vector<int>> cell_at;
  std::vector<std::vector<int>> empty_sites;
  std::vector<std::vector<int>> empty_pos;  // site -> index in empty_sites
  std::vector<int> site_of;                 // cell -> site (-1 for fixed)

  std::vector<double> tier_area;
  double balance_lo = 0.0, balance_hi = 0.0;

  double via_penalty = 0.0;
  std::vector<double> net_cost;
  double cur_cost = 0.0;

  // scratch for move evaluation
  std::vector<int> touched_nets;
  std::vector<long> net_epoch;
  long epoch = 0;

  explicit SaState(const Netlist& netlist) : nl(netlist) {}

  double site_x(int site) const {
    return (site % grid.m + 0.5) * grid.pitch;
  }
  double site_y(int site) const {
    return (site / grid.m + 0.5) * grid.pitch;
  }

  double eval_net(int net) const {
    auto pins = nl.pins_of(net);
    double minx = x[pins[0]], maxx = minx;
    double miny = y[pins[0]], maxy = miny;
    int mint = tier[pins[0]], maxt = mint;
    for (size_t i = 1; i < pins.size(); ++i) {
      int c = pins[i];
      minx = std::min(minx, x[c]);
      maxx = std::max(maxx, x[c]);
      miny = std::min(miny, y[c]);
      maxy = std::max(maxy, y[c]);
      mint = std::min(mint, tier[c]);
      maxt = std::max(maxt, tier[c]);
    }
    return (maxx - minx) + (maxy - miny) + via_penalty * (maxt - mint);
  }

  void rebuild_cost() {
    net_cost.resize(nl.num_nets());
    cur_cost = 0.0;
    for (int net = 0; net < nl.num_nets(); ++net) {
      net_cost[net] = eval_net(net);
      cur_cost += net_cost[net];
    }
  }

  void collect_nets(int cell) {
    for (int net : nl.nets_of(cell)) {
      if (net_epoch[net] == epoch) continue;
      net_epoch[net] = epoch;
      touched_nets.push_back(net);
    }
  }

  // cost delta of the already-applied coordinate change on touched nets
  double touched_delta() const {
    double d = 0.0;
    for (int net : touched_nets) d += eval_net(net) - net_cost[net];
    return d;
  }

  void commit_touched(double delta) {
    for (int net : touched_nets) net_cost[net] = eval_net(net);
    cur_cost += delta;
  }

  void occupy(int cell, int t, int site) {
    cell_at[t][site] = cell;
    site_of[cell] = site;
    x[cell] = site_x(site);
    y[cell] = site_y(site);
    tier[cell] = t;
    int pos = empty_pos[t][site];
    if (pos >= 0) {  // remove from empty list (swap-with-last)
      int last = empty_sites[t].back();
      empty_sites[t][pos] = last;
      empty_pos[t][last] = pos;
      empty_sites[t].pop_back();
      empty_pos[t][site] = -1;
    }
  }

  void release(int t, int site) {
    cell_at[t][site] = -1;
    empty_pos[t][site] = static_cast<int>(empty_sites[t].size());
    empty_sites[t].push_back(site);
  }
};

struct Proposal {
  int cell_a = -1;
  int cell_b = -1;  // -1: relocation of cell_a to (tier_b, site_b)
  int tier_a = 0, site_a = 0;
  int tier_b = 0, site_b = 0;
};

// uniform random proposal; returns false when none is available
bool propose(SaState& st, rng::Engine& eng, double balance_tol, Proposal& out) {
  if (st.movable_ids.empty()) return false;
  const bool do_swap = rng::coin(eng);

  int a = st.movable_ids[rng::uniform_below(eng, st.movable_ids.size())];
  out.cell_a = a;
  out.tier_a = st.tier[a];
  out.site_a = st.site_of[a];

  if (!do_swap) {
    int t = st.tiers == 1 ? 0
                          : static_cast<int>(rng::uniform_below(eng, st.tiers));
    if (st.empty_sites[t].empty()) return false;
    int site =
        st.empty_sites[t][rng::uniform_below(eng, st.empty_sites[t].size())];
    out.cell_b = -1;
    out.tier_b = t;
    out.site_b = site;
    if (t != out.tier_a) {
      double from = st.tier_area[out.tier_a] - st.nl.cell(a).area;
      double to = st.tier_area[t] + st.nl.cell(a).area;
      if (from < st.balance_lo || to > st.balance_hi) return false;
    }
    return true;
  }

  int b = st.movable_ids[rng::uniform_below(eng, st.movable_ids.size())];
  if (b == a) return false;
  out.cell_b = b;
  out.tier_b = st.tier[b];
  out.site_b = st.site_of[b];
  if (out.tier_a != out.tier_b) {
    double da = st.nl.cell(a).area, db = st.nl.cell(b).area;
    double ta = st.tier_area[out.tier_a] - da + db;
    double tb = st.tier_area[out.tier_b] - db + da;
    if (ta < st.balance_lo || ta > st.balance_hi || tb < st.balance_lo ||
        tb > st.balance_hi)
      return false;
  }
  (void)balance_tol;
  return true;
}

// applies coordinates only; occupancy/areas are committed separately
void apply_coords(SaState& st, const Proposal& p) {
  if (p.cell_b < 0) {
    st.x[p.cell_a] = st.site_x(p.site_b);
    st.y[p.cell_a] = st.site_y(p.site_b);
    st.tier[p.cell_a] = p.tier_b;
  } else {
    st.x[p.cell_a] = st.site_x(p.site_b);
    st.y[p.cell_a] = st.site_y(p.site_b);
    st.tier[p.cell_a] = p.tier_b;
    st.x[p.cell_b] = st.site_x(p.site_a);
    st.y[p.cell_b] = st.site_y(p.site_a);
    st.tier[p.cell_b] = p.tier_a;
  }
}

void revert_coords(SaState& st, const Proposal& p) {
  st.x[p.cell_a] = st.site_x(p.site_a);
  st.y[p.cell_a] = st.site_y(p.site_a);
  st.tier[p.cell_a] = p.tier_a;
  if (p.cell_b >= 0) {
    st.x[p.cell_b] = st.site_x(p.site_b);
    st.y[p.cell_b] = st.site_y(p.site_b);
    st.tier[p.cell_b] = p.tier_b;
  }
}

void commit_occupancy(SaState& st, const Proposal& p) {
  const double area_a = st.nl.cell(p.cell_a).area;
  if (p.cell_b < 0) {
    st.release(p.tier_a, p.site_a);
    st.occupy(p.cell_a, p.tier_b, p.site_b);
    if (p.tier_a != p.tier_b) {
      st.tier_area[p.tier_a] -= area_a;
      st.tier_area[p.tier_b] += area_a;
    }
  } else {
    const double area_b = st.nl.cell(p.cell_b).area;
    st.cell_at[p.tier_a][p.site_a] = p.cell_b;
    st.cell_at[p.tier_b][p.site_b] = p.cell_a;
    st.site_of[p.cell_a] = p.site_b;
    st.site_of[p.cell_b] = p.site_a;
    // coords already swapped by apply_coords
    if (p.tier_a != p.tier_b) {
      st.tier_area[p.tier_a] += area_b - area_a;
      st.tier_area[p.tier_b] += area_a - area_b;
    }
  }
}

Placement anneal(const Netlist& nl, int num_tiers,
                 const std::vector<int>& tier_of, const PlaceConfig& cfg,
                 double footprint_scale) {
  if (nl.num_cells() == 0)
    throw std::invalid_argument("placement: empty netlist");
  if (!(footprint_scale > 0.0 && footprint_scale <= 1.0))
    throw std::invalid_argument("placement: footprint_scale must be in (0,1]");
  if (!(cfg.schedule.cooling > 0.0 && cfg.schedule.cooling < 1.0))
    throw std::invalid_argument("placement: cooling rate must be in (0,1)");
  if (!(cfg.target_utilization > 0.0 && cfg.target_utilization <= 1.0))
    throw std::invalid_argument("placement: target_utilization must be in (0,1]");

  SaState st(nl);
  st.n = nl.num_cells();
  st.tiers = num_tiers;
  st.via_penalty = cfg.via_penalty;

  const double total_area = nl.total_cell_area();
  const double area_2d = total_area / cfg.target_utilization;
  const double area_fp = footprint_scale * area_2d;
  st.width = std::sqrt(area_fp);

  st.x.assign(st.n, 0.0);
  st.y.assign(st.n, 0.0);
  st.tier.assign(st.n, 0);
  st.movable.assign(st.n, 1);
  st.site_of.assign(st.n, -1);
  st.tier_area.assign(num_tiers, 0.0);

  std::vector<std::vector<int>> tier_cells(num_tiers);
  for (int c = 0; c < st.n; ++c) {
    const Cell& cell = nl.cell(c);
    int t = tier_of[c];
    if (t < 0 || t >= num_tiers)
      throw std::invalid_argument("placement: cell '" + cell.id +
                                  "' has tier " + std::to_string(t) +
                                  " outside [0, " + std::to_string(num_tiers) +
                                  ")");
    st.tier[c] = t;
    st.tier_area[t] += cell.area;
    if (cell.fixed) {
      st.movable[c] = 0;
      const FixedPos& fp = *cell.fixed_pos;
      if (fp.x < 0 || fp.x > st.width || fp.y < 0 || fp.y > st.width)
        throw ModelError("placement: fixed cell '" + cell.id +
                         "' lies outside the footprint");
      st.x[c] = fp.x;
      st.y[c] = fp.y;
    } else {
      st.movable_ids.push_back(c);
      tier_cells[t].push_back(c);
    }
  }

  const double eps = 1e-9 * std::max(total_area, 1.0);
  for (int t = 0; t < num_tiers; ++t)
    if (st.tier_area[t] > area_fp + eps)
      throw ModelError("placement: tier " + std::to_string(t) +
                       " utilization exceeds 1 (" +
                       std::to_string(st.tier_area[t] / area_fp) + ")");

  st.balance_lo = total_area * (1.0 / num_tiers - cfg.balance_tol) - eps;
  st.balance_hi = total_area * (1.0 / num_tiers + cfg.balance_tol) + eps;

  int max_tier_cells = 0;
  for (int t = 0; t < num_tiers; ++t)
    max_tier_cells =
        std::max(max_tier_cells, static_cast<int>(tier_cells[t].size()));
  st.grid = site_grid_for(std::max(1, max_tier_cells), st.width, cfg.site_fill);
  const int num_sites = st.grid.m * st.grid.m;

  st.cell_at.assign(num_tiers, std::vector<int>(num_sites, -1));
  st.empty_sites.assign(num_tiers, {});
  st.empty_pos.assign(num_tiers, std::vector<int>(num_sites, -1));
  for (int t = 0; t < num_tiers; ++t)
    for (int s = 0; s < num_sites; ++s) st.release(t, s);

  // sites sorted center-out so tiny instances start compact and the
  // 1-cell case lands exactly on the central site
  std::vector<int> site_order(num_sites);
  for (int s = 0; s < num_sites; ++s) site_order[s] = s;
  const double c0 = st.width / 2.0;
  std::sort(site_order.begin(), site_order.end(), [&](int a, int b) {
    double da = (st.site_x(a) - c0) * (st.site_x(a) - c0) +
                (st.site_y(a) - c0) * (st.site_y(a) - c0);
    double db = (st.site_x(b) - c0) * (st.site_x(b) - c0) +
                (st.site_y(b) - c0) * (st.site_y(b) - c0);
    if (da != db) return da < db;
    return a < b;
  });
  for (int t = 0; t < num_tiers; ++t) {
    size_t k = 0;
    for (int c : tier_cells[t]) st.occupy(c, t, site_order[k++]);
  }

  st.net_epoch.assign(nl.num_nets(), -1);
  st.rebuild_cost();

  if (cfg.trace) {
    cfg.trace->initial.resize(st.n);
    for (int c = 0; c < st.n; ++c)
      cfg.trace->initial[c] = {st.x[c], st.y[c], st.tier[c]};
    cfg.trace->initial_cost = st.cur_cost;
    cfg.trace->accepted.clear();
  }

  rng::Engine eng = rng::make_engine(cfg.seed, 0x504c4143);

  auto eval_proposal = [&](const Proposal& p) {
    ++st.epoch;
    st.touched_nets.clear();
    st.collect_nets(p.cell_a);
    if (p.cell_b >= 0) st.collect_nets(p.cell_b);
    apply_coords(st, p);
    return st.touched_delta();
  };

  // auto temperature: mean uphill delta of sampled moves, pitched so
  // ~80% of them would accept
  double t0 = cfg.schedule.t0;
  if (t0 <= 0.0) {
    double uphill = 0.0;
    int count = 0;
    const int samples = std::min(1000, 20 * st.n);
    for (int i = 0; i < samples; ++i) {
      Proposal p;
      if (!propose(st, eng, cfg.balance_tol, p)) continue;
      double d = eval_proposal(p);
      revert_coords(st, p);
      if (d > 0) {
        uphill += d;
        ++count;
      }
    }
    t0 = count > 0 ? (uphill / count) / std::log(1.25) : 1.0;
  }

  // best-so-far snapshot; returned placement is the best state seen
  std::vector<double> best_x = st.x, best_y = st.y;
  std::vector<int> best_tier = st.tier;
  double best_cost = st.cur_cost;

  double temperature = t0;
  const long moves_per_temp =
      std::max<long>(1, static_cast<long>(cfg.schedule.moves_per_cell * st.n));
  int stagnant = 0;

  for (int step = 0; step < cfg.schedule.max_temperatures; ++step) {
    long accepted = 0;
    bool improved_best = false;
    for (long mv = 0; mv < moves_per_temp; ++mv) {
      Proposal p;
      if (!propose(st, eng, cfg.balance_tol, p)) continue;
      double delta = eval_proposal(p);
      bool accept = delta <= 0.0 ||
                    rng::uniform01(eng) < std::exp(-delta / temperature);
      if (!accept) {
        revert_coords(st, p);
        continue;
      }
      st.commit_touched(delta);
      commit_occupancy(st, p);
      ++accepted;
      if (cfg.trace)
        cfg.trace->accepted.push_back(
            {p.cell_a,
             {st.x[p.cell_a], st.y[p.cell_a], st.tier[p.cell_a]},
             p.cell_b,
             p.cell_b >= 0
                 ? Coord{st.x[p.cell_b], st.y[p.cell_b], st.tier[p.cell_b]}
                 : Coord{}});
      if (st.cur_cost < best_cost - 1e-12) {
        best_cost = st.cur_cost;
        best_x = st.x;
        best_y = st.y;
        best_tier = st.tier;
        improved_best = true;
      }
    }
    stagnant = improved_best ? 0 : stagnant + 1;
    double ratio =
        static_cast<double>(accepted) / static_cast<double>(moves_per_temp);
    if (ratio < cfg.schedule.min_accept) break;
    if (stagnant >= cfg.schedule.stagnation_temps) break;
    temperature *= cfg.schedule.cooling;
    if (temperature < 1e-12 * t0) break;
  }

  Placement pl;
  pl.width = st.width;
  pl.height = st.width;
  pl.num_tiers = num_tiers;
  for (int c = 0; c < st.n; ++c)
    pl.coords[nl.cell(c).id] = {best_x[c], best_y[c], best_tier[c]};
  return pl;
}

}  // namespace

Placement coplace(const Netlist& nl, const TierAssignment& assignment,
                  const PlaceConfig& cfg) {
  if (assignment.num_tiers < 1)
    throw std::invalid_argument("coplace: num_tiers must be >= 1");
  std::vector<int> tier_of(nl.num_cells(), 0);
  for (int c = 0; c < nl.num_cells(); ++c) {
    const Cell& cell = nl.cell(c);
    auto it = assignment.tier_of.find(cell.id);
    if (it != assignment.tier_of.end())
      tier_of[c] = it->second;
    else if (cell.fixed)
      tier_of[c] = cell.fixed_pos->tier;
    else
      throw std::invalid_argument("coplace: cell '" + cell.id +
                                  "' missing from tier assignment");
  }
  return anneal(nl, assignment.num_tiers, tier_of, cfg, cfg.footprint_scale);
}

Placement place_2d(const Netlist& nl, const PlaceConfig& cfg) {
  std::vector<int> tier_of(nl.num_cells(), 0);
  for (int c = 0; c < nl.num_cells(); ++c)
    if (nl.cell(c).fixed && nl.cell(c).fixed_pos->tier != 0)
      throw std::invalid_argument("place_2d: fixed cell '" + nl.cell(c).id +
                                  "' not on tier 0");
  return anneal(nl, 1, tier_of, cfg, 1.0);
}

double recommended_via_penalty(const Netlist& nl, const TierAssignment& ta,
                               const PlaceConfig& cfg) {
  const double area_fp = cfg.footprint_scale * nl.total_cell_area() /
                         cfg.target_utilization;
  std::vector<int> per_tier(std::max(1, ta.num_tiers), 0);
  for (int c = 0; c < nl.num_cells(); ++c) {
    const Cell& cell = nl.cell(c);
    if (cell.fixed) continue;
    auto it = ta.tier_of.find(cell.id);
    int t = it == ta.tier_of.end() ? 0 : it->second;
    if (t >= 0 && t < static_cast<int>(per_tier.size())) ++per_tier[t];
  }
  int max_cells = 1;
  for (int c : per_tier) max_cells = std::max(max_cells, c);
  SiteGrid grid = site_grid_for(max_cells, std::sqrt(area_fp), cfg.site_fill);
  return 2.0 * grid.pitch;
}

}  // namespace stack3d
