#include "stack3d/explorer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "nlohmann/json.hpp"
#include "stack3d/cost_yield.hpp"
#include "stack3d/errors.hpp"
#include "stack3d/io.hpp"
#include "stack3d/netlist.hpp"
#include "stack3d/pdn.hpp"
#include "stack3d/synthetic.hpp"
#include "stack3d/tier_place.hpp"
#include "stack3d/timing.hpp"

namespace stack3d {

namespace {

using nlohmann::ordered_json;

// ---------------------------------------------------------------- helpers

template <typename Fn>
void parallel_for(int count, int jobs, Fn&& fn) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

TechNode node_from_config(const Config& cfg, const std::string& name) {
  const std::string p = "node." + name + ".";
  if (!cfg.has(p + "d0"))
    throw ConfigError("node '" + name + "' not defined (missing " + p + "d0)");
  TechNode node;
  node.name = name;
  node.d0 = cfg.req_double(p + "d0");
  node.alpha = cfg.get_double(p + "alpha",
                              std::numeric_limits<double>::infinity());
  node.wafer_cost = cfg.get_double(p + "wafer_cost", 10000.0);
  node.wafer_diameter = cfg.get_double(p + "wafer_diameter", 300.0);
  node.area_scale = cfg.get_double(p + "area_scale", 1.0);
  if (node.d0 < 0 || node.wafer_cost <= 0 || node.wafer_diameter <= 0 ||
      node.area_scale <= 0)
    throw ConfigError("node '" + name + "': invalid parameter");
  return node;
}

CostModel cost_model_from_config(const Config& cfg) {
  CostModel model;
  const std::string dpw = cfg.get_str("cost.dpw_model", "ideal");
  if (dpw == "ideal")
    model.dpw_model = DpwModel::kIdealAreaRatio;
  else if (dpw == "edge_loss")
    model.dpw_model = DpwModel::kEdgeLoss;
  else
    throw ConfigError("cost.dpw_model must be 'ideal' or 'edge_loss', got '" +
                      dpw + "'");
  model.repair_floor = cfg.get_double("cost.repair_floor", 0.95);
  return model;
}

ScenarioOptions scenario_options_from_config(const Config& cfg) {
  ScenarioOptions opts;
  opts.kgd = cfg.get_bool("cost.kgd", true);
  opts.bond_yield = cfg.get_double("cost.bond_yield", 1.0);
  opts.assembly_cost = cfg.get_double("cost.assembly_cost", 0.0);
  opts.kgd_test_cost = cfg.get_double("cost.kgd_test_cost", 0.0);
  opts.hetero_scale = cfg.get_double("cost.hetero_scale", 0.85);
  if (!(opts.bond_yield > 0.0 && opts.bond_yield <= 1.0))
    throw ConfigError("cost.bond_yield must be in (0,1]");
  return opts;
}

std::vector<double> areas_from_config(const Config& cfg) {
  const std::string raw = cfg.get_str("cost.areas", "500");
  std::vector<double> areas;
  if (raw.find(':') != std::string::npos) {
    double lo = 0, hi = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(raw);
    if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' ||
        step <= 0 || hi < lo)
      throw ConfigError("cost.areas range must be lo:hi:step, got '" + raw + "'");
    for (double a = lo; a <= hi + 1e-9; a += step) areas.push_back(a);
  } else {
    std::istringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      areas.push_back(std::stod(item));
    }
  }
  if (areas.empty()) throw ConfigError("cost.areas is empty");
  for (double a : areas)
    if (!(a > 0)) throw ConfigError("cost.areas: areas must be > 0");
  std::sort(areas.begin(), areas.end());
  return areas;
}

std::vector<std::uint64_t> seeds_from(const RunOptions& opts, const Config& cfg) {
  if (!opts.seeds.empty()) return opts.seeds;
  std::vector<std::uint64_t> seeds;
  for (const std::string& s : cfg.get_list("flow.seeds"))
    seeds.push_back(static_cast<std::uint64_t>(std::stoull(s)));
  if (seeds.empty())
    seeds.push_back(static_cast<std::uint64_t>(cfg.get_int("flow.seed", 1)));
  return seeds;
}

std::string hex16(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

// ----------------------------------------------------------------- roadmap

std::vector<RoadmapPoint> roadmap_table(
    const std::vector<std::pair<std::string, double>>& points) {
  std::vector<RoadmapPoint> out;
  out.reserve(points.size());
  for (const auto& [label, pitch] : points) {
    if (!(pitch > 0.0))
      throw std::invalid_argument("roadmap_table: non-positive pitch for '" +
                                  label + "'");
    RoadmapPoint p;
    p.label = label;
    p.pitch_um = pitch;
    p.density_per_mm2 = (1000.0 / pitch) * (1000.0 / pitch);
    out.push_back(std::move(p));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RoadmapPoint& a, const RoadmapPoint& b) {
                     return a.pitch_um > b.pitch_um;
                   });
  return out;
}

void run_roadmap(const RunOptions& opts) {
  std::vector<std::pair<std::string, double>> points;
  Config cfg;
  if (!opts.config_path.empty()) cfg = Config::from_file(opts.config_path.string());
  const auto entries = cfg.get_list("roadmap.points");
  if (entries.empty()) {
    // package bumps / hybrid bonding / monolithic vias
    points = {{"bump", 40.0}, {"hybrid_bond", 10.0}, {"monolithic", 0.1}};
  } else {
    for (const std::string& e : entries) {
      size_t colon = e.find(':');
      if (colon == std::string::npos)
        throw ConfigError("roadmap.points entries must be label:pitch_um, got '" +
                          e + "'");
      points.emplace_back(e.substr(0, colon), std::stod(e.substr(colon + 1)));
    }
  }
  auto table = roadmap_table(points);

  if (opts.format == "json") {
    ordered_json j = ordered_json::array();
    for (const RoadmapPoint& p : table) {
      ordered_json row;
      row["technology"] = p.label;
      row["pitch_um"] = p.pitch_um;
      row["density_per_mm2"] = p.density_per_mm2;
      j.push_back(row);
    }
    atomic_write_file(opts.out_dir / "roadmap.json", j.dump(2) + "\n");
    return;
  }
  std::ostringstream csv;
  csv << "technology,pitch_um,density_per_mm2\n";
  for (const RoadmapPoint& p : table)
    csv << p.label << ',' << format_g6(p.pitch_um) << ','
        << format_g6(p.density_per_mm2) << '\n';
  atomic_write_file(opts.out_dir / "roadmap.csv", csv.str());
}

// -------------------------------------------------------------------- cost

void run_cost(const RunOptions& opts) {
  Config cfg = Config::from_file(opts.config_path.string());
  const TechNode ref = node_from_config(cfg, cfg.req_str("cost.ref_node"));
  const std::string new_name = cfg.get_str("cost.new_node", "");
  const TechNode nn = new_name.empty() ? ref : node_from_config(cfg, new_name);
  const CostModel model = cost_model_from_config(cfg);
  const ScenarioOptions sopts = scenario_options_from_config(cfg);

  std::vector<Scenario> scenarios;
  for (const std::string& label : cfg.get_list("cost.scenarios"))
    scenarios.push_back(scenario_from_label(label));
  if (scenarios.empty())
    throw ConfigError("cost.scenarios: at least one scenario required");
  const bool needs_new = std::any_of(
      scenarios.begin(), scenarios.end(), [](Scenario s) {
        return s == Scenario::k2dShrink || s == Scenario::k3dHetero;
      });
  if (needs_new && new_name.empty())
    throw ConfigError("cost.new_node required for shrink/hetero scenarios");

  const std::vector<double> areas = areas_from_config(cfg);

  std::vector<std::vector<ScenarioRow>> by_area(areas.size());
  parallel_for(static_cast<int>(areas.size()), opts.jobs, [&](int i) {
    by_area[i] = scenario_compare(areas[i], ref, nn, scenarios, model, sopts);
  });

  if (opts.format == "json") {
    ordered_json rows = ordered_json::array();
    for (size_t s = 0; s < scenarios.size(); ++s)
      for (size_t a = 0; a < areas.size(); ++a) {
        const ScenarioRow& r = by_area[a][s];
        ordered_json row;
        row["scenario"] = r.name;
        row["total_area_mm2"] = r.total_area_mm2;
        row["composite_yield"] = r.cost.composite_yield;
        row["total_cost"] = r.cost.total;
        row["saving_pct"] = r.saving * 100.0;
        rows.push_back(row);
      }
    atomic_write_file(opts.out_dir / "cost.json", rows.dump(2) + "\n");
    return;
  }

  std::ostringstream csv;
  csv << "scenario,total_area_mm2,composite_yield,total_cost,saving_pct\n";
  for (size_t s = 0; s < scenarios.size(); ++s)
    for (size_t a = 0; a < areas.size(); ++a) {
      const ScenarioRow& r = by_area[a][s];
      csv << r.name << ',' << format_g6(r.total_area_mm2) << ','
          << format_g6(r.cost.composite_yield) << ',' << format_g6(r.cost.total)
          << ',' << format_g6(r.saving * 100.0) << '\n';
    }
  atomic_write_file(opts.out_dir / "cost.csv", csv.str());
}

// --------------------------------------------------------------- calibrate

void run_calibrate(const RunOptions& opts) {
  Config cfg = Config::from_file(opts.config_path.string());
  const TechNode ref = node_from_config(cfg, cfg.req_str("cost.ref_node"));
  const TechNode nn = node_from_config(cfg, cfg.req_str("cost.new_node"));
  const CostModel model = cost_model_from_config(cfg);
  const ScenarioOptions sopts = scenario_options_from_config(cfg);

  const double target = cfg.get_double("calibrate.target_saving", 0.13);
  const double area = cfg.get_double("cost.total_area", 500.0);
  const double area_scale = cfg.get_double("calibrate.area_scale", 0.7);
  const double lo = cfg.get_double("calibrate.ratio_lo", 1.0);
  const double hi = cfg.get_double("calibrate.ratio_hi", 4.0);

  Calibration cal = calibrate_shrink(target, area, ref, nn, area_scale, lo, hi,
                                     model, sopts);

  TechNode calibrated = nn;
  calibrated.area_scale = cal.area_scale;
  calibrated.wafer_cost = ref.wafer_cost * cal.wafer_cost_ratio;

  ordered_json j;
  j["target_saving"] = target;
  j["total_area_mm2"] = area;
  j["area_scale"] = cal.area_scale;
  j["wafer_cost_ratio"] = cal.wafer_cost_ratio;
  j["achieved_saving_pct"] = cal.achieved_saving * 100.0;
  j["bisection_iterations"] = cal.iterations;
  j["dpw_model"] = cfg.get_str("cost.dpw_model", "ideal");

  auto rows = scenario_compare(
      area, ref, calibrated,
      {Scenario::k2dShrink, Scenario::k3dHetero, Scenario::k3dSplitRef}, model,
      sopts);
  ordered_json sc;
  for (const ScenarioRow& r : rows) sc[r.name] = r.saving * 100.0;
  j["savings_at_ratio_pct"] = sc;

  // hetero saving is sensitive to how much the ported die shrinks; record
  // the whole band so the default is auditable
  ordered_json sens = ordered_json::array();
  for (double s = 0.70; s <= 1.0 + 1e-9; s += 0.05) {
    ScenarioOptions so = sopts;
    so.hetero_scale = s;
    auto r = scenario_compare(area, ref, calibrated, {Scenario::k3dHetero},
                              model, so);
    ordered_json row;
    row["hetero_scale"] = s;
    row["saving_pct"] = r.front().saving * 100.0;
    sens.push_back(row);
  }
  j["hetero_sensitivity"] = sens;

  atomic_write_file(opts.out_dir / "calibration.json", j.dump(2) + "\n");
}

// --------------------------------------------------------------------- pdn

namespace {

std::vector<LoadPoint> uniform_loads(double total_power, double footprint_mm2,
                                     int grid) {
  const double side = std::sqrt(footprint_mm2);
  std::vector<LoadPoint> loads;
  loads.reserve(static_cast<size_t>(grid) * grid);
  const double p = total_power / (static_cast<double>(grid) * grid);
  for (int j = 0; j < grid; ++j)
    for (int i = 0; i < grid; ++i)
      loads.push_back({(i + 0.5) * side / grid, (j + 0.5) * side / grid, p});
  return loads;
}

std::vector<LoadPoint> loads_from_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "x_mm,y_mm,power_w")
    throw ModelError("load file '" + path.string() +
                     "': expected header 'x_mm,y_mm,power_w'");
  std::vector<LoadPoint> loads;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    LoadPoint lp;
    char c1 = 0, c2 = 0;
    std::istringstream ss(line);
    if (!(ss >> lp.x_mm >> c1 >> lp.y_mm >> c2 >> lp.power_w) || c1 != ',' ||
        c2 != ',')
      throw ParseError(lineno, "bad load row '" + line + "'");
    loads.push_back(lp);
  }
  return loads;
}

PdnSpec pdn_spec_from_config(const Config& cfg, double footprint_mm2) {
  PdnSpec spec;
  spec.total_power_w = cfg.get_double("pdn.total_power", 10.0);
  spec.vdd_v = cfg.get_double("pdn.vdd", 1.0);
  spec.footprint_mm2 = footprint_mm2;
  spec.bump_pitch_um = cfg.get_double("pdn.bump_pitch", 1000.0);
  spec.mesh_sheet_ohm_sq = cfg.get_double("pdn.mesh_sheet_resistance", 0.0);
  spec.grid = cfg.get_int("pdn.grid", 32);
  spec.damping = cfg.get_double("pdn.damping", 0.9);
  return spec;
}

}  // namespace

void run_pdn(const RunOptions& opts) {
  Config cfg = Config::from_file(opts.config_path.string());
  PdnSpec spec = pdn_spec_from_config(cfg, cfg.req_double("pdn.footprint_mm2"));

  std::vector<LoadPoint> loads;
  const std::string load_src = cfg.get_str("pdn.loads", "uniform");
  if (spec.has_mesh()) {
    if (load_src == "uniform")
      loads = uniform_loads(spec.total_power_w, spec.footprint_mm2,
                            cfg.get_int("pdn.load_grid", 16));
    else
      loads = loads_from_csv(load_src);
  }

  PdnReport rep = analyze_with_loads(spec, loads);
  atomic_write_file(opts.out_dir / "pdn.json", pdn_report_json(rep));

  if (spec.has_mesh() && cfg.get_bool("pdn.dump_voltages", false)) {
    IrSolution sol = solve_ir(spec, loads);
    std::ostringstream csv;
    write_voltage_csv(csv, sol);
    atomic_write_file(opts.out_dir / "voltages.csv", csv.str());
  }
}

// -------------------------------------------------------------------- flow

namespace {

struct FlowSeedResult {
  std::uint64_t seed = 0;
  double hpwl_2d = 0.0, hpwl_3d = 0.0;
  long cut_nets = 0, vias = 0;
  PathStatsSummary stats;
};

struct FlowSetup {
  Netlist netlist;
  PlaceConfig place;
  DelayModel delay;
  double pdn_die_area_mm2 = 100.0;
};

FlowSetup flow_setup(const Config& cfg) {
  FlowSetup fs;
  const std::string netlist_path = cfg.get_str("flow.netlist", "");
  if (!netlist_path.empty()) {
    fs.netlist = parse_netlist_file(netlist_path);
  } else {
    SyntheticSpec spec;
    spec.n_cells = cfg.get_int("flow.synth.n", 1000);
    spec.rent_exponent = cfg.get_double("flow.synth.rent", 0.6);
    spec.avg_fanout = cfg.get_double("flow.synth.fanout", 3.0);
    spec.seed = static_cast<std::uint64_t>(cfg.get_int("flow.synth.seed", 1));
    fs.netlist = generate_synthetic(spec);
  }

  fs.place.footprint_scale = cfg.get_double("place.footprint_scale", 0.5);
  fs.place.balance_tol = cfg.get_double("place.balance_tol", 0.05);
  // negative marks "auto": resolved per run from the 3D site grid
  fs.place.via_penalty = cfg.get_double("place.via_penalty", -1.0);
  fs.place.target_utilization = cfg.get_double("place.utilization", 0.8);
  fs.place.site_fill = cfg.get_double("place.site_fill", 0.8);
  fs.place.schedule.t0 = cfg.get_double("place.t0", 0.0);
  fs.place.schedule.cooling = cfg.get_double("place.cooling", 0.95);
  fs.place.schedule.moves_per_cell = cfg.get_double("place.moves_per_cell", 100.0);
  fs.place.schedule.min_accept = cfg.get_double("place.min_accept", 0.01);

  fs.delay.wire_delay_per_um = cfg.get_double("timing.wire_delay_per_um", 0.003);
  fs.delay.tier_hop_delay = cfg.get_double("timing.tier_hop_delay", 0.0);
  fs.delay.via_penalty_um = cfg.get_double("timing.via_penalty", 0.0);

  fs.pdn_die_area_mm2 = cfg.get_double("pdn.die_area_mm2", 100.0);
  return fs;
}

// maps placed cells onto the PDN die area (relative positions preserved,
// per-cell power proportional to cell area)
std::vector<LoadPoint> placement_loads(const Netlist& nl, const Placement& pl,
                                       double die_area_mm2, double total_power) {
  const double side = std::sqrt(die_area_mm2);
  const double total_area = nl.total_cell_area();
  std::vector<LoadPoint> loads;
  loads.reserve(nl.cells().size());
  for (const Cell& c : nl.cells()) {
    const Coord& pos = pl.at(c.id);
    loads.push_back({pos.x / pl.width * side, pos.y / pl.height * side,
                     total_power * c.area / total_area});
  }
  return loads;
}

}  // namespace

void run_flow(const RunOptions& opts) {
  Config cfg = Config::from_file(opts.config_path.string());
  const FlowSetup fs = flow_setup(cfg);
  const Netlist& nl = fs.netlist;
  const std::vector<std::uint64_t> seeds = seeds_from(opts, cfg);
  const std::string cfg_hash = hex16(cfg.fingerprint());

  std::vector<FlowSeedResult> results(seeds.size());

  parallel_for(static_cast<int>(seeds.size()), opts.jobs, [&](int i) {
    const std::uint64_t seed = seeds[i];
    const std::filesystem::path seed_dir =
        opts.out_dir / ("seed_" + std::to_string(seed));

    PlaceConfig cfg2d = fs.place;
    cfg2d.seed = seed;
    cfg2d.via_penalty = 0.0;  // single tier, nothing to cross
    Placement pl2d = place_2d(nl, cfg2d);

    PlaceConfig cfg3d = fs.place;
    cfg3d.seed = seed;
    TierAssignment ta = fm_bipartition(nl, cfg3d.balance_tol, seed);
    if (cfg3d.via_penalty < 0.0)
      cfg3d.via_penalty = recommended_via_penalty(nl, ta, cfg3d);
    Placement pl3d = coplace(nl, ta, cfg3d);
    pl3d = legalize(pl3d, 0.0);

    auto rec2 = evaluate_paths(nl, pl2d, fs.delay);
    auto rec3 = evaluate_paths(nl, pl3d, fs.delay);
    PathStatsSummary stats = path_stats(rec2, rec3);

    FlowSeedResult& res = results[i];
    res.seed = seed;
    res.hpwl_2d = hpwl(nl, pl2d);  // plain geometric wirelength
    res.hpwl_3d = hpwl(nl, pl3d);
    res.cut_nets = ta.cut_nets;
    res.vias = count_3d_vias(nl, pl3d);
    res.stats = stats;

    // artifacts
    auto placement_text = [&](const Placement& pl, double wl, long cut) {
      std::ostringstream out;
      write_placement(out, nl, pl,
                      {{"seed", std::to_string(seed)},
                       {"config", cfg_hash},
                       {"hpwl_um", format_g6(wl)},
                       {"cut_nets", std::to_string(cut)}});
      return out.str();
    };
    atomic_write_file(seed_dir / "placement_2d.txt",
                      placement_text(pl2d, res.hpwl_2d, 0));
    atomic_write_file(seed_dir / "placement_3d.txt",
                      placement_text(pl3d, res.hpwl_3d, res.cut_nets));

    std::ostringstream csv2, csv3;
    write_path_csv(csv2, rec2, "2d");
    write_path_csv(csv3, rec3, "3d");
    atomic_write_file(seed_dir / "paths_2d.csv", csv2.str());
    atomic_write_file(seed_dir / "paths_3d.csv", csv3.str());
    atomic_write_file(seed_dir / "path_stats.json", path_stats_json(stats));

    // PDN comparison on the configured die area; 3D halves the footprint
    const double area2 = fs.pdn_die_area_mm2;
    const double area3 = fs.pdn_die_area_mm2 * fs.place.footprint_scale;
    PdnSpec spec2 = pdn_spec_from_config(cfg, area2);
    PdnSpec spec3 = pdn_spec_from_config(cfg, area3);
    PdnReport pdn2 = analyze_with_loads(
        spec2, spec2.has_mesh()
                   ? placement_loads(nl, pl2d, area2, spec2.total_power_w)
                   : std::vector<LoadPoint>{});
    PdnReport pdn3 = analyze_with_loads(
        spec3, spec3.has_mesh()
                   ? placement_loads(nl, pl3d, area3, spec3.total_power_w)
                   : std::vector<LoadPoint>{});
    atomic_write_file(seed_dir / "pdn_2d.json", pdn_report_json(pdn2));
    atomic_write_file(seed_dir / "pdn_3d.json", pdn_report_json(pdn3));
  });

  // aggregate summary in seed order
  ordered_json per_seed = ordered_json::array();
  int max_len_improved = 0, failing_not_worse = 0;
  double sum_delta_stddev = 0.0;
  for (const FlowSeedResult& r : results) {
    ordered_json row;
    row["seed"] = r.seed;
    row["hpwl_2d_um"] = r.hpwl_2d;
    row["hpwl_3d_um"] = r.hpwl_3d;
    row["cut_nets"] = r.cut_nets;
    row["vias_3d"] = r.vias;
    row["delta_max_length_um"] = r.stats.delta_max_length_um;
    row["delta_failing"] = r.stats.delta_failing;
    row["delta_stddev_um"] = r.stats.delta_stddev_um;
    per_seed.push_back(row);
    if (r.stats.delta_max_length_um <= 0.0) ++max_len_improved;
    if (r.stats.delta_failing <= 0) ++failing_not_worse;
    sum_delta_stddev += r.stats.delta_stddev_um;
  }
  ordered_json summary;
  summary["config"] = cfg_hash;
  summary["seeds"] = per_seed;
  summary["frac_max_length_not_worse"] =
      static_cast<double>(max_len_improved) / static_cast<double>(results.size());
  summary["frac_failing_not_worse"] =
      static_cast<double>(failing_not_worse) / static_cast<double>(results.size());
  summary["mean_delta_stddev_um"] =
      sum_delta_stddev / static_cast<double>(results.size());
  atomic_write_file(opts.out_dir / "flow_summary.json", summary.dump(2) + "\n");
}

}  // namespace stack3d
