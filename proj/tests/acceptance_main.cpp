// Acceptance suite: one pass/fail line per criterion, non-zero exit when
// any criterion fails. Criterion 7 shells out to the CLI binary passed
// via --cli; scratch space goes under --work.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "stack3d/cost_yield.hpp"
#include "stack3d/io.hpp"
#include "stack3d/netlist.hpp"
#include "stack3d/pdn.hpp"
#include "stack3d/rng.hpp"
#include "stack3d/synthetic.hpp"
#include "stack3d/tier_place.hpp"
#include "stack3d/timing.hpp"

namespace fs = std::filesystem;
using namespace stack3d;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
};

#define REQUIRE_THAT(outcome, cond, text)                       \
  do {                                                          \
    if (!(cond)) {                                              \
      (outcome).pass = false;                                   \
      (outcome).detail << " [FAILED: " << text << "]";          \
    }                                                           \
  } while (0)

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

TechNode node7() {
  TechNode n;
  n.name = "7nm";
  n.d0 = 0.15;
  n.wafer_cost = 10000.0;
  return n;
}

TechNode node5() {
  TechNode n;
  n.name = "5nm";
  n.d0 = 0.2;
  n.wafer_cost = 10000.0;  // overwritten by calibration
  return n;
}

// ---------------------------------------------------------------------
// C1: same-node 3D split saving lands in [30%, 33%]
Outcome criterion1() {
  Outcome out;
  const CostModel model;  // ideal inverse-area dies-per-wafer
  StackSpec whole;
  whole.dies = {{500.0, node7(), false}};
  whole.kgd_tested = false;
  StackSpec split;
  split.dies = {{250.0, node7(), false}, {250.0, node7(), false}};
  split.kgd_tested = true;  // perfect bond/test/assembly by default

  double c2d = stack_cost(whole, model).total;
  double c3d = stack_cost(split, model).total;
  double saving = 1.0 - c3d / c2d;
  out.detail << "saving=" << saving * 100.0 << "% (closed form "
             << (1.0 - std::exp(-0.375)) * 100.0 << "%)";
  REQUIRE_THAT(out, saving >= 0.30 && saving <= 0.33,
               "saving outside [30%, 33%]");

  // the edge-loss estimator only strengthens the split advantage
  CostModel edges;
  edges.dpw_model = DpwModel::kEdgeLoss;
  double saving_edges =
      1.0 - stack_cost(split, edges).total / stack_cost(whole, edges).total;
  out.detail << "; with edge-loss dies-per-wafer " << saving_edges * 100.0
             << "%";
  REQUIRE_THAT(out, saving_edges > saving,
               "edge effects should push the saving upward");
  return out;
}

// ---------------------------------------------------------------------
// C2: calibrated scenario ordering shrink < hetero < split
Outcome criterion2() {
  Outcome out;
  const CostModel model;
  ScenarioOptions opts;  // kgd, perfect interfaces, hetero_scale 0.85

  Calibration cal =
      calibrate_shrink(0.13, 500.0, node7(), node5(), 0.7, 1.0, 4.0, model, opts);
  TechNode n5 = node5();
  n5.area_scale = cal.area_scale;
  n5.wafer_cost = node7().wafer_cost * cal.wafer_cost_ratio;

  auto rows = scenario_compare(500.0, node7(), n5,
                               {Scenario::k2dShrink, Scenario::k3dHetero,
                                Scenario::k3dSplitRef},
                               model, opts);
  double shrink = rows[0].saving, hetero = rows[1].saving,
         split = rows[2].saving;
  out.detail << "shrink=" << shrink * 100.0 << "%, hetero=" << hetero * 100.0
             << "% (paper anchor 26%), split=" << split * 100.0
             << "%, wafer-cost ratio=" << cal.wafer_cost_ratio;

  REQUIRE_THAT(out, std::abs(shrink - 0.13) <= 1e-3 + 1e-12,
               "shrink saving not pinned to 13.0% +/- 0.1pp");
  REQUIRE_THAT(out, shrink < hetero && hetero < split,
               "ordering shrink < hetero < split violated");
  REQUIRE_THAT(out, split >= 0.30 && split <= 0.33,
               "split saving outside [30%, 33%]");

  // sensitivity of the hetero scenario to its shrink assumption
  out.detail << "; hetero over scale 0.7..1.0:";
  for (double s : {0.70, 0.85, 1.00}) {
    ScenarioOptions so = opts;
    so.hetero_scale = s;
    auto r = scenario_compare(500.0, node7(), n5, {Scenario::k3dHetero}, model,
                              so);
    out.detail << " " << r.front().saving * 100.0 << "%";
  }
  return out;
}

// ---------------------------------------------------------------------
// C3: yield formulas vs Monte-Carlo scatter; dies-per-wafer vs packing
Outcome criterion3() {
  Outcome out;
  for (double area : {250.0, 500.0}) {
    for (double d0 : {0.15, 0.2}) {
      auto mc = oracles::mc_yield_poisson(area, d0, 300.0, 300000, 2026);
      double formula = yield_poisson(area, d0);
      double dev = std::abs(formula - mc.mean);
      REQUIRE_THAT(out, dev <= 3.0 * mc.std_error,
                   "poisson(" << area << "," << d0 << ") off by " << dev
                              << " > 3*SE=" << 3.0 * mc.std_error);

      auto mcn = oracles::mc_yield_negbin(area, d0, 2.0, 300000, 2027);
      double formula_nb = yield_negbin(area, d0, 2.0);
      double devn = std::abs(formula_nb - mcn.mean);
      REQUIRE_THAT(out, devn <= 3.0 * mcn.std_error,
                   "negbin(" << area << "," << d0 << ") off by " << devn
                             << " > 3*SE=" << 3.0 * mcn.std_error);
    }
  }
  out.detail << "yield formulas within 3 sigma of defect-scatter MC";

  double worst_rel = 0.0;
  for (int a = 50; a <= 900; a += 50) {
    long formula = dies_per_wafer(a, 300.0);
    long oracle = oracles::packing_dies_per_wafer(a, 300.0);
    double rel = std::abs(static_cast<double>(formula - oracle)) /
                 static_cast<double>(oracle);
    worst_rel = std::max(worst_rel, rel);
    REQUIRE_THAT(out, rel <= 0.05, "dies_per_wafer(" << a << ") deviates "
                                                     << rel * 100.0 << "%");
  }
  out.detail << "; dies-per-wafer worst deviation " << worst_rel * 100.0
             << "% vs packing";
  return out;
}

// ---------------------------------------------------------------------
// C4: FM partitioner vs exhaustive balanced min cut
Outcome criterion4() {
  Outcome out;
  {
    std::istringstream chain(
        "cell a 1 0\ncell b 1 0\ncell c 1 0\ncell d 1 0\n"
        "net ab a b\nnet bc b c\nnet cd c d\n");
    TierAssignment ta = fm_bipartition(parse_netlist(chain), 0.0, 1);
    REQUIRE_THAT(out, ta.cut_nets == 1, "chain cut " << ta.cut_nets << " != 1");
  }
  {
    std::istringstream k4(
        "cell a 1 0\ncell b 1 0\ncell c 1 0\ncell d 1 0\n"
        "net ab a b\nnet ac a c\nnet ad a d\nnet bc b c\nnet bd b d\n"
        "net cd c d\n");
    TierAssignment ta = fm_bipartition(parse_netlist(k4), 0.0, 1);
    REQUIRE_THAT(out, ta.cut_nets == 4, "K4 cut " << ta.cut_nets << " != 4");
  }

  rng::Engine eng = rng::make_engine(40412);
  long worst_num = 0, worst_den = 1;
  for (int inst = 0; inst < 100; ++inst) {
    int n = 4 + 2 * static_cast<int>(rng::uniform_below(eng, 5));  // 4..12
    std::vector<Cell> cells(n);
    for (int i = 0; i < n; ++i)
      cells[i] = {"c" + std::to_string(i), 1.0, 0.0, false, {}};
    std::vector<Net> nets;
    int net_count = n + static_cast<int>(rng::uniform_below(eng, n));
    for (int k = 0; nets.size() < static_cast<size_t>(net_count) && k < 10 * net_count;
         ++k) {
      int deg = 2 + static_cast<int>(rng::uniform_below(eng, 3));
      std::set<int> pins;
      while (static_cast<int>(pins.size()) < deg)
        pins.insert(static_cast<int>(rng::uniform_below(eng, n)));
      Net net;
      net.id = "n" + std::to_string(nets.size());
      for (int p : pins) net.pins.push_back(cells[p].id);
      nets.push_back(std::move(net));
    }
    Netlist nl(std::move(cells), std::move(nets), {});

    long opt = oracles::brute_force_min_cut(nl, 0.0);
    TierAssignment ta = fm_bipartition(nl, 0.0, 7000 + inst);
    REQUIRE_THAT(out, ta.cut_nets >= opt, "FM beat the exhaustive optimum?!");
    REQUIRE_THAT(out, static_cast<double>(ta.cut_nets) <= 1.5 * opt + 1e-9,
                 "instance " << inst << ": FM cut " << ta.cut_nets
                             << " > 1.5x optimal " << opt);
    if (ta.cut_nets * worst_den > worst_num * opt) {
      worst_num = ta.cut_nets;
      worst_den = opt;
    }
  }
  out.detail << "chain/K4 exact; worst FM/opt ratio " << worst_num << "/"
             << worst_den << " over 100 instances";
  return out;
}

// ---------------------------------------------------------------------
// C5: 3D flow tightens the path-length distribution across 20 seeds
Outcome criterion5() {
  Outcome out;
  const int kSeeds = 20;
  Netlist nl = generate_synthetic(1000, 0.6, 3.0, 7);
  DelayModel delay;  // defaults
  PlaceConfig base;  // footprint_scale 0.5, via_penalty 0

  struct SeedResult {
    bool max_not_worse = false, failing_not_worse = false;
    double delta_stddev = 0.0;
    long fail2 = 0, fail3 = 0;
  };
  std::vector<SeedResult> results(kSeeds);

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < kSeeds; i = next.fetch_add(1)) {
      const std::uint64_t seed = 100 + i;
      PlaceConfig cfg = base;
      cfg.seed = seed;
      Placement p2 = place_2d(nl, cfg);
      TierAssignment ta = fm_bipartition(nl, cfg.balance_tol, seed);
      PlaceConfig cfg3 = cfg;
      cfg3.via_penalty = recommended_via_penalty(nl, ta, cfg3);
      Placement p3 = legalize(coplace(nl, ta, cfg3), 0.0);
      auto r2 = evaluate_paths(nl, p2, delay);
      auto r3 = evaluate_paths(nl, p3, delay);
      PathStatsSummary st = path_stats(r2, r3);
      results[i].max_not_worse = st.delta_max_length_um <= 0.0;
      results[i].failing_not_worse = st.delta_failing <= 0;
      results[i].delta_stddev = st.delta_stddev_um;
      results[i].fail2 = st.d2.failing;
      results[i].fail3 = st.d3.failing;
    }
  };
  int jobs = std::max(1u, std::min(4u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int both = 0;
  double mean_delta = 0.0;
  long fail2 = 0, fail3 = 0;
  for (const SeedResult& r : results) {
    if (r.max_not_worse && r.failing_not_worse) ++both;
    mean_delta += r.delta_stddev;
    fail2 += r.fail2;
    fail3 += r.fail3;
  }
  mean_delta /= kSeeds;

  out.detail << both << "/" << kSeeds
             << " seeds improve max length and failing count; mean "
                "delta stddev="
             << mean_delta << " um; total failing 2d=" << fail2
             << " 3d=" << fail3;
  REQUIRE_THAT(out, both >= static_cast<int>(0.8 * kSeeds),
               "fewer than 80% of seeds improve");
  REQUIRE_THAT(out, mean_delta < 0.0, "mean stddev delta not negative");
  return out;
}

// ---------------------------------------------------------------------
// C6: PDN arithmetic exactness and solver agreement
Outcome criterion6() {
  Outcome out;
  PdnSpec full;
  full.total_power_w = 10.0;
  full.vdd_v = 1.0;
  full.footprint_mm2 = 100.0;
  full.bump_pitch_um = 1000.0;
  PdnSpec half = full;
  half.footprint_mm2 = 50.0;

  PdnReport rf = analyze(full);
  PdnReport rh = analyze(half);
  double current_ratio = rh.current_per_bump_a / rf.current_per_bump_a;
  double density_ratio = rh.power_density_w_mm2 / rf.power_density_w_mm2;
  out.detail << "current ratio=" << current_ratio
             << ", density ratio=" << density_ratio;
  REQUIRE_THAT(out, current_ratio >= 1.9 && current_ratio <= 2.2,
               "current ratio outside [1.9, 2.2]");
  REQUIRE_THAT(out, density_ratio == 2.0, "density ratio not exactly 2.0");

  rng::Engine eng = rng::make_engine(606);
  double worst = 0.0;
  for (int grid : {8, 12, 16, 20}) {
    PdnSpec s = full;
    s.mesh_sheet_ohm_sq = 0.04;
    s.grid = grid;
    std::vector<LoadPoint> loads;
    for (int i = 0; i < 30; ++i)
      loads.push_back({rng::uniform(eng, 0, 10), rng::uniform(eng, 0, 10),
                       rng::uniform(eng, 0.05, 0.6)});
    IrSolution sol = solve_ir(s, loads);
    auto dense = oracles::dense_ir_solve(s, loads);
    double dense_max = *std::max_element(dense.begin(), dense.end());
    double rel = std::abs(sol.worst_drop_v - dense_max) / dense_max;
    worst = std::max(worst, rel);
    REQUIRE_THAT(out, rel <= 1e-3, "grid " << grid << ": relaxation off by "
                                           << rel * 100.0 << "%");
  }
  out.detail << "; worst solver deviation " << worst * 100.0 << "% vs dense";
  return out;
}

// ---------------------------------------------------------------------
// C7: every subcommand is byte-deterministic, including --jobs > 1
struct CliEnv {
  fs::path cli;
  fs::path work;
};

int run_cmd(const CliEnv& env, const std::string& args) {
  std::string cmd = env.cli.string() + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

bool trees_identical(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<fs::path> rel;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), a));
  std::sort(rel.begin(), rel.end());
  if (rel.empty()) {
    why = "no artifacts under " + a.string();
    return false;
  }
  for (const fs::path& r : rel) {
    if (!fs::exists(b / r)) {
      why = "missing " + (b / r).string();
      return false;
    }
    if (read_file(a / r) != read_file(b / r)) {
      why = "differs: " + r.string();
      return false;
    }
  }
  return true;
}

Outcome criterion7(const CliEnv& env) {
  Outcome out;
  if (env.cli.empty() || !fs::exists(env.cli)) {
    out.pass = false;
    out.detail << "[FAILED: CLI binary not found at '" << env.cli.string()
               << "'; pass --cli]";
    return out;
  }
  fs::remove_all(env.work);
  fs::create_directories(env.work);

  std::ofstream(env.work / "cost.cfg")
      << "node.7nm.d0 = 0.15\nnode.7nm.wafer_cost = 9500\n"
         "node.5nm.d0 = 0.2\nnode.5nm.wafer_cost = 12412\n"
         "node.5nm.area_scale = 0.7\n"
         "cost.ref_node = 7nm\ncost.new_node = 5nm\n"
         "cost.scenarios = 2D-ref,2D-shrink,3D-split-ref,3D-hetero\n"
         "cost.areas = 100:900:100\ncost.total_area = 500\n";
  std::ofstream(env.work / "pdn.cfg")
      << "pdn.total_power = 10\npdn.vdd = 1\npdn.footprint_mm2 = 100\n"
         "pdn.bump_pitch = 1000\npdn.mesh_sheet_resistance = 0.05\n"
         "pdn.grid = 16\npdn.dump_voltages = true\n";
  std::ofstream(env.work / "flow.cfg")
      << "flow.synth.n = 150\nflow.synth.seed = 3\n"
         "place.moves_per_cell = 40\n"
         "pdn.die_area_mm2 = 100\npdn.bump_pitch = 1000\n";

  struct Cmd {
    std::string name;
    std::string args;
  };
  const std::string wk = env.work.string();
  std::vector<Cmd> cmds = {
      {"roadmap", "roadmap --out "},
      {"cost", "cost --config " + wk + "/cost.cfg --jobs 3 --out "},
      {"calibrate", "calibrate --config " + wk + "/cost.cfg --out "},
      {"pdn", "pdn --config " + wk + "/pdn.cfg --out "},
      {"flow",
       "flow --config " + wk + "/flow.cfg --seed 1,2 --jobs 2 --out "},
  };

  for (const Cmd& c : cmds) {
    fs::path a = env.work / (c.name + "_a");
    fs::path b = env.work / (c.name + "_b");
    int rc1 = run_cmd(env, c.args + a.string());
    int rc2 = run_cmd(env, c.args + b.string());
    REQUIRE_THAT(out, rc1 == 0 && rc2 == 0,
                 c.name << " exited " << rc1 << "/" << rc2);
    if (rc1 != 0 || rc2 != 0) continue;
    std::string why;
    REQUIRE_THAT(out, trees_identical(a, b, why),
                 c.name << " not byte-identical (" << why << ")");
  }
  if (out.pass) out.detail << "roadmap, cost, calibrate, pdn, flow all stable";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CliEnv env;
  env.work = fs::temp_directory_path() / "stack3d_acceptance";
  for (int i = 1; i + 1 < argc; ++i) {
    std::string a = argv[i];
    if (a == "--cli") env.cli = argv[i + 1];
    if (a == "--work") env.work = argv[i + 1];
  }

  int failures = 0;
  auto report = [&failures](int id, const std::string& name, double budget_s,
                            Outcome out, double elapsed) {
    if (elapsed > budget_s) {
      out.pass = false;
      out.detail << " [FAILED: runtime " << elapsed << "s exceeds " << budget_s
                 << "s]";
    }
    std::printf("[%s] C%d %s: %s (%.2fs)\n", out.pass ? "PASS" : "FAIL", id,
                name.c_str(), out.detail.str().c_str(), elapsed);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  };

  auto timed = [&](int id, const std::string& name, double budget,
                   auto&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << "[FAILED: exception: " << e.what() << "]";
    }
    report(id, name, budget, std::move(out), seconds_since(t0));
  };

  timed(1, "split-saving reproduction", 1.0, criterion1);
  timed(2, "calibrated scenario ordering", 1.0, criterion2);
  timed(3, "yield-model oracle", 30.0, criterion3);
  timed(4, "partitioner oracle", 10.0, criterion4);
  timed(5, "3D path-statistics property", 300.0, criterion5);
  timed(6, "PDN exactness", 10.0, criterion6);
  timed(7, "subcommand determinism", 60.0,
        [&env] { return criterion7(env); });

  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all 7 criteria passed\n");
  return 0;
}
