#pragma once

#include <limits>
#include <string>
#include <vector>

namespace stack3d {

/// One process node. d0 is defect density in defects/cm^2 (areas below
/// are mm^2 and converted internally); alpha is the clustering parameter
/// of the negative-binomial yield law, infinity selecting Poisson.
/// area_scale is the die-area multiplier when porting a design here from
/// the reference node.
struct TechNode {
  std::string name;
  double d0 = 0.0;
  double alpha = std::numeric_limits<double>::infinity();
  double wafer_cost = 1.0;
  double wafer_diameter = 300.0;  // mm
  double area_scale = 1.0;
};

/// How dies-per-wafer enters die cost.
///   kIdealAreaRatio: usable wafer area / die area (fractional, no edge
///     loss). Cost then scales exactly as area/yield, which is the regime
///     the headline 2D-vs-3D comparisons are quoted in.
///   kEdgeLoss: the integer edge-loss estimate from dies_per_wafer().
enum class DpwModel { kIdealAreaRatio, kEdgeLoss };

struct CostModel {
  DpwModel dpw_model = DpwModel::kIdealAreaRatio;
  double repair_floor = 0.95;  // yield floor for repairable dies
};

double yield_poisson(double area_mm2, double d0);
double yield_negbin(double area_mm2, double d0, double alpha);

// dispatches on node.alpha (infinite => Poisson)
double node_yield(const TechNode& node, double area_mm2);

/// Integer dies per wafer with the standard edge-loss estimate
/// floor(pi (d/2)^2 / A - pi d / sqrt(2 A)), clamped at zero.
long dies_per_wafer(double die_area_mm2, double wafer_diameter_mm);

// fractional count under the configured model
double dies_per_wafer_model(double die_area_mm2, const TechNode& node,
                            DpwModel model);

struct DieSpec {
  double area = 0.0;  // mm^2
  TechNode node;
  bool repairable = false;  // memory-like layer with post-repair floor
};

// wafer_cost / (dies_per_wafer * yield); repairable dies floor the yield
double die_cost(const DieSpec& die, const CostModel& model);

// effective (post-repair) yield used in costing
double die_yield(const DieSpec& die, const CostModel& model);

struct StackSpec {
  std::vector<DieSpec> dies;  // >= 1
  bool kgd_tested = true;
  double bond_yield = 1.0;        // per bonding interface, (0,1]
  double assembly_cost = 0.0;
  double kgd_test_cost = 0.0;     // per die
};

struct CostBreakdown {
  std::vector<double> per_die_cost;
  double assembly = 0.0;
  double test = 0.0;
  double total = 0.0;  // = sum(per_die_cost) + assembly + test
  double composite_yield = 1.0;
};

/// KGD-tested stacks pay test cost but only compound bond yield;
/// untested stacks compound every die yield through assembly.
CostBreakdown stack_cost(const StackSpec& stack, const CostModel& model);

/// Sequential-3D cost: one die of footprint total_area/tiers whose
/// defect-sensitive area is total_area * critical_area_factor; each tier
/// beyond the first adds per_tier_cost * wafer_cost of processing.
double monolithic3d_cost(double total_area_mm2, const TechNode& node,
                         int tiers, double critical_area_factor,
                         const CostModel& model, double per_tier_cost = 1.0);

enum class Scenario { k2dRef, k2dShrink, k3dSplitRef, k3dHetero };

// "2D-ref", "2D-shrink", "3D-split-ref", "3D-hetero"
Scenario scenario_from_label(const std::string& label);
std::string scenario_label(Scenario s);

struct ScenarioOptions {
  bool kgd = true;
  double bond_yield = 1.0;
  double assembly_cost = 0.0;
  double kgd_test_cost = 0.0;
  // area multiplier applied to the new-node die of the 3D-hetero stack.
  // 1.0 would port that half at unchanged area; the default 0.85 models a
  // partial-shrink port (mixed logic/SRAM content scales worse than pure
  // logic) and keeps hetero between shrink and same-node split.
  double hetero_scale = 0.85;
};

struct ScenarioRow {
  std::string name;
  double total_area_mm2 = 0.0;
  CostBreakdown cost;
  double saving = 0.0;  // fraction vs 2D-ref
};

/// Evaluates the requested scenarios at one total area. Savings are
/// always relative to 2D-ref (one total_area die on ref_node), whether or
/// not 2D-ref is in the list.
std::vector<ScenarioRow> scenario_compare(double total_area_mm2,
                                          const TechNode& ref_node,
                                          const TechNode& new_node,
                                          const std::vector<Scenario>& scenarios,
                                          const CostModel& model,
                                          const ScenarioOptions& opts);

struct Calibration {
  double area_scale = 0.7;
  double wafer_cost_ratio = 1.0;  // new-node wafer cost / ref wafer cost
  double achieved_saving = 0.0;
  int iterations = 0;
};

/// Bisects the new-node wafer-cost ratio until the 2D-shrink saving at
/// total_area equals target_saving (tolerance 1e-3), holding area_scale
/// fixed. new_node_template supplies d0/alpha/diameter; its wafer cost is
/// overwritten by ratio * ref_node.wafer_cost.
Calibration calibrate_shrink(double target_saving, double total_area_mm2,
                             const TechNode& ref_node,
                             const TechNode& new_node_template,
                             double area_scale, double ratio_lo,
                             double ratio_hi, const CostModel& model,
                             const ScenarioOptions& opts);

}  // namespace stack3d
