#include "stack3d/cost_yield.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stack3d/errors.hpp"

namespace stack3d {

double yield_poisson(double area_mm2, double d0) {
  if (area_mm2 < 0.0) throw std::invalid_argument("yield_poisson: negative area");
  if (d0 < 0.0) throw std::invalid_argument("yield_poisson: negative d0");
  // d0 is per cm^2; mm^2 -> cm^2 is /100
  return std::exp(-(area_mm2 / 100.0) * d0);
}

double yield_negbin(double area_mm2, double d0, double alpha) {
  if (area_mm2 < 0.0) throw std::invalid_argument("yield_negbin: negative area");
  if (d0 < 0.0) throw std::invalid_argument("yield_negbin: negative d0");
  if (!(alpha > 0.0)) throw std::invalid_argument("yield_negbin: alpha must be > 0");
  if (std::isinf(alpha)) return yield_poisson(area_mm2, d0);
  double lambda = (area_mm2 / 100.0) * d0;
  return std::pow(1.0 + lambda / alpha, -alpha);
}

double node_yield(const TechNode& node, double area_mm2) {
  if (std::isinf(node.alpha)) return yield_poisson(area_mm2, node.d0);
  return yield_negbin(area_mm2, node.d0, node.alpha);
}

long dies_per_wafer(double die_area_mm2, double wafer_diameter_mm) {
  if (!(die_area_mm2 > 0.0))
    throw std::invalid_argument("dies_per_wafer: die area must be > 0");
  if (!(wafer_diameter_mm > 0.0))
    throw std::invalid_argument("dies_per_wafer: wafer diameter must be > 0");
  const double r = wafer_diameter_mm / 2.0;
  double estimate = std::numbers::pi * r * r / die_area_mm2 -
                    std::numbers::pi * wafer_diameter_mm /
                        std::sqrt(2.0 * die_area_mm2);
  if (estimate < 0.0) return 0;
  return static_cast<long>(std::floor(estimate));
}

double dies_per_wafer_model(double die_area_mm2, const TechNode& node,
                            DpwModel model) {
  if (model == DpwModel::kEdgeLoss)
    return static_cast<double>(dies_per_wafer(die_area_mm2, node.wafer_diameter));
  const double r = node.wafer_diameter / 2.0;
  return std::numbers::pi * r * r / die_area_mm2;
}

double die_yield(const DieSpec& die, const CostModel& model) {
  double y = node_yield(die.node, die.area);
  if (die.repairable) y = std::max(y, model.repair_floor);
  return y;
}

double die_cost(const DieSpec& die, const CostModel& model) {
  if (!(die.area > 0.0)) throw std::invalid_argument("die_cost: area must be > 0");
  double dpw = dies_per_wafer_model(die.area, die.node, model.dpw_model);
  if (dpw <= 0.0)
    throw ModelError("die_cost: zero dies per wafer for " +
                     std::to_string(die.area) + " mm2 on " +
                     std::to_string(die.node.wafer_diameter) + " mm wafer");
  return die.node.wafer_cost / (dpw * die_yield(die, model));
}

CostBreakdown stack_cost(const StackSpec& stack, const CostModel& model) {
  if (stack.dies.empty())
    throw std::invalid_argument("stack_cost: stack needs at least one die");
  if (!(stack.bond_yield > 0.0 && stack.bond_yield <= 1.0))
    throw std::invalid_argument("stack_cost: bond_yield must be in (0,1]");
  if (stack.assembly_cost < 0.0 || stack.kgd_test_cost < 0.0)
    throw std::invalid_argument("stack_cost: negative cost");

  const size_t n = stack.dies.size();
  const double bond = std::pow(stack.bond_yield, static_cast<double>(n - 1));

  CostBreakdown out;
  out.per_die_cost.reserve(n);

  if (stack.kgd_tested) {
    // pre-tested dies: only bonding losses compound
    for (const DieSpec& d : stack.dies)
      out.per_die_cost.push_back(die_cost(d, model) / bond);
    out.test = static_cast<double>(n) * stack.kgd_test_cost / bond;
    out.assembly = stack.assembly_cost / bond;
    out.composite_yield = bond;
  } else {
    // untested silicon: every die yield compounds through assembly
    double composite = bond;
    for (const DieSpec& d : stack.dies) composite *= die_yield(d, model);
    for (const DieSpec& d : stack.dies) {
      double dpw = dies_per_wafer_model(d.area, d.node, model.dpw_model);
      if (dpw <= 0.0) throw ModelError("stack_cost: zero dies per wafer");
      out.per_die_cost.push_back(d.node.wafer_cost / dpw / composite);
    }
    out.test = 0.0;
    out.assembly = stack.assembly_cost;
    out.composite_yield = composite;
  }

  out.total = out.assembly + out.test;
  for (double c : out.per_die_cost) out.total += c;
  return out;
}

double monolithic3d_cost(double total_area_mm2, const TechNode& node, int tiers,
                         double critical_area_factor, const CostModel& model,
                         double per_tier_cost) {
  if (tiers < 1) throw std::invalid_argument("monolithic3d_cost: tiers must be >= 1");
  if (!(critical_area_factor > 0.0 && critical_area_factor <= 1.0))
    throw std::invalid_argument(
        "monolithic3d_cost: critical_area_factor must be in (0,1]");
  if (per_tier_cost < 0.0)
    throw std::invalid_argument("monolithic3d_cost: negative per-tier cost");

  const double footprint = total_area_mm2 / tiers;
  const double critical_area = total_area_mm2 * critical_area_factor;
  const double yield = node_yield(node, critical_area);
  const double dpw = dies_per_wafer_model(footprint, node, model.dpw_model);
  if (dpw <= 0.0) throw ModelError("monolithic3d_cost: zero dies per wafer");
  const double wafer = node.wafer_cost * (1.0 + (tiers - 1) * per_tier_cost);
  return wafer / (dpw * yield);
}

Scenario scenario_from_label(const std::string& label) {
  if (label == "2D-ref") return Scenario::k2dRef;
  if (label == "2D-shrink") return Scenario::k2dShrink;
  if (label == "3D-split-ref") return Scenario::k3dSplitRef;
  if (label == "3D-hetero") return Scenario::k3dHetero;
  throw ConfigError("unknown scenario label '" + label + "'");
}

std::string scenario_label(Scenario s) {
  switch (s) {
    case Scenario::k2dRef: return "2D-ref";
    case Scenario::k2dShrink: return "2D-shrink";
    case Scenario::k3dSplitRef: return "3D-split-ref";
    case Scenario::k3dHetero: return "3D-hetero";
  }
  return "?";
}

namespace {

StackSpec bare_die(double area, const TechNode& node) {
  // a single untested die: total = die_cost, composite = die yield
  StackSpec s;
  s.dies.push_back({area, node, false});
  s.kgd_tested = false;
  s.bond_yield = 1.0;
  return s;
}

StackSpec two_die_stack(const DieSpec& a, const DieSpec& b,
                        const ScenarioOptions& opts) {
  StackSpec s;
  s.dies = {a, b};
  s.kgd_tested = opts.kgd;
  s.bond_yield = opts.bond_yield;
  s.assembly_cost = opts.assembly_cost;
  s.kgd_test_cost = opts.kgd_test_cost;
  return s;
}

}  // namespace

std::vector<ScenarioRow> scenario_compare(double total_area_mm2,
                                          const TechNode& ref_node,
                                          const TechNode& new_node,
                                          const std::vector<Scenario>& scenarios,
                                          const CostModel& model,
                                          const ScenarioOptions& opts) {
  if (!(total_area_mm2 > 0.0))
    throw std::invalid_argument("scenario_compare: total area must be > 0");

  const CostBreakdown baseline =
      stack_cost(bare_die(total_area_mm2, ref_node), model);

  std::vector<ScenarioRow> rows;
  rows.reserve(scenarios.size());
  for (Scenario sc : scenarios) {
    CostBreakdown cb;
    switch (sc) {
      case Scenario::k2dRef:
        cb = baseline;
        break;
      case Scenario::k2dShrink:
        cb = stack_cost(bare_die(total_area_mm2 * new_node.area_scale, new_node),
                        model);
        break;
      case Scenario::k3dSplitRef: {
        DieSpec half{total_area_mm2 / 2.0, ref_node, false};
        cb = stack_cost(two_die_stack(half, half, opts), model);
        break;
      }
      case Scenario::k3dHetero: {
        DieSpec ref_half{total_area_mm2 / 2.0, ref_node, false};
        DieSpec new_half{total_area_mm2 / 2.0 * opts.hetero_scale, new_node,
                         false};
        cb = stack_cost(two_die_stack(ref_half, new_half, opts), model);
        break;
      }
    }
    ScenarioRow row;
    row.name = scenario_label(sc);
    row.total_area_mm2 = total_area_mm2;
    row.cost = cb;
    row.saving = 1.0 - cb.total / baseline.total;
    rows.push_back(std::move(row));
  }
  return rows;
}

Calibration calibrate_shrink(double target_saving, double total_area_mm2,
                             const TechNode& ref_node,
                             const TechNode& new_node_template,
                             double area_scale, double ratio_lo, double ratio_hi,
                             const CostModel& model, const ScenarioOptions& opts) {
  if (!(ratio_lo <= ratio_hi))
    throw std::invalid_argument("calibrate_shrink: ratio_lo > ratio_hi");
  if (!(area_scale > 0.0))
    throw std::invalid_argument("calibrate_shrink: area_scale must be > 0");

  auto saving_at = [&](double ratio) {
    TechNode nn = new_node_template;
    nn.area_scale = area_scale;
    nn.wafer_cost = ref_node.wafer_cost * ratio;
    auto rows = scenario_compare(total_area_mm2, ref_node, nn,
                                 {Scenario::k2dShrink}, model, opts);
    return rows.front().saving;
  };

  const double tol = 1e-3;
  double f_lo = saving_at(ratio_lo);  // saving decreases as ratio grows
  double f_hi = saving_at(ratio_hi);

  Calibration result;
  result.area_scale = area_scale;

  if (std::abs(f_lo - target_saving) <= tol && ratio_lo == ratio_hi) {
    result.wafer_cost_ratio = ratio_lo;
    result.achieved_saving = f_lo;
    return result;
  }
  if (target_saving > f_lo || target_saving < f_hi) {
    throw ModelError(
        "calibrate_shrink: target " + std::to_string(target_saving) +
        " unreachable in ratio bounds [" + std::to_string(ratio_lo) + ", " +
        std::to_string(ratio_hi) + "]: saving(" + std::to_string(ratio_lo) +
        ") = " + std::to_string(f_lo) + ", saving(" + std::to_string(ratio_hi) +
        ") = " + std::to_string(f_hi));
  }

  double lo = ratio_lo, hi = ratio_hi;
  double mid = 0.5 * (lo + hi);
  double f_mid = saving_at(mid);
  int iter = 0;
  while (std::abs(f_mid - target_saving) > tol && iter < 200) {
    if (f_mid > target_saving)
      lo = mid;  // saving too high -> wafer ratio must rise
    else
      hi = mid;
    mid = 0.5 * (lo + hi);
    f_mid = saving_at(mid);
    ++iter;
  }
  if (std::abs(f_mid - target_saving) > tol)
    throw ModelError("calibrate_shrink: bisection did not converge");

  result.wafer_cost_ratio = mid;
  result.achieved_saving = f_mid;
  result.iterations = iter;
  return result;
}

}  // namespace stack3d
