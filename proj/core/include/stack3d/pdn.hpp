#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stack3d {

struct PdnSpec {
  double total_power_w = 0.0;
  double vdd_v = 1.0;
  double footprint_mm2 = 0.0;
  double bump_pitch_um = 0.0;
  // optional resistive mesh for IR drop; 0 disables the solve
  double mesh_sheet_ohm_sq = 0.0;
  int grid = 32;            // mesh nodes per side
  double damping = 0.9;     // relaxation damping factor
  double residual_tol = 1e-9;  // relative to total sink current
  long max_sweeps = 2000000;

  bool has_mesh() const { return mesh_sheet_ohm_sq > 0.0; }
};

struct PdnReport {
  long bump_count = 0;
  double current_per_bump_a = 0.0;
  double power_density_w_mm2 = 0.0;
  std::optional<double> worst_ir_drop_mv;
};

/// Bumps on a square grid over a square footprint:
/// floor(sqrt(footprint)/pitch)^2. Errors when no bump fits.
long bump_count(double footprint_mm2, double pitch_um);

// current_per_bump = P/(V*N); power_density = P/footprint
PdnReport analyze(const PdnSpec& spec);

struct LoadPoint {
  double x_mm = 0.0;
  double y_mm = 0.0;
  double power_w = 0.0;
};

/// IR-drop mesh solution. drop_v is row-major grid x fastest; bump nodes
/// are clamped to zero drop.
struct IrSolution {
  int grid = 0;
  double side_mm = 0.0;
  std::vector<double> drop_v;
  std::vector<char> is_bump;
  std::vector<double> sink_current_a;
  double worst_drop_v = 0.0;
  long sweeps = 0;
};

/// Solves the bump-clamped resistive mesh with cell powers as current
/// sinks at their nearest node, by damped Gauss-Seidel relaxation to
/// residual_tol * total current.
IrSolution solve_ir(const PdnSpec& spec, const std::vector<LoadPoint>& loads);

double ir_drop_mv(const PdnSpec& spec, const std::vector<LoadPoint>& loads);

// analyze() plus the mesh solve when the spec carries one
PdnReport analyze_with_loads(const PdnSpec& spec,
                             const std::vector<LoadPoint>& loads);

std::string pdn_report_json(const PdnReport& report);

// node-voltage grid dump for plotting: x_mm,y_mm,drop_mv
void write_voltage_csv(std::ostream& out, const IrSolution& sol);

}  // namespace stack3d
