#include "stack3d/pdn.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "nlohmann/json.hpp"
#include "stack3d/errors.hpp"
#include "stack3d/io.hpp"

namespace stack3d {

long bump_count(double footprint_mm2, double pitch_um) {
  if (!(footprint_mm2 > 0.0))
    throw std::invalid_argument("bump_count: footprint must be > 0");
  if (!(pitch_um > 0.0))
    throw std::invalid_argument("bump_count: pitch must be > 0");
  const double side_mm = std::sqrt(footprint_mm2);
  const double pitch_mm = pitch_um / 1000.0;
  const long per_side = static_cast<long>(std::floor(side_mm / pitch_mm + 1e-12));
  if (per_side < 1)
    throw ModelError("bump_count: footprint " + std::to_string(footprint_mm2) +
                     " mm2 too small for one bump at pitch " +
                     std::to_string(pitch_um) + " um");
  return per_side * per_side;
}

PdnReport analyze(const PdnSpec& spec) {
  if (!(spec.total_power_w > 0.0))
    throw std::invalid_argument("analyze: total power must be > 0");
  if (!(spec.vdd_v > 0.0))
    throw std::invalid_argument("analyze: vdd must be > 0");
  PdnReport rep;
  rep.bump_count = bump_count(spec.footprint_mm2, spec.bump_pitch_um);
  rep.current_per_bump_a =
      spec.total_power_w / (spec.vdd_v * static_cast<double>(rep.bump_count));
  rep.power_density_w_mm2 = spec.total_power_w / spec.footprint_mm2;
  return rep;
}

IrSolution solve_ir(const PdnSpec& spec, const std::vector<LoadPoint>& loads) {
  if (!spec.has_mesh())
    throw std::invalid_argument("solve_ir: no mesh sheet resistance configured");
  if (spec.grid < 2)
    throw std::invalid_argument("solve_ir: grid must be >= 2");
  if (!(spec.damping > 0.0 && spec.damping <= 1.0))
    throw std::invalid_argument("solve_ir: damping must be in (0,1]");

  const int m = spec.grid;
  const double side = std::sqrt(spec.footprint_mm2);
  const double h = side / m;

  IrSolution sol;
  sol.grid = m;
  sol.side_mm = side;
  sol.drop_v.assign(static_cast<size_t>(m) * m, 0.0);
  sol.is_bump.assign(static_cast<size_t>(m) * m, 0);
  sol.sink_current_a.assign(static_cast<size_t>(m) * m, 0.0);

  auto node_of = [&](double v_mm) {
    int i = static_cast<int>(std::lround(v_mm / h - 0.5));
    return std::clamp(i, 0, m - 1);
  };

  // bumps on the square grid implied by the pitch, centered
  const long bumps_per_side_l = static_cast<long>(
      std::floor(side / (spec.bump_pitch_um / 1000.0) + 1e-12));
  if (bumps_per_side_l < 1)
    throw ModelError("solve_ir: footprint too small for one bump");
  const int k = static_cast<int>(bumps_per_side_l);
  const double pitch_mm = spec.bump_pitch_um / 1000.0;
  const double start = (side - (k - 1) * pitch_mm) / 2.0;
  for (int bi = 0; bi < k; ++bi)
    for (int bj = 0; bj < k; ++bj) {
      int ix = node_of(start + bi * pitch_mm);
      int iy = node_of(start + bj * pitch_mm);
      sol.is_bump[static_cast<size_t>(iy) * m + ix] = 1;
    }

  double total_current = 0.0;
  for (const LoadPoint& load : loads) {
    if (load.power_w < 0.0)
      throw std::invalid_argument("solve_ir: negative load power");
    if (load.x_mm < -1e-9 || load.x_mm > side + 1e-9 || load.y_mm < -1e-9 ||
        load.y_mm > side + 1e-9)
      throw ModelError("solve_ir: load at (" + std::to_string(load.x_mm) + ", " +
                       std::to_string(load.y_mm) + ") mm lies outside the " +
                       std::to_string(side) + " mm footprint");
    double amps = load.power_w / spec.vdd_v;
    sol.sink_current_a[static_cast<size_t>(node_of(load.y_mm)) * m +
                       node_of(load.x_mm)] += amps;
    total_current += amps;
  }

  if (total_current <= 0.0) {
    sol.worst_drop_v = 0.0;
    return sol;
  }

  // uniform mesh: every edge is one square of sheet resistance
  const double g = 1.0 / spec.mesh_sheet_ohm_sq;
  const double tol = spec.residual_tol * total_current;
  const double omega = spec.damping;

  auto idx = [m](int ix, int iy) { return static_cast<size_t>(iy) * m + ix; };

  long sweep = 0;
  for (; sweep < spec.max_sweeps; ++sweep) {
    // damped Gauss-Seidel pass
    for (int iy = 0; iy < m; ++iy) {
      for (int ix = 0; ix < m; ++ix) {
        size_t u = idx(ix, iy);
        if (sol.is_bump[u]) continue;
        double num = sol.sink_current_a[u];
        double den = 0.0;
        if (ix > 0) { num += g * sol.drop_v[idx(ix - 1, iy)]; den += g; }
        if (ix < m - 1) { num += g * sol.drop_v[idx(ix + 1, iy)]; den += g; }
        if (iy > 0) { num += g * sol.drop_v[idx(ix, iy - 1)]; den += g; }
        if (iy < m - 1) { num += g * sol.drop_v[idx(ix, iy + 1)]; den += g; }
        double gs = num / den;
        sol.drop_v[u] = (1.0 - omega) * sol.drop_v[u] + omega * gs;
      }
    }
    // Kirchhoff residual every few sweeps
    if (sweep % 8 != 7) continue;
    double res = 0.0;
    for (int iy = 0; iy < m; ++iy) {
      for (int ix = 0; ix < m; ++ix) {
        size_t u = idx(ix, iy);
        if (sol.is_bump[u]) continue;
        double flow = 0.0;
        if (ix > 0) flow += g * (sol.drop_v[u] - sol.drop_v[idx(ix - 1, iy)]);
        if (ix < m - 1) flow += g * (sol.drop_v[u] - sol.drop_v[idx(ix + 1, iy)]);
        if (iy > 0) flow += g * (sol.drop_v[u] - sol.drop_v[idx(ix, iy - 1)]);
        if (iy < m - 1) flow += g * (sol.drop_v[u] - sol.drop_v[idx(ix, iy + 1)]);
        res += std::abs(sol.sink_current_a[u] - flow);
      }
    }
    if (res < tol) break;
  }
  if (sweep >= spec.max_sweeps)
    throw ModelError("solve_ir: relaxation did not reach residual " +
                     std::to_string(tol) + " A in " +
                     std::to_string(spec.max_sweeps) + " sweeps");

  sol.sweeps = sweep + 1;
  sol.worst_drop_v =
      *std::max_element(sol.drop_v.begin(), sol.drop_v.end());
  return sol;
}

double ir_drop_mv(const PdnSpec& spec, const std::vector<LoadPoint>& loads) {
  return solve_ir(spec, loads).worst_drop_v * 1000.0;
}

PdnReport analyze_with_loads(const PdnSpec& spec,
                             const std::vector<LoadPoint>& loads) {
  PdnReport rep = analyze(spec);
  if (spec.has_mesh()) rep.worst_ir_drop_mv = ir_drop_mv(spec, loads);
  return rep;
}

std::string pdn_report_json(const PdnReport& report) {
  nlohmann::ordered_json j;
  j["bump_count"] = report.bump_count;
  j["current_per_bump_A"] = report.current_per_bump_a;
  j["power_density_W_mm2"] = report.power_density_w_mm2;
  if (report.worst_ir_drop_mv)
    j["worst_ir_drop_mV"] = *report.worst_ir_drop_mv;
  return j.dump(2) + "\n";
}

void write_voltage_csv(std::ostream& out, const IrSolution& sol) {
  out << "x_mm,y_mm,drop_mv\n";
  const double h = sol.side_mm / sol.grid;
  for (int iy = 0; iy < sol.grid; ++iy)
    for (int ix = 0; ix < sol.grid; ++ix)
      out << format_g6((ix + 0.5) * h) << ',' << format_g6((iy + 0.5) * h) << ','
          << format_g6(sol.drop_v[static_cast<size_t>(iy) * sol.grid + ix] * 1000.0)
          << '\n';
}

}  // namespace stack3d
