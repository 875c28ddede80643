#pragma once

#include <cstdint>

#include "stack3d/netlist.hpp"

namespace stack3d {

/// Deterministic Rent-style benchmark generator. Cells live on a ring of
/// indices; net spans are drawn from a power-law so that the external
/// connection count of contiguous blocks follows T ~ k * G^p with
/// p ~ rent_exponent. A set of timing paths covering at least 5% of the
/// cells is declared along net-connected walks.
struct SyntheticSpec {
  int n_cells = 1000;
  double rent_exponent = 0.6;  // in (0,1)
  double avg_fanout = 3.0;     // >= 1, mean sinks per driven net
  std::uint64_t seed = 1;

  // cell property ranges
  double area_min = 0.5, area_max = 2.0;        // um^2
  double delay_min = 0.005, delay_max = 0.02;   // ns
  // path emission
  double path_cell_coverage = 0.10;             // fraction of cells on paths
  int path_len_min = 8, path_len_max = 25;
  double tightness_min = 1.5, tightness_max = 2.5;  // required / intrinsic
};

Netlist generate_synthetic(const SyntheticSpec& spec);

Netlist generate_synthetic(int n_cells, double rent_exponent,
                           double avg_fanout, std::uint64_t seed);

/// Fits log T vs log G over random contiguous index windows of the given
/// sizes (T = nets crossing the window boundary); returns the slope.
/// Diagnostic for generated benchmarks.
double measure_rent_exponent(const Netlist& nl, std::uint64_t seed = 123);

}  // namespace stack3d
