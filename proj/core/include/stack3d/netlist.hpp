#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace stack3d {

struct FixedPos {
  double x = 0.0;  // um
  double y = 0.0;  // um
  int tier = 0;
};

struct Cell {
  std::string id;
  double area = 1.0;   // um^2
  double delay = 0.0;  // ns, intrinsic gate delay
  bool fixed = false;  // immovable I/O anchor
  std::optional<FixedPos> fixed_pos;
};

struct Net {
  std::string id;
  std::vector<std::string> pins;  // >= 2 distinct cell ids
};

struct TimingPathSpec {
  std::string id;
  std::vector<std::string> cells;  // ordered; consecutive cells share a net
  double required_time = 0.0;      // ns
};

/// Immutable after construction. The constructor validates every
/// invariant (unique ids, pin references, path connectivity) and builds
/// the index structures used by the partitioners and placers.
class Netlist {
 public:
  Netlist() = default;
  Netlist(std::vector<Cell> cells, std::vector<Net> nets,
          std::vector<TimingPathSpec> paths);

  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<Net>& nets() const { return nets_; }
  const std::vector<TimingPathSpec>& paths() const { return paths_; }

  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_nets() const { return static_cast<int>(nets_.size()); }

  // -1 when absent
  int cell_index(const std::string& id) const;
  int net_index(const std::string& id) const;

  const Cell& cell(int idx) const { return cells_[idx]; }
  const Net& net(int idx) const { return nets_[idx]; }

  // net indices incident to a cell
  std::span<const int> nets_of(int cell_idx) const;
  // pin cell indices of a net
  std::span<const int> pins_of(int net_idx) const;

  double total_cell_area() const { return total_area_; }

  // nets containing both cells, in net-index order
  std::vector<int> nets_joining(int cell_a, int cell_b) const;

 private:
  std::vector<Cell> cells_;
  std::vector<Net> nets_;
  std::vector<TimingPathSpec> paths_;

  std::unordered_map<std::string, int> cell_idx_;
  std::unordered_map<std::string, int> net_idx_;
  // CSR adjacency cell -> nets
  std::vector<int> cell_net_offsets_;
  std::vector<int> cell_net_ids_;
  // per-net pin cell indices
  std::vector<std::vector<int>> net_pin_idx_;
  double total_area_ = 0.0;

  void validate_and_index();
};

struct Coord {
  double x = 0.0;  // um
  double y = 0.0;  // um
  int tier = 0;
};

/// Per-cell coordinates on a shared footprint. All tiers use the same
/// outline; tier is the stacking index.
struct Placement {
  std::unordered_map<std::string, Coord> coords;
  double width = 0.0;   // um
  double height = 0.0;  // um
  int num_tiers = 1;

  const Coord& at(const std::string& cell_id) const;
};

// Plain-text netlist format (see README):
//   cell <id> <area_um2> <delay_ns> [fixed <x> <y> <tier>]
//   net <id> <cell_id> <cell_id> [...]
//   path <id> <required_ns> <cell_id> [...]
// '#' comments; all cells first, then nets, then paths.
Netlist parse_netlist(std::istream& in);
Netlist parse_netlist_file(const std::string& path);
void serialize_netlist(const Netlist& nl, std::ostream& out);

// Placement file: `# key value...` header comments (footprint_um and
// tiers are required to read one back), then `cell <id> <x> <y> <tier>`.
void write_placement(std::ostream& out, const Netlist& nl, const Placement& pl,
                     const std::vector<std::pair<std::string, std::string>>&
                         header_fields = {});
Placement read_placement(std::istream& in);

/// Total half-perimeter wirelength in um: per net, bounding-box
/// half-perimeter of its pin coordinates plus via_penalty_um per tier
/// boundary crossed (max tier - min tier).
double hpwl(const Netlist& nl, const Placement& pl, double via_penalty_um = 0.0);

// single-net contribution, same definition
double net_hpwl(const Netlist& nl, int net_idx, const Placement& pl,
                double via_penalty_um = 0.0);

/// Wirelength of a timing path: sum of hpwl over the distinct nets that
/// join consecutive path cells (each net counted once per path).
double path_length(const TimingPathSpec& path, const Netlist& nl,
                   const Placement& pl, double via_penalty_um = 0.0);

// tier boundary crossings along the path: sum of |tier(i+1) - tier(i)|
int path_tier_crossings(const TimingPathSpec& path, const Netlist& nl,
                        const Placement& pl);

}  // namespace stack3d
