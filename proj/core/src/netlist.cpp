#include "stack3d/netlist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "stack3d/errors.hpp"

namespace stack3d {

Netlist::Netlist(std::vector<Cell> cells, std::vector<Net> nets,
                 std::vector<TimingPathSpec> paths)
    : cells_(std::move(cells)), nets_(std::move(nets)), paths_(std::move(paths)) {
  validate_and_index();
}

void Netlist::validate_and_index() {
  cell_idx_.clear();
  net_idx_.clear();
  total_area_ = 0.0;

  for (size_t i = 0; i < cells_.size(); ++i) {
    const Cell& c = cells_[i];
    if (c.id.empty()) throw std::invalid_argument("cell with empty id");
    if (!(c.area > 0.0))
      throw std::invalid_argument("cell '" + c.id + "': area must be > 0");
    if (c.delay < 0.0)
      throw std::invalid_argument("cell '" + c.id + "': delay must be >= 0");
    if (c.fixed && !c.fixed_pos)
      throw std::invalid_argument("cell '" + c.id + "': fixed without position");
    if (c.fixed_pos && c.fixed_pos->tier < 0)
      throw std::invalid_argument("cell '" + c.id + "': negative tier");
    if (!cell_idx_.emplace(c.id, static_cast<int>(i)).second)
      throw std::invalid_argument("duplicate cell id '" + c.id + "'");
    total_area_ += c.area;
  }

  net_pin_idx_.assign(nets_.size(), {});
  for (size_t i = 0; i < nets_.size(); ++i) {
    const Net& n = nets_[i];
    if (n.id.empty()) throw std::invalid_argument("net with empty id");
    if (!net_idx_.emplace(n.id, static_cast<int>(i)).second)
      throw std::invalid_argument("duplicate net id '" + n.id + "'");
    if (n.pins.size() < 2)
      throw std::invalid_argument("net '" + n.id + "': fewer than 2 pins");
    std::unordered_set<std::string> seen;
    for (const std::string& pin : n.pins) {
      auto it = cell_idx_.find(pin);
      if (it == cell_idx_.end())
        throw std::invalid_argument("net '" + n.id + "': unknown cell '" + pin + "'");
      if (!seen.insert(pin).second)
        throw std::invalid_argument("net '" + n.id + "': pins not distinct ('" +
                                    pin + "')");
      net_pin_idx_[i].push_back(it->second);
    }
  }

  // CSR cell -> nets
  cell_net_offsets_.assign(cells_.size() + 1, 0);
  for (const auto& pins : net_pin_idx_)
    for (int c : pins) ++cell_net_offsets_[c + 1];
  for (size_t i = 1; i < cell_net_offsets_.size(); ++i)
    cell_net_offsets_[i] += cell_net_offsets_[i - 1];
  cell_net_ids_.assign(cell_net_offsets_.back(), 0);
  std::vector<int> cursor(cell_net_offsets_.begin(), cell_net_offsets_.end() - 1);
  for (size_t n = 0; n < net_pin_idx_.size(); ++n)
    for (int c : net_pin_idx_[n]) cell_net_ids_[cursor[c]++] = static_cast<int>(n);

  std::unordered_set<std::string> path_ids;
  for (const TimingPathSpec& p : paths_) {
    if (p.id.empty()) throw std::invalid_argument("path with empty id");
    if (!path_ids.insert(p.id).second)
      throw std::invalid_argument("duplicate path id '" + p.id + "'");
    if (p.cells.empty())
      throw std::invalid_argument("path '" + p.id + "': no cells");
    if (!(p.required_time > 0.0))
      throw std::invalid_argument("path '" + p.id + "': required_time must be > 0");
    int prev = -1;
    for (const std::string& id : p.cells) {
      auto it = cell_idx_.find(id);
      if (it == cell_idx_.end())
        throw std::invalid_argument("path '" + p.id + "': unknown cell '" + id + "'");
      int cur = it->second;
      if (prev >= 0 && nets_joining(prev, cur).empty())
        throw std::invalid_argument("path '" + p.id + "': cells '" +
                                    cells_[prev].id + "' and '" + id +
                                    "' share no net");
      prev = cur;
    }
  }
}

int Netlist::cell_index(const std::string& id) const {
  auto it = cell_idx_.find(id);
  return it == cell_idx_.end() ? -1 : it->second;
}

int Netlist::net_index(const std::string& id) const {
  auto it = net_idx_.find(id);
  return it == net_idx_.end() ? -1 : it->second;
}

std::span<const int> Netlist::nets_of(int cell_idx) const {
  int b = cell_net_offsets_[cell_idx];
  int e = cell_net_offsets_[cell_idx + 1];
  return {cell_net_ids_.data() + b, static_cast<size_t>(e - b)};
}

std::span<const int> Netlist::pins_of(int net_idx) const {
  const auto& pins = net_pin_idx_[net_idx];
  return {pins.data(), pins.size()};
}

std::vector<int> Netlist::nets_joining(int cell_a, int cell_b) const {
  std::vector<int> out;
  auto a = nets_of(cell_a);
  for (int n : a) {
    auto pins = pins_of(n);
    if (std::find(pins.begin(), pins.end(), cell_b) != pins.end())
      out.push_back(n);
  }
  std::sort(out.begin(), out.end());
  return out;
}

const Coord& Placement::at(const std::string& cell_id) const {
  auto it = coords.find(cell_id);
  if (it == coords.end())
    throw ModelError("cell '" + cell_id + "' not placed");
  return it->second;
}

namespace {

double parse_num(const std::string& tok, int line, const char* what) {
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw ParseError(line, std::string("expected ") + what + ", got '" + tok + "'");
  return v;
}

}  // namespace

Netlist parse_netlist(std::istream& in) {
  std::vector<Cell> cells;
  std::vector<Net> nets;
  std::vector<TimingPathSpec> paths;

  enum Section { kCells, kNets, kPaths };
  Section section = kCells;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<std::string> tok;
    std::string t;
    while (ss >> t) tok.push_back(t);
    if (tok.empty()) continue;

    const std::string& kind = tok[0];
    if (kind == "cell") {
      if (section != kCells)
        throw ParseError(lineno, "cell record after nets/paths (cells come first)");
      if (tok.size() != 4 && tok.size() != 8)
        throw ParseError(lineno, "cell record needs: cell <id> <area> <delay> "
                                 "[fixed <x> <y> <tier>]");
      Cell c;
      c.id = tok[1];
      c.area = parse_num(tok[2], lineno, "area");
      c.delay = parse_num(tok[3], lineno, "delay");
      if (tok.size() == 8) {
        if (tok[4] != "fixed")
          throw ParseError(lineno, "expected 'fixed', got '" + tok[4] + "'");
        c.fixed = true;
        FixedPos fp;
        fp.x = parse_num(tok[5], lineno, "x");
        fp.y = parse_num(tok[6], lineno, "y");
        fp.tier = static_cast<int>(parse_num(tok[7], lineno, "tier"));
        c.fixed_pos = fp;
      }
      cells.push_back(std::move(c));
    } else if (kind == "net") {
      if (section == kPaths)
        throw ParseError(lineno, "net record after paths (nets precede paths)");
      section = kNets;
      if (tok.size() < 4)
        throw ParseError(lineno, "net record needs: net <id> <cell> <cell> [...]");
      Net n;
      n.id = tok[1];
      n.pins.assign(tok.begin() + 2, tok.end());
      nets.push_back(std::move(n));
    } else if (kind == "path") {
      section = kPaths;
      if (tok.size() < 4)
        throw ParseError(lineno, "path record needs: path <id> <required_ns> "
                                 "<cell> [...]");
      TimingPathSpec p;
      p.id = tok[1];
      p.required_time = parse_num(tok[2], lineno, "required time");
      p.cells.assign(tok.begin() + 3, tok.end());
      paths.push_back(std::move(p));
    } else {
      throw ParseError(lineno, "unknown record '" + kind + "'");
    }
  }

  try {
    return Netlist(std::move(cells), std::move(nets), std::move(paths));
  } catch (const std::invalid_argument& e) {
    throw ParseError(lineno, e.what());
  }
}

Netlist parse_netlist_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open netlist file '" + path + "'");
  return parse_netlist(in);
}

void serialize_netlist(const Netlist& nl, std::ostream& out) {
  char buf[128];
  for (const Cell& c : nl.cells()) {
    std::snprintf(buf, sizeof(buf), "cell %s %.17g %.17g", c.id.c_str(), c.area,
                  c.delay);
    out << buf;
    if (c.fixed) {
      std::snprintf(buf, sizeof(buf), " fixed %.17g %.17g %d", c.fixed_pos->x,
                    c.fixed_pos->y, c.fixed_pos->tier);
      out << buf;
    }
    out << '\n';
  }
  for (const Net& n : nl.nets()) {
    out << "net " << n.id;
    for (const std::string& pin : n.pins) out << ' ' << pin;
    out << '\n';
  }
  for (const TimingPathSpec& p : nl.paths()) {
    std::snprintf(buf, sizeof(buf), "path %s %.17g", p.id.c_str(), p.required_time);
    out << buf;
    for (const std::string& c : p.cells) out << ' ' << c;
    out << '\n';
  }
}

void write_placement(std::ostream& out, const Netlist& nl, const Placement& pl,
                     const std::vector<std::pair<std::string, std::string>>&
                         header_fields) {
  char buf[192];
  std::snprintf(buf, sizeof(buf), "# footprint_um %.6f %.6f\n# tiers %d\n",
                pl.width, pl.height, pl.num_tiers);
  out << buf;
  for (const auto& [key, value] : header_fields)
    out << "# " << key << ' ' << value << '\n';
  for (const Cell& c : nl.cells()) {
    const Coord& p = pl.at(c.id);
    std::snprintf(buf, sizeof(buf), "cell %s %.6f %.6f %d\n", c.id.c_str(), p.x,
                  p.y, p.tier);
    out << buf;
  }
}

Placement read_placement(std::istream& in) {
  Placement pl;
  bool have_footprint = false, have_tiers = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;
    if (tok == "#") {
      std::string key;
      if (!(ss >> key)) continue;
      if (key == "footprint_um") {
        if (!(ss >> pl.width >> pl.height))
          throw ParseError(lineno, "bad footprint_um header");
        have_footprint = true;
      } else if (key == "tiers") {
        if (!(ss >> pl.num_tiers))
          throw ParseError(lineno, "bad tiers header");
        have_tiers = true;
      }
      continue;
    }
    if (tok != "cell")
      throw ParseError(lineno, "expected 'cell' record, got '" + tok + "'");
    std::string id;
    Coord c;
    if (!(ss >> id >> c.x >> c.y >> c.tier))
      throw ParseError(lineno, "bad cell record");
    if (!pl.coords.emplace(id, c).second)
      throw ParseError(lineno, "duplicate cell '" + id + "'");
  }
  if (!have_footprint || !have_tiers)
    throw ParseError(lineno, "placement missing footprint_um/tiers header");
  return pl;
}

double net_hpwl(const Netlist& nl, int net_idx, const Placement& pl,
                double via_penalty_um) {
  auto pins = nl.pins_of(net_idx);
  double minx = 0, maxx = 0, miny = 0, maxy = 0;
  int mint = 0, maxt = 0;
  bool first = true;
  for (int c : pins) {
    const Coord& p = pl.at(nl.cell(c).id);
    if (first) {
      minx = maxx = p.x;
      miny = maxy = p.y;
      mint = maxt = p.tier;
      first = false;
    } else {
      minx = std::min(minx, p.x);
      maxx = std::max(maxx, p.x);
      miny = std::min(miny, p.y);
      maxy = std::max(maxy, p.y);
      mint = std::min(mint, p.tier);
      maxt = std::max(maxt, p.tier);
    }
  }
  return (maxx - minx) + (maxy - miny) + via_penalty_um * (maxt - mint);
}

double hpwl(const Netlist& nl, const Placement& pl, double via_penalty_um) {
  double total = 0.0;
  for (int n = 0; n < nl.num_nets(); ++n)
    total += net_hpwl(nl, n, pl, via_penalty_um);
  return total;
}

double path_length(const TimingPathSpec& path, const Netlist& nl,
                   const Placement& pl, double via_penalty_um) {
  std::vector<char> counted(nl.num_nets(), 0);
  double total = 0.0;
  for (size_t i = 0; i + 1 < path.cells.size(); ++i) {
    int a = nl.cell_index(path.cells[i]);
    int b = nl.cell_index(path.cells[i + 1]);
    if (a < 0 || b < 0)
      throw std::invalid_argument("path '" + path.id + "': unknown cell");
    for (int n : nl.nets_joining(a, b)) {
      if (counted[n]) continue;
      counted[n] = 1;
      total += net_hpwl(nl, n, pl, via_penalty_um);
    }
  }
  // a 1-cell path still requires its cell to be placed
  if (path.cells.size() == 1) (void)pl.at(path.cells.front());
  return total;
}

int path_tier_crossings(const TimingPathSpec& path, const Netlist& nl,
                        const Placement& pl) {
  (void)nl;
  int crossings = 0;
  for (size_t i = 0; i + 1 < path.cells.size(); ++i) {
    int ta = pl.at(path.cells[i]).tier;
    int tb = pl.at(path.cells[i + 1]).tier;
    crossings += std::abs(tb - ta);
  }
  return crossings;
}

}  // namespace stack3d
