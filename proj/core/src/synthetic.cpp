#include "stack3d/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "stack3d/rng.hpp"

namespace stack3d {

namespace {

// union-find over cell indices
struct Dsu {
  std::vector<int> parent;
  explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

// Donath-style span: density ~ d^(p-2) on [1, n-1], inverse-CDF sampled.
// Short spans dominate for p < 1, giving contiguous index blocks the
// desired external-connection scaling.
int sample_span(rng::Engine& eng, int n, double p) {
  double pm1 = p - 1.0;
  double u = rng::uniform01(eng);
  double dmax = static_cast<double>(n - 1);
  double d = std::pow(1.0 + u * (std::pow(dmax, pm1) - 1.0), 1.0 / pm1);
  int di = static_cast<int>(d);
  return std::clamp(di, 1, n - 1);
}

}  // namespace

Netlist generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_cells < 2)
    throw std::invalid_argument("generate_synthetic: n_cells must be >= 2");
  if (!(spec.rent_exponent > 0.0 && spec.rent_exponent < 1.0))
    throw std::invalid_argument("generate_synthetic: rent_exponent must be in (0,1)");
  if (!(spec.avg_fanout >= 1.0))
    throw std::invalid_argument("generate_synthetic: avg_fanout must be >= 1");

  const int n = spec.n_cells;
  rng::Engine eng = rng::make_engine(spec.seed);

  std::vector<Cell> cells(n);
  for (int i = 0; i < n; ++i) {
    cells[i].id = "c" + std::to_string(i);
    cells[i].area = rng::uniform(eng, spec.area_min, spec.area_max);
    cells[i].delay = rng::uniform(eng, spec.delay_min, spec.delay_max);
  }

  const int max_sinks = std::min(16, n - 1);
  std::vector<Net> nets;
  nets.reserve(n + 8);
  std::vector<std::vector<int>> net_pins;
  net_pins.reserve(n + 8);

  for (int drv = 0; drv < n; ++drv) {
    int sinks = 1 + rng::poisson(eng, spec.avg_fanout - 1.0);
    sinks = std::min(sinks, max_sinks);
    std::set<int> pins{drv};
    int attempts = 0;
    while (static_cast<int>(pins.size()) < sinks + 1 && attempts < 4 * sinks + 8) {
      ++attempts;
      int d = sample_span(eng, n, spec.rent_exponent);
      int sgn = rng::coin(eng) ? 1 : -1;
      int idx = ((drv + sgn * d) % n + n) % n;
      pins.insert(idx);
    }
    if (pins.size() < 2) continue;
    net_pins.emplace_back(pins.begin(), pins.end());
  }

  // stitch disconnected components with 2-pin nets between their lowest
  // indices, so every benchmark is a single connected block
  Dsu dsu(n);
  for (const auto& pins : net_pins)
    for (size_t i = 1; i < pins.size(); ++i) dsu.unite(pins[0], pins[i]);
  std::vector<int> roots;
  for (int i = 0; i < n; ++i)
    if (dsu.find(i) == i) roots.push_back(i);
  for (size_t i = 1; i < roots.size(); ++i) {
    net_pins.push_back({roots[0], roots[i]});
    dsu.unite(roots[0], roots[i]);
  }

  for (size_t i = 0; i < net_pins.size(); ++i) {
    Net net;
    net.id = "n" + std::to_string(i);
    for (int c : net_pins[i]) net.pins.push_back(cells[c].id);
    nets.push_back(std::move(net));
  }

  // adjacency for path walks
  std::vector<std::vector<int>> nets_of(n);
  for (size_t i = 0; i < net_pins.size(); ++i)
    for (int c : net_pins[i]) nets_of[c].push_back(static_cast<int>(i));

  std::vector<TimingPathSpec> paths;
  std::vector<char> covered(n, 0);
  int covered_count = 0;
  const int coverage_target =
      static_cast<int>(std::ceil(spec.path_cell_coverage * n));
  int path_id = 0;
  int guard = 0;
  while (covered_count < coverage_target && guard < 50 * n) {
    ++guard;
    int target_len = rng::uniform_int(eng, spec.path_len_min,
                                      std::min(spec.path_len_max, n));
    int cur = static_cast<int>(rng::uniform_below(eng, n));
    std::vector<int> walk{cur};
    std::vector<char> in_walk(n, 0);
    in_walk[cur] = 1;
    while (static_cast<int>(walk.size()) < target_len) {
      // candidate next cells: pins of a random incident net, unvisited
      const auto& cand_nets = nets_of[cur];
      if (cand_nets.empty()) break;
      int net = cand_nets[rng::uniform_below(eng, cand_nets.size())];
      std::vector<int> next;
      for (int c : net_pins[net])
        if (!in_walk[c]) next.push_back(c);
      if (next.empty()) break;
      cur = next[rng::uniform_below(eng, next.size())];
      walk.push_back(cur);
      in_walk[cur] = 1;
    }
    if (static_cast<int>(walk.size()) < 2) continue;
    TimingPathSpec p;
    p.id = "p" + std::to_string(path_id++);
    double intrinsic = 0.0;
    for (int c : walk) {
      p.cells.push_back(cells[c].id);
      intrinsic += cells[c].delay;
      if (!covered[c]) {
        covered[c] = 1;
        ++covered_count;
      }
    }
    p.required_time =
        intrinsic * rng::uniform(eng, spec.tightness_min, spec.tightness_max);
    paths.push_back(std::move(p));
  }

  return Netlist(std::move(cells), std::move(nets), std::move(paths));
}

Netlist generate_synthetic(int n_cells, double rent_exponent, double avg_fanout,
                           std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_cells = n_cells;
  spec.rent_exponent = rent_exponent;
  spec.avg_fanout = avg_fanout;
  spec.seed = seed;
  return generate_synthetic(spec);
}

double measure_rent_exponent(const Netlist& nl, std::uint64_t seed) {
  const int n = nl.num_cells();
  rng::Engine eng = rng::make_engine(seed, 0x52454e54);
  std::vector<double> log_g, log_t;
  for (int g : {16, 32, 64, 128, 256}) {
    if (g >= n) continue;
    const int samples = 64;
    double t_sum = 0.0;
    for (int s = 0; s < samples; ++s) {
      int a = static_cast<int>(rng::uniform_below(eng, n));
      auto inside = [&](int c) { return ((c - a) % n + n) % n < g; };
      long t = 0;
      for (int net = 0; net < nl.num_nets(); ++net) {
        auto pins = nl.pins_of(net);
        int in = 0;
        for (int c : pins) in += inside(c) ? 1 : 0;
        if (in > 0 && in < static_cast<int>(pins.size())) ++t;
      }
      t_sum += static_cast<double>(t);
    }
    double t_avg = t_sum / samples;
    if (t_avg <= 0.0) continue;
    log_g.push_back(std::log(static_cast<double>(g)));
    log_t.push_back(std::log(t_avg));
  }
  if (log_g.size() < 2)
    throw std::invalid_argument("netlist too small to fit a Rent exponent");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(log_g.size());
  for (size_t i = 0; i < log_g.size(); ++i) {
    sx += log_g[i];
    sy += log_t[i];
    sxx += log_g[i] * log_g[i];
    sxy += log_g[i] * log_t[i];
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace stack3d
