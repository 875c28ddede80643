#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stack3d/errors.hpp"
#include "stack3d/rng.hpp"
#include "stack3d/tier_place.hpp"

namespace stack3d {

namespace {

struct FmState {
  const Netlist& nl;
  int n;
  std::vector<double> area;
  std::vector<int> side;      // 0/1
  std::vector<char> movable;  // fixed cells stay on their tier
  double side_area[2] = {0, 0};
  // per net: pins on side 0 / side 1
  std::vector<int> cnt0, cnt1;

  explicit FmState(const Netlist& netlist) : nl(netlist), n(netlist.num_cells()) {
    area.resize(n);
    side.assign(n, 0);
    movable.assign(n, 1);
    cnt0.assign(nl.num_nets(), 0);
    cnt1.assign(nl.num_nets(), 0);
    for (int i = 0; i < n; ++i) {
      const Cell& c = nl.cell(i);
      area[i] = c.area;
      if (c.fixed) {
        movable[i] = 0;
        int t = c.fixed_pos->tier;
        if (t != 0 && t != 1)
          throw std::invalid_argument("fm_bipartition: fixed cell '" + c.id +
                                      "' pinned to tier " + std::to_string(t) +
                                      " (bipartition has tiers 0 and 1)");
        side[i] = t;
      }
    }
  }

  void rebuild_counts() {
    std::fill(cnt0.begin(), cnt0.end(), 0);
    std::fill(cnt1.begin(), cnt1.end(), 0);
    side_area[0] = side_area[1] = 0.0;
    for (int c = 0; c < n; ++c) side_area[side[c]] += area[c];
    for (int net = 0; net < nl.num_nets(); ++net)
      for (int c : nl.pins_of(net)) (side[c] == 0 ? cnt0 : cnt1)[net]++;
  }

  long cut() const {
    long cut = 0;
    for (size_t net = 0; net < cnt0.size(); ++net)
      if (cnt0[net] > 0 && cnt1[net] > 0) ++cut;
    return cut;
  }

  int gain(int c) const {
    int g = 0;
    for (int net : nl.nets_of(c)) {
      int from = side[c] == 0 ? cnt0[net] : cnt1[net];
      int to = side[c] == 0 ? cnt1[net] : cnt0[net];
      if (from == 1) ++g;
      if (to == 0) --g;
    }
    return g;
  }

  void apply_move(int c) {
    int from = side[c];
    for (int net : nl.nets_of(c)) {
      (from == 0 ? cnt0 : cnt1)[net]--;
      (from == 0 ? cnt1 : cnt0)[net]++;
    }
    side[c] = 1 - from;
    side_area[from] -= area[c];
    side_area[1 - from] += area[c];
  }
};

// gain buckets with deterministic lowest-id selection inside a bucket
class GainBuckets {
 public:
  GainBuckets(int max_gain) : offset_(max_gain), buckets_(2 * max_gain + 1) {}

  void insert(int cell, int gain) { buckets_[offset_ + gain].insert(cell); }
  void erase(int cell, int gain) { buckets_[offset_ + gain].erase(cell); }

  // highest-gain cell passing `legal`, ties by lowest cell index
  template <typename Fn>
  std::pair<int, int> best(Fn&& legal) const {
    for (int g = static_cast<int>(buckets_.size()) - 1; g >= 0; --g) {
      for (int cell : buckets_[g])
        if (legal(cell)) return {cell, g - offset_};
    }
    return {-1, 0};
  }

 private:
  int offset_;
  std::vector<std::set<int>> buckets_;
};

}  // namespace

SiteGrid site_grid_for(int cells_per_tier, double footprint_width_um,
                       double site_fill) {
  int m = std::max(
      1, static_cast<int>(std::ceil(std::sqrt(
             std::max(1, cells_per_tier) / std::max(site_fill, 1e-9)))));
  if (m % 2 == 0) ++m;  // keep a central site
  return {m, footprint_width_um / m};
}

TierAssignment fm_bipartition(const Netlist& nl, double balance_tol,
                              std::uint64_t seed) {
  if (balance_tol < 0.0)
    throw std::invalid_argument("fm_bipartition: negative balance tolerance");

  FmState st(nl);
  int movable_count = 0;
  for (int i = 0; i < st.n; ++i) movable_count += st.movable[i];
  if (movable_count < 2)
    throw std::invalid_argument("fm_bipartition: need at least 2 movable cells");

  const double total = nl.total_cell_area();
  const double eps = 1e-9 * total;
  const double lo = total * (0.5 - balance_tol) - eps;
  const double hi = total * (0.5 + balance_tol) + eps;
  double max_area = 0.0;
  for (int i = 0; i < st.n; ++i) max_area = std::max(max_area, st.area[i]);
  for (int i = 0; i < st.n; ++i)
    if (st.area[i] > hi)
      throw ModelError("fm_bipartition: cell '" + nl.cell(i).id +
                       "' area exceeds the balance tolerance band");

  auto in_band = [&](const double a[2]) {
    return a[0] >= lo && a[0] <= hi && a[1] >= lo && a[1] <= hi;
  };
  // moves during a pass may drift one max cell beyond the band
  const double move_lo = lo - max_area;
  const double move_hi = hi + max_area;

  std::vector<int> movable_ids;
  for (int i = 0; i < st.n; ++i)
    if (st.movable[i]) movable_ids.push_back(i);

  int max_deg = 1;
  for (int i = 0; i < st.n; ++i)
    max_deg = std::max(max_deg, static_cast<int>(nl.nets_of(i).size()));

  const int restarts = st.n <= 64 ? 8 : 2;
  std::vector<int> best_side;
  long best_cut = -1;
  bool best_in_band = false;

  for (int restart = 0; restart < restarts; ++restart) {
    rng::Engine eng = rng::make_engine(seed, restart);

    // random greedy initial assignment: shuffled order, lighter side first
    std::vector<int> order = movable_ids;
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng::uniform_below(eng, i)]);
    for (int i = 0; i < st.n; ++i)
      if (st.movable[i]) st.side[i] = 0;
    double a[2] = {0, 0};
    for (int i = 0; i < st.n; ++i)
      if (!st.movable[i]) a[st.side[i]] += st.area[i];
    for (int c : order) {
      int s = a[0] <= a[1] ? 0 : 1;
      if (a[s] + st.area[c] > hi && a[1 - s] + st.area[c] <= hi) s = 1 - s;
      st.side[c] = s;
      a[s] += st.area[c];
    }
    st.rebuild_counts();

    // FM passes
    for (int pass = 0; pass < 32; ++pass) {
      const long pass_start_cut = st.cut();
      const bool start_balanced = in_band(st.side_area);

      GainBuckets buckets(max_deg);
      std::vector<char> locked(st.n, 1);
      std::vector<int> cur_gain(st.n, 0);
      for (int c : movable_ids) {
        locked[c] = 0;
        cur_gain[c] = st.gain(c);
        buckets.insert(c, cur_gain[c]);
      }

      struct Step {
        int cell;
        long cut_after;
        bool balanced;
      };
      std::vector<Step> steps;
      steps.reserve(movable_ids.size());
      long running_cut = pass_start_cut;

      while (true) {
        auto legal = [&](int c) {
          double from = st.side_area[st.side[c]] - st.area[c];
          double to = st.side_area[1 - st.side[c]] + st.area[c];
          return from >= move_lo && to <= move_hi;
        };
        auto [cell, gain] = buckets.best(legal);
        if (cell < 0) break;

        buckets.erase(cell, cur_gain[cell]);
        locked[cell] = 1;
        running_cut -= gain;
        st.apply_move(cell);
        steps.push_back({cell, running_cut, in_band(st.side_area)});

        // refresh gains of unlocked cells sharing a net with the moved one
        for (int net : nl.nets_of(cell)) {
          for (int nb : nl.pins_of(net)) {
            if (locked[nb]) continue;
            int g = st.gain(nb);
            if (g != cur_gain[nb]) {
              buckets.erase(nb, cur_gain[nb]);
              cur_gain[nb] = g;
              buckets.insert(nb, g);
            }
          }
        }
      }

      // best balanced prefix; prefix 0 = pass start
      bool have_balanced = start_balanced;
      long best_prefix_cut = start_balanced ? pass_start_cut
                                            : std::numeric_limits<long>::max();
      int best_prefix = 0;
      for (size_t k = 0; k < steps.size(); ++k) {
        if (!steps[k].balanced) continue;
        if (!have_balanced || steps[k].cut_after < best_prefix_cut) {
          have_balanced = true;
          best_prefix_cut = steps[k].cut_after;
          best_prefix = static_cast<int>(k) + 1;
        }
      }
      if (!have_balanced) {  // nothing balanced seen; keep the pass start
        best_prefix_cut = pass_start_cut;
        best_prefix = 0;
      }

      // roll back moves beyond the chosen prefix
      for (size_t k = steps.size(); k > static_cast<size_t>(best_prefix); --k)
        st.apply_move(steps[k - 1].cell);

      const bool improved =
          best_prefix > 0 &&
          (best_prefix_cut < pass_start_cut || (!start_balanced && have_balanced));
      if (!improved) break;
    }

    long cut = st.cut();
    bool balanced = in_band(st.side_area);
    bool better = false;
    if (balanced && !best_in_band)
      better = true;
    else if (balanced == best_in_band) {
      if (best_cut < 0 || cut < best_cut)
        better = true;
      else if (cut == best_cut && st.side < best_side)
        better = true;
    }
    if (better) {
      best_cut = cut;
      best_side = st.side;
      best_in_band = balanced;
    }
  }

  if (!best_in_band)
    throw ModelError("fm_bipartition: no partition satisfies the balance band");

  TierAssignment ta;
  ta.num_tiers = 2;
  ta.cut_nets = best_cut;
  double a[2] = {0, 0};
  for (int i = 0; i < st.n; ++i) {
    ta.tier_of[nl.cell(i).id] = best_side[i];
    a[best_side[i]] += st.area[i];
  }
  ta.balance = {a[0] / total, a[1] / total};
  return ta;
}

}  // namespace stack3d
