#include "stack3d/timing.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "nlohmann/json.hpp"
#include "stack3d/io.hpp"

namespace stack3d {

std::vector<PathRecord> evaluate_paths(const Netlist& nl, const Placement& pl,
                                       const DelayModel& model) {
  if (model.wire_delay_per_um < 0.0 || model.tier_hop_delay < 0.0)
    throw std::invalid_argument("evaluate_paths: negative delay coefficient");

  std::vector<PathRecord> records;
  records.reserve(nl.paths().size());
  for (const TimingPathSpec& path : nl.paths()) {
    PathRecord rec;
    rec.path_id = path.id;
    rec.n_cells = static_cast<int>(path.cells.size());
    rec.length_um = path_length(path, nl, pl, model.via_penalty_um);

    double intrinsic = 0.0;
    for (const std::string& id : path.cells) {
      int idx = nl.cell_index(id);
      if (idx < 0)
        throw std::invalid_argument("evaluate_paths: unknown cell '" + id + "'");
      intrinsic += nl.cell(idx).delay;
    }
    int crossings = path_tier_crossings(path, nl, pl);
    rec.delay_ns = intrinsic + model.wire_delay_per_um * rec.length_um +
                   model.tier_hop_delay * crossings;
    rec.slack_ns = path.required_time - rec.delay_ns;
    records.push_back(std::move(rec));
  }

  std::sort(records.begin(), records.end(),
            [](const PathRecord& a, const PathRecord& b) {
              if (a.slack_ns != b.slack_ns) return a.slack_ns < b.slack_ns;
              return a.path_id < b.path_id;
            });
  return records;
}

DesignPathStats summarize_paths(const std::vector<PathRecord>& records) {
  if (records.empty())
    throw std::invalid_argument("summarize_paths: empty record list");
  DesignPathStats st;
  double sum = 0.0;
  for (const PathRecord& r : records) {
    st.max_length_um = std::max(st.max_length_um, r.length_um);
    if (r.slack_ns < 0.0) ++st.failing;
    sum += r.length_um;
  }
  st.mean_length_um = sum / static_cast<double>(records.size());
  double var = 0.0;
  for (const PathRecord& r : records) {
    double d = r.length_um - st.mean_length_um;
    var += d * d;
  }
  st.stddev_length_um = std::sqrt(var / static_cast<double>(records.size()));
  return st;
}

PathStatsSummary path_stats(const std::vector<PathRecord>& records_2d,
                            const std::vector<PathRecord>& records_3d) {
  if (records_2d.empty() || records_3d.empty())
    throw std::invalid_argument("path_stats: empty record list");
  PathStatsSummary s;
  s.d2 = summarize_paths(records_2d);
  s.d3 = summarize_paths(records_3d);
  s.delta_max_length_um = s.d3.max_length_um - s.d2.max_length_um;
  s.delta_failing = s.d3.failing - s.d2.failing;
  s.delta_stddev_um = s.d3.stddev_length_um - s.d2.stddev_length_um;
  return s;
}

void write_path_csv(std::ostream& out, const std::vector<PathRecord>& records,
                    const std::string& design_label) {
  out << "path_id,n_cells,length_um,delay_ns,slack_ns,design\n";
  for (const PathRecord& r : records) {
    out << r.path_id << ',' << r.n_cells << ',' << format_g6(r.length_um) << ','
        << format_g6(r.delay_ns) << ',' << format_g6(r.slack_ns) << ','
        << design_label << '\n';
  }
}

std::string path_stats_json(const PathStatsSummary& summary) {
  nlohmann::ordered_json j;
  auto design = [](const DesignPathStats& d) {
    nlohmann::ordered_json o;
    o["max_length_um"] = d.max_length_um;
    o["failing_paths"] = d.failing;
    o["mean_length_um"] = d.mean_length_um;
    o["stddev_length_um"] = d.stddev_length_um;
    return o;
  };
  j["2d"] = design(summary.d2);
  j["3d"] = design(summary.d3);
  j["delta_max_length_um"] = summary.delta_max_length_um;
  j["delta_failing"] = summary.delta_failing;
  j["delta_stddev_um"] = summary.delta_stddev_um;
  return j.dump(2) + "\n";
}

}  // namespace stack3d
