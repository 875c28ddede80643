#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "stack3d/errors.hpp"
#include "stack3d/netlist.hpp"
#include "stack3d/rng.hpp"
#include "stack3d/synthetic.hpp"
#include "stack3d/timing.hpp"

using namespace stack3d;

namespace {

Netlist parse(const std::string& text) {
  std::istringstream in(text);
  return parse_netlist(in);
}

Placement place_at(std::initializer_list<std::pair<std::string, Coord>> list) {
  Placement pl;
  pl.width = pl.height = 100;
  pl.num_tiers = 2;
  for (const auto& [id, c] : list) pl.coords[id] = c;
  return pl;
}

}  // namespace

TEST_CASE("single-cell path arithmetic") {
  Netlist nl = parse("cell a 1 0.01\ncell b 1 0\nnet n a b\npath p 1.0 a\n");
  auto pl = place_at({{"a", {0, 0, 0}}, {"b", {0, 0, 0}}});
  DelayModel model{0.001, 0.0, 0.0};
  auto recs = evaluate_paths(nl, pl, model);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].n_cells == 1);
  CHECK(recs[0].delay_ns == doctest::Approx(0.01));
  CHECK(recs[0].slack_ns == doctest::Approx(0.99));
}

TEST_CASE("chain fixture delay") {
  Netlist nl = parse(
      "cell a 1 0.01\ncell b 1 0.01\ncell c 1 0.01\n"
      "net ab a b\nnet bc b c\npath p 0.05 a b c\n");
  auto pl = place_at({{"a", {0, 0, 0}}, {"b", {3, 4, 0}}, {"c", {3, 0, 0}}});
  DelayModel model{0.001, 0.0, 0.0};
  auto recs = evaluate_paths(nl, pl, model);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].length_um == doctest::Approx(11.0));
  CHECK(recs[0].delay_ns == doctest::Approx(0.041));
  CHECK(recs[0].slack_ns == doctest::Approx(0.009));
}

TEST_CASE("co-located cells leave only intrinsic delay") {
  Netlist nl = parse(
      "cell a 1 0.02\ncell b 1 0.03\nnet n a b\npath p 1 a b\n");
  auto pl = place_at({{"a", {5, 5, 0}}, {"b", {5, 5, 0}}});
  DelayModel model{0.01, 0.0, 0.0};
  auto recs = evaluate_paths(nl, pl, model);
  CHECK(recs[0].delay_ns == doctest::Approx(0.05));
}

TEST_CASE("tier hops add delay") {
  Netlist nl = parse("cell a 1 0.01\ncell b 1 0.01\nnet n a b\npath p 1 a b\n");
  auto pl = place_at({{"a", {0, 0, 0}}, {"b", {0, 0, 1}}});
  DelayModel model{0.0, 0.1, 0.0};
  auto recs = evaluate_paths(nl, pl, model);
  CHECK(recs[0].delay_ns == doctest::Approx(0.12));
}

TEST_CASE("records sort by ascending slack, slack+delay = required") {
  Netlist nl = generate_synthetic(400, 0.6, 3.0, 15);
  Placement pl;
  pl.width = pl.height = 50;
  pl.num_tiers = 1;
  rng::Engine eng = rng::make_engine(15, 2);
  for (const Cell& c : nl.cells())
    pl.coords[c.id] = {rng::uniform(eng, 0, 50), rng::uniform(eng, 0, 50), 0};
  DelayModel model{0.003, 0.0, 0.0};
  auto recs = evaluate_paths(nl, pl, model);
  REQUIRE(!recs.empty());
  for (size_t i = 1; i < recs.size(); ++i)
    CHECK(recs[i - 1].slack_ns <= recs[i].slack_ns);
  for (const PathRecord& r : recs) {
    const TimingPathSpec* spec = nullptr;
    for (const auto& p : nl.paths())
      if (p.id == r.path_id) spec = &p;
    REQUIRE(spec != nullptr);
    CHECK(r.slack_ns + r.delay_ns == doctest::Approx(spec->required_time));
  }
}

TEST_CASE("delay is monotone in wire length and cell delay") {
  Netlist nl = parse("cell a 1 0.01\ncell b 1 0.01\nnet n a b\npath p 1 a b\n");
  DelayModel model{0.002, 0.0, 0.0};
  double prev = -1;
  for (double d : {0.0, 5.0, 10.0, 20.0}) {
    auto pl = place_at({{"a", {0, 0, 0}}, {"b", {d, 0, 0}}});
    auto recs = evaluate_paths(nl, pl, model);
    CHECK(recs[0].delay_ns > prev);
    prev = recs[0].delay_ns;
  }
}

TEST_CASE("zero wire delay makes placement irrelevant") {
  Netlist nl = generate_synthetic(200, 0.6, 3.0, 6);
  DelayModel model{0.0, 0.0, 0.0};
  rng::Engine eng = rng::make_engine(6, 3);
  Placement p1, p2;
  p1.width = p1.height = p2.width = p2.height = 40;
  p1.num_tiers = 1;
  p2.num_tiers = 2;
  for (const Cell& c : nl.cells()) {
    p1.coords[c.id] = {rng::uniform(eng, 0, 40), rng::uniform(eng, 0, 40), 0};
    p2.coords[c.id] = {rng::uniform(eng, 0, 40), rng::uniform(eng, 0, 40),
                       static_cast<int>(rng::uniform_below(eng, 2))};
  }
  auto r1 = evaluate_paths(nl, p1, model);
  auto r2 = evaluate_paths(nl, p2, model);
  REQUIRE(r1.size() == r2.size());
  for (size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].path_id == r2[i].path_id);
    CHECK(r1[i].slack_ns == doctest::Approx(r2[i].slack_ns));
  }
}

TEST_CASE("unplaced path cell errors") {
  Netlist nl = parse("cell a 1 0.01\ncell b 1 0\nnet n a b\npath p 1 a b\n");
  Placement pl;
  pl.width = pl.height = 10;
  pl.num_tiers = 1;
  pl.coords["a"] = {0, 0, 0};
  CHECK_THROWS_AS(evaluate_paths(nl, pl, DelayModel{}), ModelError);
}

TEST_CASE("path_stats deltas") {
  PathRecord a{"p0", 5, 100.0, 0.5, 0.1};
  PathRecord b{"p1", 8, 200.0, 0.9, -0.2};
  std::vector<PathRecord> two{a, b};
  SUBCASE("identical inputs zero out") {
    PathStatsSummary s = path_stats(two, two);
    CHECK(s.delta_max_length_um == doctest::Approx(0.0));
    CHECK(s.delta_failing == 0);
    CHECK(s.delta_stddev_um == doctest::Approx(0.0));
  }
  SUBCASE("uniformly shorter 3D can only fail less") {
    std::vector<PathRecord> shorter{{"p0", 5, 60.0, 0.4, 0.2},
                                    {"p1", 8, 120.0, 0.7, 0.0}};
    PathStatsSummary s = path_stats(two, shorter);
    CHECK(s.delta_failing <= 0);
    CHECK(s.delta_max_length_um < 0);
  }
  SUBCASE("empty inputs rejected") {
    std::vector<PathRecord> none;
    CHECK_THROWS_AS(path_stats(none, two), std::invalid_argument);
    CHECK_THROWS_AS(path_stats(two, none), std::invalid_argument);
  }
}

TEST_CASE("path CSV schema round-trips") {
  Netlist nl = generate_synthetic(150, 0.6, 3.0, 44);
  Placement pl;
  pl.width = pl.height = 30;
  pl.num_tiers = 1;
  rng::Engine eng = rng::make_engine(44, 4);
  for (const Cell& c : nl.cells())
    pl.coords[c.id] = {rng::uniform(eng, 0, 30), rng::uniform(eng, 0, 30), 0};
  auto recs = evaluate_paths(nl, pl, DelayModel{});
  std::ostringstream out;
  write_path_csv(out, recs, "2d");
  oracles::Csv csv = oracles::parse_csv(out.str());
  REQUIRE(csv.header ==
          std::vector<std::string>{"path_id", "n_cells", "length_um", "delay_ns",
                                   "slack_ns", "design"});
  REQUIRE(csv.rows.size() == recs.size());
  for (size_t i = 0; i < recs.size(); ++i) {
    CHECK(csv.rows[i][0] == recs[i].path_id);
    CHECK(std::stoi(csv.rows[i][1]) == recs[i].n_cells);
    CHECK(std::stod(csv.rows[i][2]) ==
          doctest::Approx(recs[i].length_um).epsilon(1e-5));
    CHECK(csv.rows[i][5] == "2d");
  }
}

TEST_CASE("summary json carries both designs and deltas") {
  std::vector<PathRecord> a{{"p0", 5, 100.0, 0.5, 0.1}};
  std::vector<PathRecord> b{{"p0", 5, 80.0, 0.4, 0.2}};
  std::string json = path_stats_json(path_stats(a, b));
  CHECK(json.find("\"2d\"") != std::string::npos);
  CHECK(json.find("\"3d\"") != std::string::npos);
  CHECK(json.find("delta_max_length_um") != std::string::npos);
}
