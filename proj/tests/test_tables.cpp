#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "bsafe/error.hpp"
#include "bsafe/tables.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bsafe;
using namespace bsafe::tables;
using namespace bsafe::testing;


TEST_CASE("chi-square tail helper") {
  CHECK(chi2_sf(5.991464547, 2) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(chi2_sf(11.0704977, 5) == doctest::Approx(0.05).epsilon(1e-6));
}

TEST_CASE("monotonicity checks") {
  CHECK(is_monotone(DecisionTable::constant({3, 3}, 5, 2)));
  auto bad = DecisionTable::constant({3, 3}, 5, 2);
  bad.set(bad.index_of(std::vector<int>{3, 1}), 3);
  CHECK_FALSE(is_monotone(bad));
  CHECK(is_monotone(DecisionTable::from_function({5, 5}, 5, [](std::span<const int> s) { return std::min(s[0], s[1]); })));
}

TEST_CASE("covering-edge check agrees with all comparable pairs") {
  Rng rng(3);
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<int> cells(12);
    for (auto& c : cells) c = 1 + static_cast<int>(uniform_index(rng, 3));
    const DecisionTable t({2, 3, 2}, 3, cells);
    CHECK(is_monotone(t) == monotone_all_pairs(t));
  }
}

TEST_CASE("enumeration counts match brute force") {
  CHECK(enumerate_monotone_tables({5}, 5).size() == 126);
  CHECK(brute_force_count({5}, 5) == 126);
  CHECK(enumerate_monotone_tables({2, 2}, 2).size() == 6);
  CHECK(brute_force_count({2, 2}, 2) == 6);
  CHECK(enumerate_monotone_tables({3, 3}, 3).size() == brute_force_count({3, 3}, 3));
  CHECK(enumerate_monotone_tables({2, 2, 2}, 2).size() == brute_force_count({2, 2, 2}, 2));
  CHECK(enumerate_monotone_tables({4, 3}, 1).size() == 1);
}

TEST_CASE("enumeration lists distinct monotone tables") {
  const auto all = enumerate_monotone_tables({3, 3}, 3);
  std::set<std::vector<int>> seen;
  for (const auto& t : all) {
    CHECK(is_monotone(t));
    seen.insert(t.cells());
  }
  CHECK(seen.size() == all.size());
  CHECK_THROWS_AS(enumerate_monotone_tables({5, 5, 5}, 5), ValidationError);
}

TEST_CASE("decode of extreme and chain states") {
  const GridPosetDag grid({2, 2});
  LinearExtensionState s{{0, 1, 2, 3}, {0, 0}};
  CHECK(decode(s, grid, 3) == DecisionTable::constant({2, 2}, 3, 3));
  s.boundaries = {4, 4};
  CHECK(decode(s, grid, 3) == DecisionTable::constant({2, 2}, 3, 1));
  const GridPosetDag chain({3});
  const LinearExtensionState c{{0, 1, 2}, {1, 2}};
  CHECK(decode(c, chain, 3).cells() == std::vector<int>{1, 2, 3});
}

TEST_CASE("encode and decode are inverse on monotone tables") {
  const GridPosetDag dag({3, 3});
  for (const auto& t : enumerate_monotone_tables({3, 3}, 3)) {
    const auto s = encode(t, dag);
    CHECK(is_valid(s, dag));
    CHECK(decode(s, dag, 3) == t);
  }
}

TEST_CASE("text and json forms round trip") {
  const auto t =
      DecisionTable::from_function({5, 5, 5}, 5, [](std::span<const int> s) { return (s[0] + s[1] + s[2]) / 3; });
  std::stringstream text;
  write_table_text(text, t);
  CHECK(read_table_text(text) == t);
  CHECK(table_from_json(table_to_json(t)) == t);
  std::istringstream bad("# sizes 2 2 outputs 2\n1 2\n2\n");
  CHECK_THROWS_AS(read_table_text(bad), Error);
}

TEST_CASE("sort moves never change a total order") {
  const GridPosetDag chain({4});
  LinearExtensionState s{{0, 1, 2, 3}, {}};
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) CHECK_FALSE(sort_chain_step(s, chain, rng));
  CHECK(s.order == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("grid poset extensions") {
  CHECK(extensions(GridPosetDag({2, 2})).size() == 2);
  CHECK(extensions(GridPosetDag::from_edges(3, {})).size() == 6);
  CHECK_THROWS_AS(GridPosetDag::from_edges(2, {{0, 1}, {1, 0}}), ValidationError);
}

TEST_CASE("sort chain is uniform over linear extensions") {
  for (const auto& dag : {GridPosetDag::from_edges(3, {}), GridPosetDag({2, 2})}) {
    const auto exts = extensions(dag);
    std::map<std::vector<std::size_t>, int> counts;
    LinearExtensionState s{*exts.begin(), {}};
    Rng rng(17);
    const int steps = 100000;
    // visits are strongly correlated; thin to roughly independent samples
    for (int t = 0; t < steps; ++t) {
      sort_chain_step(s, dag, rng);
      CHECK(is_valid(s, dag));
      if (t % 10 == 9) ++counts[s.order];
    }
    const double expected = steps / 10.0 / static_cast<double>(exts.size());
    double stat = 0.0;
    for (const auto& e : exts) stat += (counts[e] - expected) * (counts[e] - expected) / expected;
    CHECK(chi2_sf(stat, static_cast<int>(exts.size()) - 1) > 0.01);
  }
}

TEST_CASE("boundary walk on one vertex visits both constant tables") {
  const GridPosetDag one({1});
  LinearExtensionState s{{0}, {0}};
  Rng rng(4);
  std::set<int> outputs;
  for (int i = 0; i < 200; ++i) {
    boundary_step(s, one, rng);
    outputs.insert(decode(s, one, 2).at(0));
  }
  CHECK(outputs == std::set<int>{1, 2});
  LinearExtensionState none{{0}, {}};
  CHECK_FALSE(boundary_step(none, one, rng));
}

TEST_CASE("combined chain reaches every labeling of a 3-antichain") {
  // explicit search over the chain's state graph
  const GridPosetDag dag = GridPosetDag::from_edges(3, {});
  std::set<LinearExtensionState> seen;
  std::queue<LinearExtensionState> frontier;
  const LinearExtensionState start{{0, 1, 2}, {0}};
  seen.insert(start);
  frontier.push(start);
  while (!frontier.empty()) {
    const auto s = frontier.front();
    frontier.pop();
    std::vector<LinearExtensionState> next;
    for (std::size_t t = 0; t + 1 < s.order.size(); ++t) {
      auto n = s;
      std::swap(n.order[t], n.order[t + 1]);
      next.push_back(n);
    }
    for (int delta : {-1, 1}) {
      auto n = s;
      const long b = static_cast<long>(n.boundaries[0]) + delta;
      if (b < 0 || b > 3) continue;
      n.boundaries[0] = static_cast<std::size_t>(b);
      next.push_back(n);
    }
    for (auto& n : next)
      if (is_valid(n, dag) && seen.insert(n).second) frontier.push(n);
  }
  std::set<std::vector<int>> labelings;
  for (const auto& s : seen) labelings.insert(decode(s, dag, 2).cells());
  CHECK(labelings.size() == 8);

  // and the random chain actually visits them
  Rng rng(8);
  LinearExtensionState s = start;
  std::set<std::vector<int>> visited;
  for (int i = 0; i < 20000; ++i) {
    if (uniform01(rng) < 0.5)
      sort_chain_step(s, dag, rng);
    else
      boundary_step(s, dag, rng);
    visited.insert(decode(s, dag, 2).cells());
  }
  CHECK(visited.size() == 8);
}

TEST_CASE("table chain keeps its table in sync and monotone") {
  auto dag = std::make_shared<const GridPosetDag>(std::vector<int>{3, 4});
  TableChain chain(DecisionTable::from_function({3, 4}, 4, [](std::span<const int> s) { return std::min(s[0], s[1]); }),
                   dag);
  Rng rng(12);
  for (int i = 0; i < 100000; ++i) {
    if (uniform01(rng) < 0.5)
      chain.sort_step(rng);
    else
      chain.boundary_step(rng);
    if (i % 97 == 0) CHECK(chain.table() == decode(chain.state(), *dag, 4));
    REQUIRE(is_monotone(chain.table()));
  }
}

TEST_CASE("short burst returns the start when it is optimal") {
  const auto base = DecisionTable::from_function({3, 3}, 3, [](std::span<const int> s) { return std::min(s[0], s[1]); });
  const ShortBurstConfig cfg{20, 10, 5, 0.5, 1};
  const auto r = short_burst([&](const std::vector<DecisionTable>& t) { return t[0] == base ? 1.0 : 0.0; },
                             [](const std::vector<DecisionTable>&) { return true; }, {base}, cfg, 1);
  CHECK(r.tables[0] == base);
  CHECK(r.changed_cells == 0);
}

TEST_CASE("short burst matches enumeration on a small objective") {
  Rng rng(21);
  std::vector<double> weight(9);
  for (auto& w : weight) w = 2.0 * uniform01(rng) - 1.0;
  auto objective = [&](const std::vector<DecisionTable>& t) {
    double v = 0.0;
    for (std::size_t c = 0; c < 9; ++c) v += weight[c] * t[0].at(c);
    return v;
  };
  auto constraint = [](const std::vector<DecisionTable>& t) { return t[0].at(4) <= 2; };
  double best = -1e300;
  for (const auto& t : enumerate_monotone_tables({3, 3}, 3))
    if (constraint({t})) best = std::max(best, objective({t}));
  const auto start = DecisionTable::constant({3, 3}, 3, 1);
  const auto r = short_burst(objective, constraint, {start}, ShortBurstConfig{50, 10, 20, 0.5, 1}, 9);
  CHECK(r.evaluation.objective == doctest::Approx(best).epsilon(1e-12));
  CHECK(r.evaluation.feasible);
}

TEST_CASE("short burst is reproducible across thread counts") {
  const auto start = DecisionTable::constant({3, 3}, 3, 2);
  auto objective = [](const std::vector<DecisionTable>& t) {
    double v = 0.0;
    for (std::size_t c = 0; c < t[0].cell_count(); ++c) v += (c % 2 ? 1.0 : -0.5) * t[0].at(c);
    return v;
  };
  auto ok = [](const std::vector<DecisionTable>&) { return true; };
  const auto a = short_burst(objective, ok, {start}, ShortBurstConfig{30, 10, 8, 0.5, 1}, 5);
  const auto b = short_burst(objective, ok, {start}, ShortBurstConfig{30, 10, 8, 0.5, 3}, 5);
  CHECK(a.tables == b.tables);
  CHECK(a.best_restart == b.best_restart);
}

TEST_CASE("short burst validates its inputs") {
  const auto start = DecisionTable::constant({2, 2}, 2, 1);
  auto obj = [](const std::vector<DecisionTable>&) { return 0.0; };
  auto never = [](const std::vector<DecisionTable>&) { return false; };
  auto ok = [](const std::vector<DecisionTable>&) { return true; };
  CHECK_THROWS_AS(short_burst(obj, ok, {start}, ShortBurstConfig{0, 10, 1, 0.5, 1}, 1), ValidationError);
  CHECK_THROWS_AS(short_burst(obj, never, {start}, ShortBurstConfig{1, 10, 1, 0.5, 1}, 1), ValidationError);
  CHECK_THROWS_AS(burst_config_from_json(Json{{"burst", 3}}), Error);
}
