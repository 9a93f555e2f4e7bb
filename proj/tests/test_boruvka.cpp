#include "dynhc/boruvka.hpp"

#include <algorithm>
#include <random>
#include <vector>

#include "doctest.h"
#include "dynhc/errors.hpp"
#include "dynhc/link_cut_forest.hpp"
#include "dynhc/metric.hpp"
#include "dynhc/ss_tree.hpp"

using namespace dynhc;

namespace {

// Collinear fixture: ids 0..3 at coords 0, 1, 2, 10; two-neighbor core
// distances 2, 1, 2, 9; MST weight multiset {2, 2, 9}, total 13.
std::vector<Point> line4_points() {
  return {Point{0, {0.0}}, Point{1, {1.0}}, Point{2, {2.0}},
          Point{3, {10.0}}};
}

SsTree line4_index() {
  SsTree t(IndexConfig{2, 2, 4});
  const double cds[] = {2.0, 1.0, 2.0, 9.0};
  auto pts = line4_points();
  for (std::size_t i = 0; i < pts.size(); ++i) t.insert(pts[i], cds[i]);
  return t;
}

LinkCutForest forest_with_vertices(PointId n) {
  LinkCutForest f;
  for (PointId v = 0; v < n; ++v) f.add_vertex(v);
  return f;
}

bool incident_tie(const ReachEdge& e, PointId a1, PointId b1, PointId a2,
                  PointId b2) {
  const ReachEdge c1 = make_edge(a1, b1, e.weight);
  const ReachEdge c2 = make_edge(a2, b2, e.weight);
  return same_endpoints(e, c1) || same_endpoints(e, c2);
}

}  // namespace

TEST_CASE("disjoint set behaves and is deterministic") {
  DisjointSet ds;
  for (PointId i = 0; i < 6; ++i) ds.add(i);
  CHECK(ds.component_count() == 6);
  CHECK(ds.unite(4, 2));
  CHECK_FALSE(ds.unite(2, 4));
  CHECK(ds.find(4) == ds.find(2));
  // equal sizes resolve toward the smaller root id
  CHECK(ds.find(4) == 2);
  CHECK(ds.unite(0, 1));
  CHECK(ds.find(1) == 0);
  CHECK(ds.unite(2, 0));
  CHECK(ds.component_count() == 3);
  ds.add(4);  // idempotent
  CHECK(ds.size() == 6);
  CHECK_THROWS_AS(ds.find(77), NotFoundError);
}

TEST_CASE("spanning from an empty forest matches the brute oracle") {
  SsTree idx = line4_index();
  LinkCutForest forest = forest_with_vertices(4);
  auto stats = dual_tree_boruvka(idx, forest);
  CHECK(stats.initial_components == 4);
  CHECK(stats.edges_added == 3);
  CHECK(forest.edge_count() == 3);
  CHECK(forest.total_weight() == 13.0);
  for (PointId v = 1; v < 4; ++v) CHECK(forest.connected(0, v));

  // already spanning: nothing happens
  auto before = forest.edges();
  auto again = dual_tree_boruvka(idx, forest);
  CHECK(again.initial_components == 1);
  CHECK(again.rounds == 0);
  CHECK(again.edges_added == 0);
  CHECK(forest.edges() == before);
}

TEST_CASE("one missing link is restored in a single round") {
  SsTree idx = line4_index();
  LinkCutForest forest = forest_with_vertices(4);
  forest.link(0, 1, 2.0);
  forest.link(1, 2, 2.0);

  auto stats = dual_tree_boruvka(idx, forest);
  CHECK(stats.initial_components == 2);
  CHECK(stats.rounds == 1);
  CHECK(stats.edges_added == 1);
  CHECK(forest.total_weight() == 13.0);

  // the new edge weighs 9 and reaches the outlier; two pairs tie there
  for (const auto& e : forest.edges())
    if (e.u == 3 || e.v == 3) {
      CHECK(e.weight == 9.0);
      CHECK(incident_tie(e, 1, 3, 2, 3));
    }
}

TEST_CASE("component neighbor search records best crossing edges") {
  SsTree idx = line4_index();

  BoruvkaState state;
  for (PointId i = 0; i < 4; ++i) state.components.add(i);
  state.components.unite(0, 1);
  state.components.unite(2, 3);
  mark_tree(idx, state);
  find_component_neighbors(*idx.root(), *idx.root(), state);

  REQUIRE(state.best.size() == 2);
  for (const auto& [root, e] : state.best) {
    CHECK(e.weight == 2.0);
    // crossing pairs (0,2) and (1,2) tie at mutual reachability 2
    CHECK(incident_tie(e, 0, 2, 1, 2));
  }
}

TEST_CASE("single-component subtree pair is pruned immediately") {
  SsTree idx = line4_index();
  BoruvkaState state;
  for (PointId i = 0; i < 4; ++i) state.components.add(i);
  state.components.unite(0, 1);
  state.components.unite(0, 2);
  state.components.unite(0, 3);
  mark_tree(idx, state);
  CHECK(idx.root()->comp == state.components.find(0));
  find_component_neighbors(*idx.root(), *idx.root(), state);
  CHECK(state.best.empty());
}

TEST_CASE("first round on singletons finds each point's best edge") {
  SsTree idx = line4_index();
  BoruvkaState state;
  for (PointId i = 0; i < 4; ++i) state.components.add(i);
  mark_tree(idx, state);
  CHECK(idx.root()->comp == kMixedComponent);
  find_component_neighbors(*idx.root(), *idx.root(), state);

  REQUIRE(state.best.size() == 4);
  CHECK(state.best.at(0).weight == 2.0);
  CHECK(state.best.at(1).weight == 2.0);
  CHECK(state.best.at(2).weight == 2.0);
  CHECK(state.best.at(3).weight == 9.0);
  CHECK(incident_tie(state.best.at(3), 1, 3, 2, 3));
}

TEST_CASE("vertex set disagreement is rejected") {
  SsTree idx = line4_index();
  LinkCutForest small = forest_with_vertices(3);
  CHECK_THROWS_AS(dual_tree_boruvka(idx, small), StateError);

  LinkCutForest skewed = forest_with_vertices(3);
  skewed.add_vertex(9);  // same count, wrong ids
  CHECK_THROWS_AS(dual_tree_boruvka(idx, skewed), StateError);
}

TEST_CASE("trivially small inputs") {
  SsTree idx(IndexConfig{2, 2, 4});
  LinkCutForest forest;
  auto stats = dual_tree_boruvka(idx, forest);
  CHECK(stats.initial_components == 0);

  idx.insert(Point{0, {1.0}}, 0.5);
  forest.add_vertex(0);
  stats = dual_tree_boruvka(idx, forest);
  CHECK(stats.initial_components == 1);
  CHECK(stats.edges_added == 0);
  CHECK(forest.edge_count() == 0);
}

TEST_CASE("random inputs match the brute MST weight exactly") {
  std::mt19937 rng(424242);
  std::uniform_real_distribution<double> coord(-100.0, 100.0);

  for (const int n : {40, 150, 300}) {
    for (const std::size_t d : {2u, 4u}) {
      std::vector<Point> pts;
      pts.reserve(n);
      for (PointId i = 0; i < n; ++i) {
        std::vector<double> c(d);
        for (auto& v : c) v = coord(rng);
        pts.push_back(Point{i, std::move(c)});
      }
      const int min_pts = 4;
      auto cores = brute_core_distances(pts, min_pts);
      const double want = total_weight(brute_mst(pts, cores));

      SsTree idx;
      for (const auto& p : pts)
        idx.insert(p, cores.at(p.id).core_distance);

      // from scratch
      LinkCutForest forest = forest_with_vertices(n);
      dual_tree_boruvka(idx, forest);
      CHECK(forest.edge_count() == static_cast<std::size_t>(n - 1));
      CHECK(forest.total_weight() == want);

      // tear out the edges around a few points and reconnect
      std::vector<PointId> torn;
      for (int j = 0; j < 5; ++j)
        torn.push_back(std::uniform_int_distribution<PointId>(0, n - 1)(rng));
      forest.remove_edges([&](const ReachEdge& e) {
        return std::find(torn.begin(), torn.end(), e.u) != torn.end() ||
               std::find(torn.begin(), torn.end(), e.v) != torn.end();
      });
      auto stats = dual_tree_boruvka(idx, forest);
      CHECK(stats.initial_components >= 2);
      CHECK(forest.edge_count() == static_cast<std::size_t>(n - 1));
      CHECK(forest.total_weight() == want);

      // partial seed: a prefix of the oracle tree's edges
      LinkCutForest partial = forest_with_vertices(n);
      auto oracle_edges = brute_mst(pts, cores);
      for (std::size_t j = 0; j < oracle_edges.size() / 2; ++j)
        partial.link(oracle_edges[j].u, oracle_edges[j].v,
                     oracle_edges[j].weight);
      dual_tree_boruvka(idx, partial);
      CHECK(partial.total_weight() == want);
    }
  }
}
