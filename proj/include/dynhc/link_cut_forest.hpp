#pragma once

#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "dynhc/types.hpp"

namespace dynhc {

// Dynamic forest over point ids supporting link, cut, connectivity and
// maximum-weight-edge-on-path queries, all in amortized O(log n).
//
// Implementation: splay-tree based link-cut trees. Every tree edge is
// materialized as its own path element sitting between its two endpoints in
// the represented tree, so a path-maximum query lands on an edge, not a
// vertex. Vertex elements carry -inf as their aggregate value and therefore
// never win the maximum.
class LinkCutForest {
 public:
  enum class ApplyOutcome { linked, replaced, rejected };

  struct ApplyResult {
    ApplyOutcome outcome;
    // The tree edge displaced by a `replaced` outcome.
    std::optional<ReachEdge> removed;
  };

  LinkCutForest() = default;

  void add_vertex(PointId v);     // ConflictError if present
  void remove_vertex(PointId v);  // NotFoundError / StateError if not isolated
  bool has_vertex(PointId v) const { return vert_.count(v) != 0; }
  std::size_t vertex_count() const { return vert_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  // Connectivity in the represented forest. u == v is trivially connected.
  bool connected(PointId u, PointId v);

  // Adds edge (u,v). StateError if already connected (which subsumes the
  // duplicate-edge case); NotFoundError on unknown vertices.
  void link(PointId u, PointId v, double weight);

  // Removes edge (u,v). NotFoundError if no such tree edge.
  void cut(PointId u, PointId v);

  bool has_edge(PointId u, PointId v) const;
  double edge_weight(PointId u, PointId v) const;  // NotFoundError

  // In-place weight refresh; the path aggregates follow immediately.
  void set_edge_weight(PointId u, PointId v, double weight);

  // Heaviest edge on the tree path between two distinct connected vertices.
  // Ties return one deterministic representative.
  ReachEdge max_edge_on_path(PointId u, PointId v);

  // The exact candidate-edge probe of the incremental MST update: link if the
  // endpoints are disconnected, otherwise replace the current path maximum if
  // and only if the candidate is strictly lighter.
  ApplyResult apply_candidate(const ReachEdge& e);

  // Cuts every tree edge matching `pred`; returns them ascending by (u,v).
  std::vector<ReachEdge> remove_edges(
      const std::function<bool(const ReachEdge&)>& pred);

  // All tree edges sorted by (weight, u, v).
  std::vector<ReachEdge> edges() const;

  // Edges incident to v (NotFoundError on unknown vertex).
  std::vector<ReachEdge> edges_incident(PointId v) const;

  // Canonically ordered weight sum (identical weight multisets sum bitwise
  // identically).
  double total_weight() const;

 private:
  struct SNode {
    int ch[2] = {-1, -1};
    int parent = -1;
    bool flip = false;
    double value = 0.0;  // edge weight, or -inf for vertices
    int max_idx = -1;    // element with maximal value in this splay subtree
    PointId eu = -1, ev = -1;  // endpoints for edge elements
  };

  struct EdgeRec {
    double weight = 0.0;
    int node = -1;
  };

  int alloc_node(double value, PointId eu, PointId ev);
  void free_node(int x);
  bool is_splay_root(int x) const;
  void push(int x);
  void pull(int x);
  void rotate(int x);
  void splay(int x);
  void access(int x);
  void make_root(int x);
  int find_root(int x);
  int vertex_node(PointId v) const;  // NotFoundError

  static std::pair<PointId, PointId> key(PointId u, PointId v) {
    return u < v ? std::make_pair(u, v) : std::make_pair(v, u);
  }

  std::vector<SNode> nodes_;
  std::vector<int> free_;
  std::unordered_map<PointId, int> vert_;
  // Ordered so removal sweeps and snapshots iterate deterministically.
  std::map<std::pair<PointId, PointId>, EdgeRec> edges_;
  std::unordered_map<PointId, std::vector<PointId>> adj_;
};

}  // namespace dynhc
