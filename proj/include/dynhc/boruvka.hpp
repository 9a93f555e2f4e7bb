#pragma once

#include <cstddef>
#include <unordered_map>

#include "dynhc/link_cut_forest.hpp"
#include "dynhc/ss_tree.hpp"
#include "dynhc/types.hpp"

namespace dynhc {

// Union-find over point ids. Deterministic: union by size, equal sizes
// resolved toward the smaller root id.
class DisjointSet {
 public:
  void add(PointId x);
  PointId find(PointId x) const;
  bool unite(PointId a, PointId b);
  bool contains(PointId x) const { return parent_.count(x) != 0; }
  std::size_t size() const { return parent_.size(); }
  std::size_t component_count() const { return comps_; }

 private:
  mutable std::unordered_map<PointId, PointId> parent_;
  std::unordered_map<PointId, std::size_t> rank_;
  std::size_t comps_ = 0;
};

// Per-round working set: the component partition plus, per component root,
// the best crossing edge discovered so far (weight is mutual reachability,
// ties broken by ascending (weight, u, v)).
struct BoruvkaState {
  DisjointSet components;
  std::unordered_map<PointId, ReachEdge> best;
};

// Sentinel for nodes whose descendants span several components.
inline constexpr std::int64_t kMixedComponent = -2;

// Stamps every index node: comp = the shared component root when all
// descendants agree, kMixedComponent otherwise; resets the search bounds.
void mark_tree(const SsTree& index, const BoruvkaState& state);

// Dual-tree traversal recording, for every component with a point under q,
// the best edge crossing out of that component. Prunes subtree pairs that
// share a single component and pairs whose distance lower bound cannot beat
// the bounds of the components under q.
void find_component_neighbors(const SsNode& q, const SsNode& r,
                              BoruvkaState& state);

struct BoruvkaStats {
  std::size_t initial_components = 0;
  std::size_t rounds = 0;
  std::size_t edges_added = 0;
};

// Completes the forest to a spanning tree of the mutual reachability graph
// implied by the index contents (point coordinates plus stored core
// distances). The forest's existing edges seed the component partition.
// Total weight afterwards equals the brute-force MST weight.
BoruvkaStats dual_tree_boruvka(const SsTree& index, LinkCutForest& forest);

}  // namespace dynhc
