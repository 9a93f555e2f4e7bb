#pragma once

#include <cstddef>
#include <unordered_map>
#include <vector>

#include "dynhc/link_cut_forest.hpp"
#include "dynhc/ss_tree.hpp"
#include "dynhc/types.hpp"

namespace dynhc {

// Per-operation instrumentation: neighborhood sizes, edge traffic, and the
// wall-clock split between the core-distance phase and the tree phase.
struct UpdateStats {
  std::size_t r_set_size = 0;       // reverse neighbors whose records changed
  std::size_t candidates_probed = 0;
  std::size_t replacements = 0;
  std::size_t edges_removed = 0;
  std::size_t components_reconnected = 0;
  std::size_t boruvka_rounds = 0;
  double t_core_ms = 0.0;  // neighbor lists and core distances
  double t_mst_ms = 0.0;   // edge refresh, candidate probes, reconnection
  bool rebuilt = false;    // operation fell back to a full build
};

// Keeps an exact minimum spanning tree of the mutual reachability graph
// under point insertions and deletions. Neighbor lists, the spatial index,
// and the tree are updated together so that after every public operation
// they describe the same point set, every neighbor list equals the
// brute-force scan, and the tree weight equals the brute-force MST weight.
//
// Below the size threshold (size <= min_pts) core distances are undefined;
// points are stored but no tree is kept. Crossing the threshold upward
// triggers one full build.
class DynamicClusterer {
 public:
  explicit DynamicClusterer(int min_pts, IndexConfig index_cfg);
  explicit DynamicClusterer(int min_pts);

  UpdateStats insert_point(const Point& p);
  UpdateStats delete_point(PointId id);

  // Bulk load: points go straight into the index and one full build runs at
  // the end. Final state matches point-by-point insertion (same neighbor
  // lists, same tree weight); only the per-operation cost differs.
  UpdateStats insert_batch(const std::vector<Point>& points);

  // Current tree edges sorted ascending by (weight, u, v).
  std::vector<ReachEdge> mst_snapshot() const;

  bool has_mst() const { return index_.size() > min_pts_u(); }
  std::size_t size() const { return index_.size(); }
  bool contains(PointId id) const { return index_.contains(id); }
  int min_pts() const { return min_pts_; }
  const std::vector<double>& point_coords(PointId id) const {
    return index_.point_coords(id);
  }
  const std::unordered_map<PointId, CoreRecord>& core_records() const {
    return cores_;
  }
  const CoreRecord& core_record(PointId id) const;

  // All resident points sorted by id (oracle-comparison convenience).
  std::vector<Point> points() const;

  const SsTree& index() const { return index_; }
  const LinkCutForest& forest() const { return forest_; }

 private:
  std::size_t min_pts_u() const { return static_cast<std::size_t>(min_pts_); }
  void rebuild_all(UpdateStats& stats);
  void drop_mst();
  double edge_weight_now(PointId u, PointId v) const;

  int min_pts_;
  SsTree index_;
  LinkCutForest forest_;
  std::unordered_map<PointId, CoreRecord> cores_;
  std::uint64_t op_counter_ = 0;
};

}  // namespace dynhc
