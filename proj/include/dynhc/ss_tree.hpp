#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "dynhc/types.hpp"

namespace dynhc {

// Fanout and neighborhood-size settings for the spatial index.
struct IndexConfig {
  int min_pts = 5;
  int min_fanout = 5;   // m: children lower bound (root exempt)
  int max_fanout = 10;  // M: children upper bound
};

struct SsEntry {
  PointId id = -1;
  std::vector<double> coords;
  double cd = 0.0;  // core distance stored alongside the point
};

// Tree node. Internal nodes hold children, leaves hold point entries.
// Every descendant point lies within `radius` of `centroid`, and `cd_max`
// bounds every descendant's stored core distance from above.
struct SsNode {
  std::vector<double> centroid;
  double radius = 0.0;
  double cd_max = 0.0;
  int count = 0;           // points in this subtree
  std::uint64_t seq = 0;   // creation order, used for deterministic ties
  SsNode* parent = nullptr;
  bool leaf = true;
  std::vector<std::unique_ptr<SsNode>> children;
  std::vector<SsEntry> entries;

  // Scratch for tree-walk passes (e.g. Boruvka rounds). Not structural
  // state; overwritten freely between operations.
  mutable std::int64_t comp = -1;
  mutable double bound = 0.0;
};

// Dynamic bounding-sphere index over points with attached core distances.
// Supports exact kNN and reverse-kNN queries; sphere and cd_max summaries
// are refreshed along the affected root-to-leaf path on every update.
class SsTree {
 public:
  explicit SsTree(IndexConfig cfg = {});

  // Stores the point with the given core distance (often a placeholder
  // that is refreshed once the true value is known).
  void insert(const Point& p, double core_distance = 0.0);

  // Removes and returns the point. A non-root leaf left with fewer than
  // min_fanout entries is dissolved and its points reinserted; internal
  // underflow cascades the same way.
  Point remove(PointId id);

  // Exact k nearest stored points to q, ascending by (distance, id).
  // exclude_id, when present, is skipped.
  std::vector<std::pair<PointId, double>> knn(
      std::span<const double> q, int k,
      std::optional<PointId> exclude_id = std::nullopt) const;

  // All stored points q with d(p, q) strictly below q's core distance,
  // sorted by id. Empty result is valid.
  std::vector<PointId> rknn(std::span<const double> p) const;

  // Inclusive variant: d(p, q) <= cd(q). Used by deletion flows where
  // a point at exactly its neighbor's core distance still matters.
  std::vector<PointId> rknn_inclusive(std::span<const double> p) const;

  // Updates a stored core distance and the cd_max values on its
  // leaf-to-root path.
  void refresh_cd(PointId id, double core_distance);

  // Lower bound on the distance from q to any point inside the node:
  // max(0, ||q - centroid|| - radius).
  static double min_node_distance(std::span<const double> q, const SsNode& n);

  double point_cd(PointId id) const;
  const std::vector<double>& point_coords(PointId id) const;
  bool contains(PointId id) const { return leaf_of_.count(id) != 0; }
  std::size_t size() const { return leaf_of_.size(); }
  bool empty() const { return leaf_of_.empty(); }
  std::size_t dim() const { return dim_; }
  const IndexConfig& config() const { return cfg_; }

  const SsNode* root() const { return root_.get(); }

  void for_each_entry(const std::function<void(const SsEntry&)>& fn) const;

  // Full-traversal structural check; throws std::logic_error on any
  // violated invariant. Intended for tests.
  void audit() const;

 private:
  struct NodeStats {
    std::vector<double> centroid;
    double radius = 0.0;
    double cd_max = 0.0;
    int count = 0;
  };

  NodeStats compute_stats(const SsNode& n) const;
  void recompute(SsNode& n) const;
  SsNode* split_node(SsNode* x);
  void collect_entries(SsNode& n, std::vector<SsEntry>& pool);
  SsEntry& find_entry(PointId id) const;
  void rknn_walk(std::span<const double> p, bool inclusive,
                 std::vector<PointId>& out) const;
  void audit_node(const SsNode* n, int depth, int& leaf_depth,
                  std::size_t& entries_seen) const;

  IndexConfig cfg_;
  std::unique_ptr<SsNode> root_;
  std::unordered_map<PointId, SsNode*> leaf_of_;
  std::size_t dim_ = 0;
  std::uint64_t next_seq_ = 0;
};

}  // namespace dynhc
