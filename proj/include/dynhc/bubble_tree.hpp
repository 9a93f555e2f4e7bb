#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "dynhc/clustering_feature.hpp"
#include "dynhc/types.hpp"

namespace dynhc {

// The single corrective step taken by one maintenance call.
enum class MaintenanceAction { kRemovedLeaf, kSplitLeaf, kReorganized };

struct LeafSummary {
  ClusteringFeature cf;
  std::vector<PointId> members;  // ascending
};

enum class QualityLabel { kGood, kUnder, kOver };

struct QualityReport {
  std::vector<double> beta;
  double mean = 0.0;
  double stddev = 0.0;  // population form
  double lower = 0.0;
  double upper = 0.0;
  std::vector<QualityLabel> labels;
};

// Flags summaries whose share of the population falls outside the
// k-sigma band around the mean share. A zero spread flags nothing.
QualityReport classify_quality(std::span<const std::int64_t> weights,
                               std::int64_t total, double k);

struct BubbleNode {
  ClusteringFeature cf;
  BubbleNode* parent = nullptr;
  std::uint64_t seq = 0;
  bool leaf = true;
  std::vector<std::unique_ptr<BubbleNode>> children;  // internal nodes
  std::vector<PointId> members;                       // leaves

  std::vector<double> rep() const;  // cf.ls / cf.n
};

// Balanced tree of clustering features over the resident points. The
// leaf count tracks ceil(rho * N): every update runs one maintenance
// step that dissolves, splits, or reshuffles a leaf toward the target.
class BubbleTree {
 public:
  explicit BubbleTree(double rho, int min_fanout = 4, int max_fanout = 8);

  void insert(const Point& p);
  void erase(PointId id);
  MaintenanceAction maintain_compression();

  std::vector<LeafSummary> leaf_cfs() const;

  std::size_t size() const { return registry_.size(); }
  bool empty() const { return registry_.empty(); }
  bool contains(PointId id) const { return registry_.count(id) != 0; }
  std::size_t leaf_count() const { return leaves_.size(); }
  std::size_t target_leaf_count() const;
  std::size_t dim() const { return dim_; }
  double rho() const { return rho_; }
  const std::vector<double>& point_coords(PointId id) const;
  const ClusteringFeature& root_cf() const;

  // Recomputes every structural invariant from scratch and throws
  // std::logic_error on the first breach.
  void audit() const;

 private:
  struct PointRecord {
    std::vector<double> coords;
    BubbleNode* leaf = nullptr;
  };

  std::unique_ptr<BubbleNode> make_node(bool leaf);
  BubbleNode* descend(std::span<const double> coords);
  void add_on_path(BubbleNode* node, const ClusteringFeature& cf);
  void subtract_on_path(BubbleNode* node, const ClusteringFeature& cf);
  void absorb_existing(PointId id);
  void remove_empty_leaf(BubbleNode* leaf);
  void repair_underflow(BubbleNode* node);
  void collapse_root();
  void split_leaf(BubbleNode* leaf);
  BubbleNode* split_internal(BubbleNode* node);
  void split_overflow_chain(BubbleNode* node);
  ClusteringFeature members_cf(const std::vector<PointId>& ids) const;
  void audit_node(const BubbleNode* node, std::size_t depth,
                  std::size_t& leaf_depth, std::size_t& leaves_seen,
                  std::size_t& members_seen) const;

  double rho_;
  int min_fanout_;
  int max_fanout_;
  std::unique_ptr<BubbleNode> root_;
  std::vector<BubbleNode*> leaves_;  // creation order
  std::unordered_map<PointId, PointRecord> registry_;
  std::size_t dim_ = 0;
  std::uint64_t next_seq_ = 0;
};

}  // namespace dynhc
