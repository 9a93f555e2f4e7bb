#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dynhc/types.hpp"

namespace dynhc {

// One single-linkage merge. Cluster indices: leaves are 0..n-1, the
// cluster formed by merge t is n+t.
struct MergeRecord {
  std::int64_t left;
  std::int64_t right;
  double weight;
  std::int64_t size;  // summed leaf weight underneath

  friend bool operator==(const MergeRecord&, const MergeRecord&) = default;
};

struct Dendrogram {
  std::vector<std::int64_t> leaf_weights;
  std::vector<MergeRecord> merges;  // nondecreasing weight

  std::int64_t leaf_count() const {
    return static_cast<std::int64_t>(leaf_weights.size());
  }
  std::int64_t total_weight() const;
};

// Single-linkage construction over a spanning tree: edges are merged
// in ascending weight order, which matches cutting them descending.
Dendrogram build_dendrogram(std::span<const ReachEdge> edges,
                            std::vector<std::int64_t> leaf_weights);

struct FlatClustering {
  std::vector<std::int64_t> labels;           // kNoiseLabel marks noise
  std::vector<std::int64_t> cluster_weights;  // indexed by label
  std::int64_t noise_weight = 0;
};

// Condensed-tree flat extraction: a split is real only when both sides
// carry min_cluster_weight, and clusters are chosen by excess-of-mass
// stability. leaf_density_caps optionally bounds the density at which
// a lone leaf's mass falls out (one entry per leaf, as 1/distance);
// without caps a lone-leaf cluster persists to unbounded density.
FlatClustering extract_flat(const Dendrogram& dendro,
                            std::int64_t min_cluster_weight,
                            std::span<const double> leaf_density_caps = {});

// Mutual information over the two labelings normalized by the
// arithmetic mean of their entropies (natural logs). Noise is an
// ordinary class. Identical partitions score exactly one.
double nmi(std::span<const std::int64_t> labels_a,
           std::span<const std::int64_t> labels_b);

}  // namespace dynhc
