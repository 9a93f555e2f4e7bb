#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dynhc/clustering_feature.hpp"
#include "dynhc/hierarchy.hpp"
#include "dynhc/types.hpp"

namespace dynhc {

// Compressed stand-in for a group of points: the centroid, the point
// count, and a radius estimate from which k-nearest distances inside
// the bubble are extrapolated under a uniformity assumption.
struct DataBubble {
  std::vector<double> rep;
  std::int64_t n = 0;
  double extent = 0.0;
  std::vector<PointId> members;

  int dim() const { return static_cast<int>(rep.size()); }

  // Expected distance from the centroid to the k-th nearest member:
  // (k/n)^(1/dim) * extent. Nondecreasing in k; zero for singletons.
  double nn_dist(std::int64_t k) const;
};

// Turns a clustering feature into a bubble. rep = LS/n and
// extent = sqrt((2n*SS - 2*|LS|^2) / (n(n-1))), 0 for singletons.
// A slightly negative radicand (cancellation noise) clamps to zero;
// a decisively negative one means the feature is corrupt.
DataBubble derive_bubble(const ClusteringFeature& cf, int dim,
                         std::vector<PointId> members = {});

// Distance between bubbles. Non-overlapping extents: centroid gap
// minus both extents plus both expected nearest-member distances.
// Overlapping: the larger of the two nearest-member distances. The
// same bubble object is at distance 0 from itself.
double bubble_distance(const DataBubble& b, const DataBubble& c);

// Core distance of bubbles[self]: walk bubbles by ascending distance
// (self first, then ties by index) accumulating point counts until
// min_pts points are covered at bubble C; the answer is
// d(self, C) + C.nn_dist(k) with k the count still owed when C is
// reached.
double bubble_core_distance(std::span<const DataBubble> bubbles,
                            std::size_t self, std::int64_t min_pts);

// max{cd_b, cd_c, bubble_distance(b, c)}.
double bubble_mutual_reachability(const DataBubble& b, const DataBubble& c,
                                  double cd_b, double cd_c);

struct BubbleClustering {
  Dendrogram dendrogram;  // leaves indexed like the bubble span
  std::vector<double> core_distances;
};

// Full offline pass over a bubble set: core distances, exact MST of
// the complete mutual-reachability graph (Prim, ties by index), and
// the single-linkage dendrogram weighted by bubble point counts.
BubbleClustering cluster_bubbles(std::span<const DataBubble> bubbles,
                                 int min_pts);

// Density level (1/distance) past which a lone bubble cannot keep a
// cluster alive; feeds extract_flat's leaf_density_caps.
std::vector<double> density_caps(std::span<const double> core_distances);

// Nearest-centroid assignment, ties to the smaller bubble index.
std::unordered_map<PointId, std::int64_t> assign_points(
    std::span<const Point> points, std::span<const DataBubble> bubbles);

}  // namespace dynhc
