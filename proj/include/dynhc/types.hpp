#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace dynhc {

using PointId = std::int64_t;

// Label value used for unclustered points in flat clusterings.
inline constexpr int kNoiseLabel = -1;

struct Point {
  PointId id = -1;
  std::vector<double> coords;
};

// Weighted undirected edge in mutual-reachability space. Stored normalized
// with u < v so edges compare and hash consistently.
struct ReachEdge {
  PointId u = -1;
  PointId v = -1;
  double weight = 0.0;

  friend bool operator==(const ReachEdge&, const ReachEdge&) = default;
};

inline ReachEdge make_edge(PointId a, PointId b, double w) {
  return a < b ? ReachEdge{a, b, w} : ReachEdge{b, a, w};
}

inline bool edge_less(const ReachEdge& a, const ReachEdge& b) {
  if (a.weight != b.weight) return a.weight < b.weight;
  if (a.u != b.u) return a.u < b.u;
  return a.v < b.v;
}

inline bool same_endpoints(const ReachEdge& a, const ReachEdge& b) {
  return a.u == b.u && a.v == b.v;
}

// Per-point neighborhood summary: the min_pts nearest other points ordered by
// (distance, id), and the distance to the last of them (the core distance).
struct CoreRecord {
  PointId point_id = -1;
  // (id, distance) pairs, ascending by (distance, id).
  std::vector<std::pair<PointId, double>> neighbors;
  double core_distance = 0.0;

  std::vector<PointId> neighbor_ids() const {
    std::vector<PointId> out;
    out.reserve(neighbors.size());
    for (const auto& [id, d] : neighbors) out.push_back(id);
    return out;
  }

  bool has_neighbor(PointId id) const {
    for (const auto& [nid, d] : neighbors)
      if (nid == id) return true;
    return false;
  }
};

}  // namespace dynhc
