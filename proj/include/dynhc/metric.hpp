#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "dynhc/types.hpp"

namespace dynhc {

// Plain Euclidean distance. Throws InputError on dimension mismatch or empty
// vectors. Every distance in this library funnels through this function so
// that incremental maintenance and the brute-force oracles produce bitwise
// identical values.
double euclidean(std::span<const double> a, std::span<const double> b);
double euclidean(const Point& a, const Point& b);

// max{cd_p, cd_q, dist}. Throws InputError on negative arguments.
double mutual_reachability(double cd_p, double cd_q, double dist);

// Quadratic-scan oracle: for every point the min_pts nearest other points,
// ties broken by ascending id. Requires |points| > min_pts and min_pts >= 1.
std::unordered_map<PointId, CoreRecord> brute_core_distances(
    const std::vector<Point>& points, int min_pts);

// Single nearest-neighbor list for a foreign query location (used by the
// spatial-index oracle tests). `exclude` skips one id, `k` must be satisfiable.
std::vector<std::pair<PointId, double>> brute_knn(
    const std::vector<Point>& points, std::span<const double> q, int k,
    PointId exclude = -1);

// Prim's algorithm over the complete mutual-reachability graph. Ties broken
// by ascending id so the result is deterministic; the edge *set* of equal
// weight MSTs is not unique, but the weight multiset is. Requires >= 2 points
// and a core record for every point.
std::vector<ReachEdge> brute_mst(
    const std::vector<Point>& points,
    const std::unordered_map<PointId, CoreRecord>& cores);

// Sum of edge weights accumulated in ascending (weight, u, v) order, so equal
// weight multisets sum to bitwise identical totals.
double total_weight(std::vector<ReachEdge> edges);

}  // namespace dynhc
