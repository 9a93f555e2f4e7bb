#include "dynhc/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dynhc/errors.hpp"

namespace dynhc {

double euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw InputError("euclidean: dimension mismatch (" +
                     std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  if (a.empty()) throw InputError("euclidean: zero-dimensional input");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double euclidean(const Point& a, const Point& b) {
  return euclidean(std::span<const double>(a.coords),
                   std::span<const double>(b.coords));
}

double mutual_reachability(double cd_p, double cd_q, double dist) {
  if (cd_p < 0 || cd_q < 0 || dist < 0)
    throw InputError("mutual_reachability: negative argument");
  return std::max({cd_p, cd_q, dist});
}

std::unordered_map<PointId, CoreRecord> brute_core_distances(
    const std::vector<Point>& points, int min_pts) {
  if (min_pts < 1) throw InputError("brute_core_distances: min_pts < 1");
  if (points.size() <= static_cast<std::size_t>(min_pts))
    throw InsufficientDataError(
        "brute_core_distances: need more than min_pts points");

  std::unordered_map<PointId, CoreRecord> out;
  out.reserve(points.size());
  std::vector<std::pair<double, PointId>> dists;
  for (const Point& p : points) {
    dists.clear();
    dists.reserve(points.size() - 1);
    for (const Point& q : points) {
      if (q.id == p.id) continue;
      dists.emplace_back(euclidean(p, q), q.id);
    }
    std::partial_sort(dists.begin(), dists.begin() + min_pts, dists.end());
    CoreRecord rec;
    rec.point_id = p.id;
    rec.neighbors.reserve(min_pts);
    for (int i = 0; i < min_pts; ++i)
      rec.neighbors.emplace_back(dists[i].second, dists[i].first);
    rec.core_distance = dists[min_pts - 1].first;
    out.emplace(p.id, std::move(rec));
  }
  return out;
}

std::vector<std::pair<PointId, double>> brute_knn(
    const std::vector<Point>& points, std::span<const double> q, int k,
    PointId exclude) {
  if (k < 1) throw InputError("brute_knn: k < 1");
  std::vector<std::pair<double, PointId>> dists;
  dists.reserve(points.size());
  for (const Point& p : points) {
    if (p.id == exclude) continue;
    dists.emplace_back(euclidean(std::span<const double>(p.coords), q), p.id);
  }
  if (dists.size() < static_cast<std::size_t>(k))
    throw InsufficientDataError("brute_knn: fewer than k candidates");
  std::partial_sort(dists.begin(), dists.begin() + k, dists.end());
  std::vector<std::pair<PointId, double>> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) out.emplace_back(dists[i].second, dists[i].first);
  return out;
}

std::vector<ReachEdge> brute_mst(
    const std::vector<Point>& points,
    const std::unordered_map<PointId, CoreRecord>& cores) {
  if (points.size() < 2) throw InsufficientDataError("brute_mst: < 2 points");
  for (const Point& p : points)
    if (!cores.count(p.id))
      throw InputError("brute_mst: missing core record for point " +
                       std::to_string(p.id));

  // Work over positions; start from the smallest id for determinism.
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return points[a].id < points[b].id;
  });

  const std::size_t n = points.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> key(n, kInf);
  std::vector<std::size_t> best(n, n);
  std::vector<bool> in(n, false);

  std::vector<ReachEdge> tree;
  tree.reserve(n - 1);

  std::size_t cur = order[0];
  in[cur] = true;
  for (std::size_t added = 0; added + 1 < n; ++added) {
    const Point& cp = points[cur];
    const double ccd = cores.at(cp.id).core_distance;
    for (std::size_t j = 0; j < n; ++j) {
      if (in[j]) continue;
      const double w = mutual_reachability(
          ccd, cores.at(points[j].id).core_distance, euclidean(cp, points[j]));
      if (w < key[j] ||
          (w == key[j] && best[j] != n && points[cur].id < points[best[j]].id)) {
        key[j] = w;
        best[j] = cur;
      }
    }
    std::size_t pick = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (in[j]) continue;
      if (pick == n || key[j] < key[pick] ||
          (key[j] == key[pick] && points[j].id < points[pick].id))
        pick = j;
    }
    tree.push_back(make_edge(points[pick].id, points[best[pick]].id, key[pick]));
    in[pick] = true;
    cur = pick;
  }
  std::sort(tree.begin(), tree.end(), edge_less);
  return tree;
}

double total_weight(std::vector<ReachEdge> edges) {
  std::sort(edges.begin(), edges.end(), edge_less);
  double s = 0.0;
  for (const ReachEdge& e : edges) s += e.weight;
  return s;
}

}  // namespace dynhc
