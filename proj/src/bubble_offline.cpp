#include "dynhc/bubble_offline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dynhc/errors.hpp"
#include "dynhc/metric.hpp"

namespace dynhc {

double DataBubble::nn_dist(std::int64_t k) const {
  if (k < 1) throw InputError("nearest-member rank must be positive");
  if (n < 1) throw InputError("bubble holds no points");
  return std::pow(static_cast<double>(k) / static_cast<double>(n),
                  1.0 / static_cast<double>(dim())) *
         extent;
}

DataBubble derive_bubble(const ClusteringFeature& cf, int dim,
                         std::vector<PointId> members) {
  if (cf.n < 1) throw InputError("cannot derive a bubble from an empty feature");
  if (dim < 1 || static_cast<std::size_t>(dim) != cf.ls.size())
    throw InputError("bubble dimensionality does not match the feature");

  DataBubble out;
  out.n = cf.n;
  out.members = std::move(members);
  out.rep.resize(cf.ls.size());
  for (std::size_t i = 0; i < cf.ls.size(); ++i)
    out.rep[i] = cf.ls[i] / static_cast<double>(cf.n);

  if (cf.n == 1) {
    out.extent = 0.0;
    return out;
  }
  double ls_sq = 0.0;
  for (double v : cf.ls) ls_sq += v * v;
  const double nd = static_cast<double>(cf.n);
  double radicand = 2.0 * nd * cf.ss - 2.0 * ls_sq;
  if (radicand < 0.0) {
    // Cauchy-Schwarz guarantees this is non-negative in exact math
    const double tol = 1e-9 * std::max(1.0, 2.0 * nd * cf.ss);
    if (radicand < -tol)
      throw InputError("clustering feature violates its variance bound");
    radicand = 0.0;
  }
  out.extent = std::sqrt(radicand / (nd * (nd - 1.0)));
  return out;
}

double bubble_distance(const DataBubble& b, const DataBubble& c) {
  if (&b == &c) return 0.0;
  if (b.rep.size() != c.rep.size())
    throw InputError("bubble dimensionality mismatch");
  const double gap = euclidean(b.rep, c.rep);
  // grouped so the result is bitwise symmetric in b and c
  if (gap >= b.extent + c.extent)
    return gap - (b.extent + c.extent) + (b.nn_dist(1) + c.nn_dist(1));
  return std::max(b.nn_dist(1), c.nn_dist(1));
}

double bubble_core_distance(std::span<const DataBubble> bubbles,
                            std::size_t self, std::int64_t min_pts) {
  if (self >= bubbles.size()) throw InputError("bubble index out of range");
  if (min_pts < 1) throw InputError("min_pts must be positive");
  std::int64_t total = 0;
  for (const DataBubble& b : bubbles) total += b.n;
  if (total < min_pts)
    throw InsufficientDataError(
        "bubbles hold fewer points than the requested neighborhood");

  // self sorts first at distance 0, then ascending (distance, index)
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(bubbles.size());
  for (std::size_t i = 0; i < bubbles.size(); ++i)
    order.emplace_back(
        i == self ? 0.0 : bubble_distance(bubbles[self], bubbles[i]), i);
  std::sort(order.begin(), order.end(),
            [self](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first < b.first;
              if (a.second == self) return b.second != self;
              if (b.second == self) return false;
              return a.second < b.second;
            });

  std::int64_t covered = 0;
  for (const auto& [dist, idx] : order) {
    const std::int64_t before = covered;
    covered += bubbles[idx].n;
    if (covered >= min_pts)
      return dist + bubbles[idx].nn_dist(min_pts - before);
  }
  throw std::logic_error("bubble weight accounting failed");
}

double bubble_mutual_reachability(const DataBubble& b, const DataBubble& c,
                                  double cd_b, double cd_c) {
  return mutual_reachability(cd_b, cd_c, bubble_distance(b, c));
}

BubbleClustering cluster_bubbles(std::span<const DataBubble> bubbles,
                                 int min_pts) {
  const std::size_t count = bubbles.size();
  if (count < 2) throw InputError("clustering needs at least two bubbles");
  if (min_pts < 1) throw InputError("min_pts must be positive");

  // the query bubble's own first point plays the role the query point
  // itself plays point-side, so the covered-weight target is one more
  // than the neighbor count
  BubbleClustering out;
  out.core_distances.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.core_distances.push_back(
        bubble_core_distance(bubbles, i, static_cast<std::int64_t>(min_pts) + 1));

  // Prim over the complete graph; the compressed set is small enough
  // that the quadratic scan is the whole point of the exercise
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> key(count, kInf);
  std::vector<std::size_t> best(count, count);
  std::vector<bool> in(count, false);
  std::vector<ReachEdge> tree;
  tree.reserve(count - 1);

  std::size_t cur = 0;
  in[cur] = true;
  for (std::size_t added = 0; added + 1 < count; ++added) {
    for (std::size_t j = 0; j < count; ++j) {
      if (in[j]) continue;
      const double w =
          bubble_mutual_reachability(bubbles[cur], bubbles[j],
                                     out.core_distances[cur],
                                     out.core_distances[j]);
      if (w < key[j] || (w == key[j] && best[j] != count && cur < best[j])) {
        key[j] = w;
        best[j] = cur;
      }
    }
    std::size_t pick = count;
    for (std::size_t j = 0; j < count; ++j) {
      if (in[j]) continue;
      if (pick == count || key[j] < key[pick] ||
          (key[j] == key[pick] && j < pick))
        pick = j;
    }
    tree.push_back(make_edge(static_cast<PointId>(pick),
                             static_cast<PointId>(best[pick]), key[pick]));
    in[pick] = true;
    cur = pick;
  }

  std::vector<std::int64_t> weights;
  weights.reserve(count);
  for (const DataBubble& b : bubbles) weights.push_back(b.n);
  out.dendrogram = build_dendrogram(tree, std::move(weights));
  return out;
}

std::vector<double> density_caps(std::span<const double> core_distances) {
  std::vector<double> caps;
  caps.reserve(core_distances.size());
  for (double cd : core_distances)
    caps.push_back(cd > 0.0 ? 1.0 / cd
                            : std::numeric_limits<double>::infinity());
  return caps;
}

std::unordered_map<PointId, std::int64_t> assign_points(
    std::span<const Point> points, std::span<const DataBubble> bubbles) {
  if (bubbles.empty()) throw InputError("no bubbles to assign points to");
  std::unordered_map<PointId, std::int64_t> out;
  out.reserve(points.size());
  for (const Point& p : points) {
    std::int64_t pick = 0;
    double pick_dist = euclidean(p.coords, bubbles[0].rep);
    for (std::size_t i = 1; i < bubbles.size(); ++i) {
      const double d = euclidean(p.coords, bubbles[i].rep);
      if (d < pick_dist) {
        pick_dist = d;
        pick = static_cast<std::int64_t>(i);
      }
    }
    out[p.id] = pick;
  }
  return out;
}

}  // namespace dynhc
