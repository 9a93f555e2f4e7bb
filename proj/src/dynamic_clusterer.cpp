#include "dynhc/dynamic_clusterer.hpp"

#include <algorithm>
#include <chrono>
#include <string>
#include <unordered_set>

#include "dynhc/boruvka.hpp"
#include "dynhc/errors.hpp"
#include "dynhc/metric.hpp"

namespace dynhc {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Neighbor lists are ordered by (distance, id).
bool neighbor_before(const std::pair<PointId, double>& a,
                     const std::pair<PointId, double>& b) {
  if (a.second != b.second) return a.second < b.second;
  return a.first < b.first;
}

}  // namespace

DynamicClusterer::DynamicClusterer(int min_pts, IndexConfig index_cfg)
    : min_pts_(min_pts), index_(index_cfg) {
  if (min_pts < 1) throw InputError("min_pts must be positive");
}

DynamicClusterer::DynamicClusterer(int min_pts)
    : DynamicClusterer(min_pts, IndexConfig{min_pts, 5, 10}) {}

const CoreRecord& DynamicClusterer::core_record(PointId id) const {
  auto it = cores_.find(id);
  if (it == cores_.end())
    throw NotFoundError("no core record for id " + std::to_string(id));
  return it->second;
}

std::vector<Point> DynamicClusterer::points() const {
  std::vector<Point> out;
  out.reserve(index_.size());
  index_.for_each_entry(
      [&](const SsEntry& e) { out.push_back(Point{e.id, e.coords}); });
  std::sort(out.begin(), out.end(),
            [](const Point& a, const Point& b) { return a.id < b.id; });
  return out;
}

std::vector<ReachEdge> DynamicClusterer::mst_snapshot() const {
  if (!has_mst())
    throw StateError("no tree maintained at or below min_pts points");
  return forest_.edges();
}

double DynamicClusterer::edge_weight_now(PointId u, PointId v) const {
  return mutual_reachability(cores_.at(u).core_distance,
                             cores_.at(v).core_distance,
                             euclidean(index_.point_coords(u),
                                       index_.point_coords(v)));
}

void DynamicClusterer::drop_mst() {
  cores_.clear();
  forest_ = LinkCutForest{};
}

void DynamicClusterer::rebuild_all(UpdateStats& stats) {
  drop_mst();
  auto pts = points();
  for (const Point& p : pts) {
    auto nn = index_.knn(p.coords, min_pts_, p.id);
    CoreRecord rec{p.id, std::move(nn), 0.0};
    rec.core_distance = rec.neighbors.back().second;
    index_.refresh_cd(p.id, rec.core_distance);
    cores_.emplace(p.id, std::move(rec));
    forest_.add_vertex(p.id);
  }
  auto bstats = dual_tree_boruvka(index_, forest_);
  stats.rebuilt = true;
  stats.components_reconnected = bstats.initial_components;
  stats.boruvka_rounds = bstats.rounds;
}

UpdateStats DynamicClusterer::insert_point(const Point& p) {
  if (index_.contains(p.id))
    throw ConflictError("point id already present: " + std::to_string(p.id));
  UpdateStats stats;
  ++op_counter_;

  const std::size_t new_size = index_.size() + 1;
  if (new_size <= min_pts_u()) {
    index_.insert(p, 0.0);
    return stats;
  }
  if (new_size == min_pts_u() + 1) {
    const auto t0 = Clock::now();
    index_.insert(p, 0.0);
    rebuild_all(stats);
    stats.t_mst_ms = ms_since(t0);
    return stats;
  }

  const auto t_core0 = Clock::now();

  // Neighborhood of the newcomer over the existing points.
  auto nn = index_.knn(p.coords, min_pts_);
  CoreRecord rec{p.id, std::move(nn), 0.0};
  rec.core_distance = rec.neighbors.back().second;

  // Points whose neighbor lists may gain p. The inclusive bound catches
  // distance ties at the list boundary, where the id order decides.
  const auto reverse_set = index_.rknn_inclusive(p.coords);

  index_.insert(p, rec.core_distance);

  std::vector<PointId> touched;        // records that changed at all
  std::vector<PointId> value_changed;  // records whose cd value moved
  for (const PointId r : reverse_set) {
    CoreRecord& cr = cores_.at(r);
    const double d = euclidean(index_.point_coords(r), p.coords);
    auto& nb = cr.neighbors;
    const std::pair<PointId, double> cand{p.id, d};
    if (!neighbor_before(cand, nb.back())) continue;
    nb.insert(std::upper_bound(nb.begin(), nb.end(), cand, neighbor_before),
              cand);
    nb.pop_back();
    touched.push_back(r);
    const double new_cd = nb.back().second;
    if (new_cd != cr.core_distance) {
      cr.core_distance = new_cd;
      index_.refresh_cd(r, new_cd);
      value_changed.push_back(r);
    }
  }
  cores_.emplace(p.id, std::move(rec));
  stats.r_set_size = touched.size();
  stats.t_core_ms = ms_since(t_core0);

  const auto t_mst0 = Clock::now();
  forest_.add_vertex(p.id);

  // Tree edges touching a shrunken core distance carry stale weights;
  // refresh them before any path comparison.
  for (const PointId r : value_changed) {
    for (const ReachEdge& e : forest_.edges_incident(r)) {
      const double w = edge_weight_now(e.u, e.v);
      if (w != e.weight) forest_.set_edge_weight(e.u, e.v, w);
    }
  }

  const double cd_p = cores_.at(p.id).core_distance;

  // Candidate edges from p to every existing point.
  std::vector<ReachEdge> inserted_edges;
  inserted_edges.reserve(index_.size() - 1);
  index_.for_each_entry([&](const SsEntry& e) {
    if (e.id == p.id) return;
    const double w =
        mutual_reachability(cd_p, e.cd, euclidean(p.coords, e.coords));
    inserted_edges.push_back(make_edge(p.id, e.id, w));
  });
  std::sort(inserted_edges.begin(), inserted_edges.end(), edge_less);

  // Candidate edges between touched points and their current neighbors.
  std::vector<ReachEdge> modified_edges;
  for (const PointId r : touched) {
    const CoreRecord& cr = cores_.at(r);
    for (const auto& [nid, d] : cr.neighbors) {
      const double w = mutual_reachability(cr.core_distance,
                                           cores_.at(nid).core_distance, d);
      modified_edges.push_back(make_edge(r, nid, w));
    }
  }
  std::sort(modified_edges.begin(), modified_edges.end(), edge_less);

  for (const auto* batch : {&inserted_edges, &modified_edges}) {
    for (const ReachEdge& e : *batch) {
      ++stats.candidates_probed;
      const auto res = forest_.apply_candidate(e);
      if (res.outcome == LinkCutForest::ApplyOutcome::replaced)
        ++stats.replacements;
    }
  }
  stats.t_mst_ms = ms_since(t_mst0);
  return stats;
}

UpdateStats DynamicClusterer::delete_point(PointId id) {
  if (!index_.contains(id))
    throw NotFoundError("point id not present: " + std::to_string(id));
  if (index_.size() < 3)
    throw StateError("refusing to shrink below two points");
  UpdateStats stats;
  ++op_counter_;

  const std::size_t new_size = index_.size() - 1;
  if (!has_mst()) {
    index_.remove(id);
    return stats;
  }
  if (new_size <= min_pts_u()) {
    index_.remove(id);
    drop_mst();
    return stats;
  }

  const auto t_core0 = Clock::now();
  const Point gone = index_.remove(id);

  // Survivors that held the departed point in their neighbor lists. The
  // inclusive reverse query over the still-stale core distances is a
  // superset; list membership decides exactly.
  std::vector<PointId> reverse_set;
  for (const PointId r : index_.rknn_inclusive(gone.coords))
    if (cores_.at(r).has_neighbor(id)) reverse_set.push_back(r);

  for (const PointId r : reverse_set) {
    auto nn = index_.knn(index_.point_coords(r), min_pts_, r);
    CoreRecord rec{r, std::move(nn), 0.0};
    rec.core_distance = rec.neighbors.back().second;
    index_.refresh_cd(r, rec.core_distance);
    cores_[r] = std::move(rec);
  }
  cores_.erase(id);
  stats.r_set_size = reverse_set.size();
  stats.t_core_ms = ms_since(t_core0);

  const auto t_mst0 = Clock::now();
  const std::unordered_set<PointId> dirty(reverse_set.begin(),
                                          reverse_set.end());
  const auto removed = forest_.remove_edges([&](const ReachEdge& e) {
    return e.u == id || e.v == id || dirty.count(e.u) || dirty.count(e.v);
  });
  forest_.remove_vertex(id);
  stats.edges_removed = removed.size();

  const auto bstats = dual_tree_boruvka(index_, forest_);
  stats.components_reconnected = bstats.initial_components;
  stats.boruvka_rounds = bstats.rounds;
  stats.t_mst_ms = ms_since(t_mst0);
  return stats;
}

UpdateStats DynamicClusterer::insert_batch(const std::vector<Point>& points) {
  for (const Point& p : points)
    if (index_.contains(p.id))
      throw ConflictError("point id already present: " +
                          std::to_string(p.id));
  UpdateStats stats;
  ++op_counter_;
  const auto t0 = Clock::now();
  for (const Point& p : points) index_.insert(p, 0.0);
  if (index_.size() > min_pts_u())
    rebuild_all(stats);
  else
    drop_mst();
  stats.t_mst_ms = ms_since(t0);
  return stats;
}

}  // namespace dynhc
