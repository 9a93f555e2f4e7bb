#include "dynhc/boruvka.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dynhc/errors.hpp"
#include "dynhc/metric.hpp"

namespace dynhc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower bound on the distance between any point under a and any under b.
double min_pair_distance(const SsNode& a, const SsNode& b) {
  return std::max(0.0, euclidean(a.centroid, b.centroid) - a.radius - b.radius);
}

double component_bound(const BoruvkaState& state, PointId root) {
  auto it = state.best.find(root);
  return it == state.best.end() ? kInf : it->second.weight;
}

// Current pruning bound for a leaf: the worst candidate among the
// components present in it. Cheap enough to recompute on every visit,
// which lets bounds tighten as sibling scans land candidates.
double live_leaf_bound(const SsNode& leaf, const BoruvkaState& state) {
  double b = 0.0;
  for (const auto& e : leaf.entries)
    b = std::max(b, component_bound(state, state.components.find(e.id)));
  return b;
}

std::int64_t mark_node(const SsNode& n, const DisjointSet& comps) {
  n.bound = kInf;
  if (n.leaf) {
    std::int64_t c = comps.find(n.entries.front().id);
    for (const auto& e : n.entries)
      if (comps.find(e.id) != c) {
        c = kMixedComponent;
        break;
      }
    n.comp = c;
  } else {
    std::int64_t c = mark_node(*n.children.front(), comps);
    for (std::size_t i = 1; i < n.children.size(); ++i) {
      const std::int64_t cc = mark_node(*n.children[i], comps);
      if (cc != c) c = kMixedComponent;
    }
    n.comp = c;
  }
  return n.comp;
}

}  // namespace

void DisjointSet::add(PointId x) {
  if (parent_.emplace(x, x).second) {
    rank_[x] = 1;
    ++comps_;
  }
}

PointId DisjointSet::find(PointId x) const {
  auto it = parent_.find(x);
  if (it == parent_.end())
    throw NotFoundError("id not in partition: " + std::to_string(x));
  PointId root = x;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[x] != root) {
    PointId next = parent_[x];
    parent_[x] = root;
    x = next;
  }
  return root;
}

bool DisjointSet::unite(PointId a, PointId b) {
  PointId ra = find(a), rb = find(b);
  if (ra == rb) return false;
  if (rank_[ra] < rank_[rb] || (rank_[ra] == rank_[rb] && rb < ra))
    std::swap(ra, rb);
  parent_[rb] = ra;
  rank_[ra] += rank_[rb];
  rank_.erase(rb);
  --comps_;
  return true;
}

void mark_tree(const SsTree& index, const BoruvkaState& state) {
  if (index.root()) mark_node(*index.root(), state.components);
}

void find_component_neighbors(const SsNode& q, const SsNode& r,
                              BoruvkaState& state) {
  if (q.comp != kMixedComponent && q.comp == r.comp) return;
  if (q.leaf) q.bound = live_leaf_bound(q, state);
  if (min_pair_distance(q, r) >= q.bound) return;

  if (!q.leaf) {
    for (const auto& qc : q.children) find_component_neighbors(*qc, r, state);
    double b = 0.0;
    for (const auto& qc : q.children) b = std::max(b, qc->bound);
    q.bound = b;
    return;
  }
  if (!r.leaf) {
    // Nearest subtrees first so candidate bounds tighten before the
    // far ones are considered.
    std::vector<const SsNode*> order;
    order.reserve(r.children.size());
    for (const auto& rc : r.children) order.push_back(rc.get());
    std::sort(order.begin(), order.end(),
              [&](const SsNode* a, const SsNode* b) {
                const double da = min_pair_distance(q, *a);
                const double db = min_pair_distance(q, *b);
                if (da != db) return da < db;
                return a->seq < b->seq;
              });
    for (const SsNode* rc : order) find_component_neighbors(q, *rc, state);
    return;
  }

  // leaf x leaf scan
  for (const auto& qe : q.entries) {
    const PointId cq = state.components.find(qe.id);
    for (const auto& re : r.entries) {
      const PointId cr = state.components.find(re.id);
      if (cq == cr) continue;
      const double d = euclidean(qe.coords, re.coords);
      const double w = mutual_reachability(qe.cd, re.cd, d);
      const ReachEdge cand = make_edge(qe.id, re.id, w);
      auto it = state.best.find(cq);
      if (it == state.best.end())
        state.best.emplace(cq, cand);
      else if (edge_less(cand, it->second))
        it->second = cand;
    }
  }
  q.bound = live_leaf_bound(q, state);
}

BoruvkaStats dual_tree_boruvka(const SsTree& index, LinkCutForest& forest) {
  if (forest.vertex_count() != index.size())
    throw StateError("index and forest disagree on the vertex count");
  index.for_each_entry([&](const SsEntry& e) {
    if (!forest.has_vertex(e.id))
      throw StateError("index point missing from forest: " +
                       std::to_string(e.id));
  });

  BoruvkaStats stats;
  BoruvkaState state;
  index.for_each_entry([&](const SsEntry& e) { state.components.add(e.id); });
  for (const ReachEdge& e : forest.edges()) state.components.unite(e.u, e.v);
  stats.initial_components = state.components.component_count();

  while (state.components.component_count() > 1) {
    state.best.clear();
    mark_tree(index, state);
    find_component_neighbors(*index.root(), *index.root(), state);

    std::vector<ReachEdge> picked;
    picked.reserve(state.best.size());
    for (const auto& [root, edge] : state.best) picked.push_back(edge);
    std::sort(picked.begin(), picked.end(), edge_less);

    bool progressed = false;
    for (const ReachEdge& e : picked) {
      if (state.components.unite(e.u, e.v)) {
        forest.link(e.u, e.v, e.weight);
        ++stats.edges_added;
        progressed = true;
      }
    }
    if (!progressed)
      throw std::logic_error("boruvka round produced no merges");
    ++stats.rounds;
  }
  return stats;
}

}  // namespace dynhc
