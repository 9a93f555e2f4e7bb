#include "dynhc/link_cut_forest.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "dynhc/errors.hpp"
#include "dynhc/metric.hpp"

namespace dynhc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

int LinkCutForest::alloc_node(double value, PointId eu, PointId ev) {
  int x;
  if (!free_.empty()) {
    x = free_.back();
    free_.pop_back();
    nodes_[x] = SNode{};
  } else {
    x = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
  }
  nodes_[x].value = value;
  nodes_[x].max_idx = x;
  nodes_[x].eu = eu;
  nodes_[x].ev = ev;
  return x;
}

void LinkCutForest::free_node(int x) {
  if (nodes_[x].ch[0] >= 0 || nodes_[x].ch[1] >= 0 || nodes_[x].parent >= 0)
    throw std::logic_error("link-cut forest: freeing a non-isolated element");
  free_.push_back(x);
}

bool LinkCutForest::is_splay_root(int x) const {
  const int p = nodes_[x].parent;
  return p < 0 || (nodes_[p].ch[0] != x && nodes_[p].ch[1] != x);
}

void LinkCutForest::push(int x) {
  SNode& n = nodes_[x];
  if (!n.flip) return;
  std::swap(n.ch[0], n.ch[1]);
  for (int c : n.ch)
    if (c >= 0) nodes_[c].flip = !nodes_[c].flip;
  n.flip = false;
}

void LinkCutForest::pull(int x) {
  SNode& n = nodes_[x];
  int mi = x;
  double mv = n.value;
  for (int c : n.ch) {
    if (c < 0) continue;
    const int cm = nodes_[c].max_idx;
    if (nodes_[cm].value > mv) {
      mi = cm;
      mv = nodes_[cm].value;
    }
  }
  n.max_idx = mi;
}

void LinkCutForest::rotate(int x) {
  const int p = nodes_[x].parent;
  const int g = nodes_[p].parent;
  const bool p_attached = !is_splay_root(p);
  const int side = nodes_[p].ch[1] == x ? 1 : 0;
  const int b = nodes_[x].ch[side ^ 1];

  nodes_[p].ch[side] = b;
  if (b >= 0) nodes_[b].parent = p;
  nodes_[x].ch[side ^ 1] = p;
  nodes_[p].parent = x;
  nodes_[x].parent = g;
  if (p_attached) {
    if (nodes_[g].ch[0] == p)
      nodes_[g].ch[0] = x;
    else
      nodes_[g].ch[1] = x;
  }
  pull(p);
  pull(x);
}

void LinkCutForest::splay(int x) {
  // Clear pending flips along the root-to-x spine before rotating.
  thread_local std::vector<int> spine;
  spine.clear();
  for (int y = x;; y = nodes_[y].parent) {
    spine.push_back(y);
    if (is_splay_root(y)) break;
  }
  for (auto it = spine.rbegin(); it != spine.rend(); ++it) push(*it);

  while (!is_splay_root(x)) {
    const int p = nodes_[x].parent;
    if (!is_splay_root(p)) {
      const int g = nodes_[p].parent;
      const bool zigzig = (nodes_[g].ch[0] == p) == (nodes_[p].ch[0] == x);
      rotate(zigzig ? p : x);
    }
    rotate(x);
  }
}

void LinkCutForest::access(int x) {
  splay(x);
  nodes_[x].ch[1] = -1;  // detached subtree keeps x as its path parent
  pull(x);
  while (nodes_[x].parent >= 0) {
    const int y = nodes_[x].parent;
    splay(y);
    nodes_[y].ch[1] = x;
    pull(y);
    splay(x);
  }
}

void LinkCutForest::make_root(int x) {
  access(x);
  nodes_[x].flip = !nodes_[x].flip;
  push(x);
}

int LinkCutForest::find_root(int x) {
  access(x);
  while (true) {
    push(x);
    if (nodes_[x].ch[0] < 0) break;
    x = nodes_[x].ch[0];
  }
  splay(x);
  return x;
}

int LinkCutForest::vertex_node(PointId v) const {
  auto it = vert_.find(v);
  if (it == vert_.end())
    throw NotFoundError("link-cut forest: unknown vertex " + std::to_string(v));
  return it->second;
}

void LinkCutForest::add_vertex(PointId v) {
  if (vert_.count(v))
    throw ConflictError("link-cut forest: vertex " + std::to_string(v) +
                        " already present");
  vert_.emplace(v, alloc_node(kNegInf, -1, -1));
  adj_.emplace(v, std::vector<PointId>{});
}

void LinkCutForest::remove_vertex(PointId v) {
  const int x = vertex_node(v);
  if (!adj_.at(v).empty())
    throw StateError("link-cut forest: vertex " + std::to_string(v) +
                     " still has incident edges");
  free_node(x);
  vert_.erase(v);
  adj_.erase(v);
}

bool LinkCutForest::connected(PointId u, PointId v) {
  const int nu = vertex_node(u);
  const int nv = vertex_node(v);
  if (nu == nv) return true;
  return find_root(nu) == find_root(nv);
}

void LinkCutForest::link(PointId u, PointId v, double weight) {
  if (u == v) throw InputError("link-cut forest: self loop");
  const int nu = vertex_node(u);
  const int nv = vertex_node(v);
  if (connected(u, v))
    throw StateError("link-cut forest: endpoints already connected");

  const int e = alloc_node(weight, u, v);
  make_root(nu);
  nodes_[nu].parent = e;
  make_root(e);
  nodes_[e].parent = nv;

  edges_.emplace(key(u, v), EdgeRec{weight, e});
  adj_[u].push_back(v);
  adj_[v].push_back(u);
}

void LinkCutForest::cut(PointId u, PointId v) {
  auto it = edges_.find(key(u, v));
  if (it == edges_.end())
    throw NotFoundError("link-cut forest: no edge (" + std::to_string(u) +
                        "," + std::to_string(v) + ")");
  const int e = it->second.node;
  const int nu = vertex_node(u);
  const int nv = vertex_node(v);

  // Root the tree at u, then slice the edge element out of the path. After
  // the first detach the edge element is the represented root of the side
  // still holding v, so the second detach peels it off v.
  make_root(nu);
  access(e);
  const int above = nodes_[e].ch[0];
  if (above < 0) throw std::logic_error("cut: edge element has no upper path");
  nodes_[above].parent = -1;
  nodes_[e].ch[0] = -1;
  pull(e);

  access(nv);
  if (nodes_[nv].ch[0] != e || nodes_[e].ch[0] >= 0 || nodes_[e].ch[1] >= 0)
    throw std::logic_error("cut: edge element not adjacent to v side");
  nodes_[nv].ch[0] = -1;
  nodes_[e].parent = -1;
  pull(nv);

  free_node(e);
  edges_.erase(it);
  auto drop = [](std::vector<PointId>& vec, PointId x) {
    vec.erase(std::find(vec.begin(), vec.end(), x));
  };
  drop(adj_[u], v);
  drop(adj_[v], u);
}

bool LinkCutForest::has_edge(PointId u, PointId v) const {
  return edges_.count(key(u, v)) != 0;
}

double LinkCutForest::edge_weight(PointId u, PointId v) const {
  auto it = edges_.find(key(u, v));
  if (it == edges_.end())
    throw NotFoundError("link-cut forest: no edge (" + std::to_string(u) +
                        "," + std::to_string(v) + ")");
  return it->second.weight;
}

void LinkCutForest::set_edge_weight(PointId u, PointId v, double weight) {
  auto it = edges_.find(key(u, v));
  if (it == edges_.end())
    throw NotFoundError("link-cut forest: no edge (" + std::to_string(u) +
                        "," + std::to_string(v) + ")");
  const int e = it->second.node;
  access(e);
  nodes_[e].value = weight;
  pull(e);
  it->second.weight = weight;
}

ReachEdge LinkCutForest::max_edge_on_path(PointId u, PointId v) {
  if (u == v) throw InputError("max_edge_on_path: empty path");
  const int nu = vertex_node(u);
  const int nv = vertex_node(v);
  if (find_root(nu) != find_root(nv))
    throw StateError("max_edge_on_path: endpoints not connected");

  make_root(nu);
  access(nv);
  const int mi = nodes_[nv].max_idx;
  const SNode& n = nodes_[mi];
  if (n.eu < 0)
    throw std::logic_error("max_edge_on_path: aggregate landed on a vertex");
  return make_edge(n.eu, n.ev, n.value);
}

LinkCutForest::ApplyResult LinkCutForest::apply_candidate(const ReachEdge& e) {
  if (e.u == e.v) throw InputError("apply_candidate: self loop");
  vertex_node(e.u);
  vertex_node(e.v);
  if (!connected(e.u, e.v)) {
    link(e.u, e.v, e.weight);
    return {ApplyOutcome::linked, std::nullopt};
  }
  const ReachEdge mx = max_edge_on_path(e.u, e.v);
  // An equal-weight incumbent stays: only a strictly lighter candidate swaps.
  if (mx.weight <= e.weight) return {ApplyOutcome::rejected, std::nullopt};
  cut(mx.u, mx.v);
  link(e.u, e.v, e.weight);
  return {ApplyOutcome::replaced, mx};
}

std::vector<ReachEdge> LinkCutForest::remove_edges(
    const std::function<bool(const ReachEdge&)>& pred) {
  std::vector<ReachEdge> doomed;
  for (const auto& [k, rec] : edges_) {
    const ReachEdge e{k.first, k.second, rec.weight};
    if (pred(e)) doomed.push_back(e);
  }
  for (const ReachEdge& e : doomed) cut(e.u, e.v);
  return doomed;
}

std::vector<ReachEdge> LinkCutForest::edges() const {
  std::vector<ReachEdge> out;
  out.reserve(edges_.size());
  for (const auto& [k, rec] : edges_)
    out.push_back(ReachEdge{k.first, k.second, rec.weight});
  std::sort(out.begin(), out.end(), edge_less);
  return out;
}

std::vector<ReachEdge> LinkCutForest::edges_incident(PointId v) const {
  auto it = adj_.find(v);
  if (it == adj_.end())
    throw NotFoundError("link-cut forest: unknown vertex " + std::to_string(v));
  std::vector<ReachEdge> out;
  out.reserve(it->second.size());
  for (PointId nbr : it->second)
    out.push_back(make_edge(v, nbr, edges_.at(key(v, nbr)).weight));
  std::sort(out.begin(), out.end(), edge_less);
  return out;
}

double LinkCutForest::total_weight() const { return dynhc::total_weight(edges()); }

}  // namespace dynhc
