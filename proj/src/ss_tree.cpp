#include "dynhc/ss_tree.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>

#include "dynhc/errors.hpp"
#include "dynhc/metric.hpp"

namespace dynhc {

namespace {

// Stored radii are padded a hair beyond the exact bounding value so that
// rounding in the distance computations can never make min_node_distance
// overshoot the true point distances. Pruning stays conservative and the
// exact-oracle equivalence of knn/rknn survives floating point.
double inflate(double raw) { return raw + raw * 1e-12 + 1e-12; }

std::size_t arity(const SsNode& n) {
  return n.leaf ? n.entries.size() : n.children.size();
}

}  // namespace

SsTree::SsTree(IndexConfig cfg) : cfg_(cfg) {
  if (cfg_.min_pts < 1) throw InputError("min_pts must be positive");
  if (cfg_.min_fanout < 1 || cfg_.max_fanout < 2)
    throw InputError("fanout bounds must be at least 1 and 2");
  if (2 * cfg_.min_fanout > cfg_.max_fanout + 1)
    throw InputError("fanout bounds must satisfy 2*m <= M+1");
}

SsTree::NodeStats SsTree::compute_stats(const SsNode& n) const {
  NodeStats s;
  s.centroid.assign(dim_, 0.0);
  if (n.leaf) {
    s.count = static_cast<int>(n.entries.size());
    for (const auto& e : n.entries)
      for (std::size_t i = 0; i < dim_; ++i) s.centroid[i] += e.coords[i];
    for (auto& c : s.centroid) c /= s.count;
    double raw = 0.0;
    for (const auto& e : n.entries) {
      raw = std::max(raw, euclidean(s.centroid, e.coords));
      s.cd_max = std::max(s.cd_max, e.cd);
    }
    s.radius = inflate(raw);
  } else {
    for (const auto& c : n.children) s.count += c->count;
    for (const auto& c : n.children)
      for (std::size_t i = 0; i < dim_; ++i)
        s.centroid[i] += c->centroid[i] * c->count;
    for (auto& v : s.centroid) v /= s.count;
    double raw = 0.0;
    for (const auto& c : n.children) {
      raw = std::max(raw, euclidean(s.centroid, c->centroid) + c->radius);
      s.cd_max = std::max(s.cd_max, c->cd_max);
    }
    s.radius = inflate(raw);
  }
  return s;
}

void SsTree::recompute(SsNode& n) const {
  NodeStats s = compute_stats(n);
  n.centroid = std::move(s.centroid);
  n.radius = s.radius;
  n.cd_max = s.cd_max;
  n.count = s.count;
}

double SsTree::min_node_distance(std::span<const double> q, const SsNode& n) {
  return std::max(0.0, euclidean(q, n.centroid) - n.radius);
}

SsNode* SsTree::split_node(SsNode* x) {
  const std::size_t s = arity(*x);
  // Split along the axis of largest spread among member positions.
  std::size_t axis = 0;
  double best_var = -1.0;
  for (std::size_t a = 0; a < dim_; ++a) {
    double mean = 0.0;
    if (x->leaf)
      for (const auto& e : x->entries) mean += e.coords[a];
    else
      for (const auto& c : x->children) mean += c->centroid[a];
    mean /= s;
    double var = 0.0;
    if (x->leaf)
      for (const auto& e : x->entries) {
        const double d = e.coords[a] - mean;
        var += d * d;
      }
    else
      for (const auto& c : x->children) {
        const double d = c->centroid[a] - mean;
        var += d * d;
      }
    if (var > best_var) {
      best_var = var;
      axis = a;
    }
  }

  if (x->leaf) {
    std::sort(x->entries.begin(), x->entries.end(),
              [axis](const SsEntry& a, const SsEntry& b) {
                if (a.coords[axis] != b.coords[axis])
                  return a.coords[axis] < b.coords[axis];
                return a.id < b.id;
              });
  } else {
    std::sort(x->children.begin(), x->children.end(),
              [axis](const std::unique_ptr<SsNode>& a,
                     const std::unique_ptr<SsNode>& b) {
                if (a->centroid[axis] != b->centroid[axis])
                  return a->centroid[axis] < b->centroid[axis];
                return a->seq < b->seq;
              });
  }

  const std::size_t lo = static_cast<std::size_t>(cfg_.min_fanout);
  const std::size_t pos = std::clamp(s / 2, lo, s - lo);

  auto sib = std::make_unique<SsNode>();
  sib->leaf = x->leaf;
  sib->seq = next_seq_++;
  sib->parent = x->parent;
  if (x->leaf) {
    sib->entries.assign(std::make_move_iterator(x->entries.begin() + pos),
                        std::make_move_iterator(x->entries.end()));
    x->entries.erase(x->entries.begin() + pos, x->entries.end());
    for (const auto& e : sib->entries) leaf_of_[e.id] = sib.get();
  } else {
    for (std::size_t i = pos; i < s; ++i) {
      x->children[i]->parent = sib.get();
      sib->children.push_back(std::move(x->children[i]));
    }
    x->children.erase(x->children.begin() + pos, x->children.end());
  }
  recompute(*x);
  recompute(*sib);

  if (!x->parent) {
    auto nr = std::make_unique<SsNode>();
    nr->leaf = false;
    nr->seq = next_seq_++;
    nr->children.push_back(std::move(root_));
    nr->children.push_back(std::move(sib));
    nr->children[0]->parent = nr.get();
    nr->children[1]->parent = nr.get();
    root_ = std::move(nr);
    return root_.get();
  }
  SsNode* p = x->parent;
  auto it = std::find_if(
      p->children.begin(), p->children.end(),
      [x](const std::unique_ptr<SsNode>& c) { return c.get() == x; });
  if (it == p->children.end())
    throw std::logic_error("split: node missing from its parent");
  p->children.insert(it + 1, std::move(sib));
  return p;
}

void SsTree::insert(const Point& p, double core_distance) {
  if (p.id < 0) throw InputError("point ids must be non-negative");
  if (p.coords.empty()) throw InputError("point has no coordinates");
  if (core_distance < 0.0)
    throw InputError("core distance must be non-negative");
  if (leaf_of_.count(p.id))
    throw ConflictError("point id already present: " + std::to_string(p.id));

  if (!root_) {
    dim_ = p.coords.size();
    root_ = std::make_unique<SsNode>();
    root_->leaf = true;
    root_->seq = next_seq_++;
    root_->entries.push_back({p.id, p.coords, core_distance});
    leaf_of_[p.id] = root_.get();
    recompute(*root_);
    return;
  }
  if (p.coords.size() != dim_)
    throw InputError("dimension mismatch: expected " + std::to_string(dim_) +
                     ", got " + std::to_string(p.coords.size()));

  SsNode* n = root_.get();
  while (!n->leaf) {
    SsNode* pick = nullptr;
    double pick_d = 0.0;
    for (const auto& c : n->children) {
      const double d = euclidean(p.coords, c->centroid);
      if (!pick || std::tuple(d, c->count, c->seq) <
                       std::tuple(pick_d, pick->count, pick->seq)) {
        pick = c.get();
        pick_d = d;
      }
    }
    n = pick;
  }
  n->entries.push_back({p.id, p.coords, core_distance});
  leaf_of_[p.id] = n;

  for (SsNode* cur = n; cur;) {
    if (arity(*cur) > static_cast<std::size_t>(cfg_.max_fanout)) {
      cur = split_node(cur);
    } else {
      recompute(*cur);
      cur = cur->parent;
    }
  }
}

void SsTree::collect_entries(SsNode& n, std::vector<SsEntry>& pool) {
  if (n.leaf) {
    for (auto& e : n.entries) {
      leaf_of_.erase(e.id);
      pool.push_back(std::move(e));
    }
    n.entries.clear();
  } else {
    for (auto& c : n.children) collect_entries(*c, pool);
  }
}

Point SsTree::remove(PointId id) {
  auto it = leaf_of_.find(id);
  if (it == leaf_of_.end())
    throw NotFoundError("point id not present: " + std::to_string(id));
  SsNode* leaf = it->second;
  auto eit = std::find_if(leaf->entries.begin(), leaf->entries.end(),
                          [id](const SsEntry& e) { return e.id == id; });
  if (eit == leaf->entries.end())
    throw std::logic_error("leaf map points to a leaf without the entry");
  Point out{id, std::move(eit->coords)};
  leaf->entries.erase(eit);
  leaf_of_.erase(it);

  std::vector<SsEntry> pool;
  SsNode* cur = leaf;
  while (cur != root_.get() &&
         arity(*cur) < static_cast<std::size_t>(cfg_.min_fanout)) {
    SsNode* par = cur->parent;
    collect_entries(*cur, pool);
    auto cit = std::find_if(
        par->children.begin(), par->children.end(),
        [cur](const std::unique_ptr<SsNode>& c) { return c.get() == cur; });
    if (cit == par->children.end())
      throw std::logic_error("dissolve: node missing from its parent");
    par->children.erase(cit);
    cur = par;
  }

  if (cur == root_.get()) {
    if (root_->leaf) {
      if (root_->entries.empty())
        root_.reset();
      else
        recompute(*root_);
    } else {
      while (root_ && !root_->leaf && root_->children.size() == 1) {
        auto child = std::move(root_->children[0]);
        child->parent = nullptr;
        root_ = std::move(child);
      }
      recompute(*root_);
    }
  } else {
    for (SsNode* a = cur; a; a = a->parent) recompute(*a);
  }

  for (auto& e : pool) {
    Point rp{e.id, std::move(e.coords)};
    insert(rp, e.cd);
  }
  return out;
}

std::vector<std::pair<PointId, double>> SsTree::knn(
    std::span<const double> q, int k,
    std::optional<PointId> exclude_id) const {
  if (k < 1) throw InputError("k must be positive");
  std::size_t avail = leaf_of_.size();
  if (exclude_id && leaf_of_.count(*exclude_id)) --avail;
  if (static_cast<std::size_t>(k) > avail)
    throw InsufficientDataError("knn requires " + std::to_string(k) +
                                " stored points, have " +
                                std::to_string(avail));
  if (q.size() != dim_)
    throw InputError("dimension mismatch: expected " + std::to_string(dim_) +
                     ", got " + std::to_string(q.size()));

  // Max-heap of current results, worst (distance, id) on top.
  using Cand = std::pair<double, PointId>;
  std::priority_queue<Cand> best;

  struct Frontier {
    double dmin;
    std::uint64_t seq;
    const SsNode* node;
  };
  auto later = [](const Frontier& a, const Frontier& b) {
    if (a.dmin != b.dmin) return a.dmin > b.dmin;
    return a.seq > b.seq;
  };
  std::priority_queue<Frontier, std::vector<Frontier>, decltype(later)>
      frontier(later);
  frontier.push({min_node_distance(q, *root_), root_->seq, root_.get()});

  const auto kk = static_cast<std::size_t>(k);
  while (!frontier.empty()) {
    const auto top = frontier.top();
    frontier.pop();
    // Equal bounds still need a visit: a tied point with a smaller id
    // would displace the incumbent.
    if (best.size() == kk && top.dmin > best.top().first) continue;
    if (top.node->leaf) {
      for (const auto& e : top.node->entries) {
        if (exclude_id && e.id == *exclude_id) continue;
        const Cand c{euclidean(q, e.coords), e.id};
        if (best.size() < kk)
          best.push(c);
        else if (c < best.top()) {
          best.pop();
          best.push(c);
        }
      }
    } else {
      for (const auto& ch : top.node->children) {
        const double d = min_node_distance(q, *ch);
        if (best.size() == kk && d > best.top().first) continue;
        frontier.push({d, ch->seq, ch.get()});
      }
    }
  }

  std::vector<std::pair<PointId, double>> out(best.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = {best.top().second, best.top().first};
    best.pop();
  }
  return out;
}

void SsTree::rknn_walk(std::span<const double> p, bool inclusive,
                       std::vector<PointId>& out) const {
  if (!root_) return;
  if (p.size() != dim_)
    throw InputError("dimension mismatch: expected " + std::to_string(dim_) +
                     ", got " + std::to_string(p.size()));
  auto admits = [inclusive](double d, double bound) {
    return inclusive ? d <= bound : d < bound;
  };
  std::vector<const SsNode*> stack;
  if (admits(min_node_distance(p, *root_), root_->cd_max))
    stack.push_back(root_.get());
  while (!stack.empty()) {
    const SsNode* n = stack.back();
    stack.pop_back();
    if (n->leaf) {
      for (const auto& e : n->entries)
        if (admits(euclidean(p, e.coords), e.cd)) out.push_back(e.id);
    } else {
      for (const auto& c : n->children)
        if (admits(min_node_distance(p, *c), c->cd_max))
          stack.push_back(c.get());
    }
  }
}

std::vector<PointId> SsTree::rknn(std::span<const double> p) const {
  std::vector<PointId> out;
  rknn_walk(p, false, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<PointId> SsTree::rknn_inclusive(std::span<const double> p) const {
  std::vector<PointId> out;
  rknn_walk(p, true, out);
  std::sort(out.begin(), out.end());
  return out;
}

SsEntry& SsTree::find_entry(PointId id) const {
  auto it = leaf_of_.find(id);
  if (it == leaf_of_.end())
    throw NotFoundError("point id not present: " + std::to_string(id));
  for (auto& e : it->second->entries)
    if (e.id == id) return e;
  throw std::logic_error("leaf map points to a leaf without the entry");
}

void SsTree::refresh_cd(PointId id, double core_distance) {
  if (core_distance < 0.0)
    throw InputError("core distance must be non-negative");
  SsEntry& e = find_entry(id);
  e.cd = core_distance;
  for (SsNode* a = leaf_of_.at(id); a; a = a->parent) {
    double m = 0.0;
    if (a->leaf)
      for (const auto& en : a->entries) m = std::max(m, en.cd);
    else
      for (const auto& c : a->children) m = std::max(m, c->cd_max);
    a->cd_max = m;
  }
}

double SsTree::point_cd(PointId id) const { return find_entry(id).cd; }

const std::vector<double>& SsTree::point_coords(PointId id) const {
  return find_entry(id).coords;
}

void SsTree::for_each_entry(
    const std::function<void(const SsEntry&)>& fn) const {
  if (!root_) return;
  std::vector<const SsNode*> stack{root_.get()};
  while (!stack.empty()) {
    const SsNode* n = stack.back();
    stack.pop_back();
    if (n->leaf)
      for (const auto& e : n->entries) fn(e);
    else
      for (const auto& c : n->children) stack.push_back(c.get());
  }
}

void SsTree::audit_node(const SsNode* n, int depth, int& leaf_depth,
                        std::size_t& entries_seen) const {
  const auto lo = static_cast<std::size_t>(cfg_.min_fanout);
  const auto hi = static_cast<std::size_t>(cfg_.max_fanout);
  const bool is_root = n == root_.get();

  NodeStats s = compute_stats(*n);
  if (s.centroid != n->centroid || s.radius != n->radius ||
      s.cd_max != n->cd_max || s.count != n->count)
    throw std::logic_error("audit: stale node summary");

  if (n->leaf) {
    if (leaf_depth == -1)
      leaf_depth = depth;
    else if (depth != leaf_depth)
      throw std::logic_error("audit: leaves at unequal depth");
    if (n->entries.empty()) throw std::logic_error("audit: empty leaf");
    if (!is_root && n->entries.size() < lo)
      throw std::logic_error("audit: leaf underflow");
    if (n->entries.size() > hi) throw std::logic_error("audit: leaf overflow");
    for (const auto& e : n->entries) {
      auto it = leaf_of_.find(e.id);
      if (it == leaf_of_.end() || it->second != n)
        throw std::logic_error("audit: leaf map out of sync");
      if (e.coords.size() != dim_)
        throw std::logic_error("audit: entry dimension mismatch");
      if (euclidean(n->centroid, e.coords) > n->radius)
        throw std::logic_error("audit: entry outside leaf sphere");
      ++entries_seen;
    }
  } else {
    if (n->children.size() < (is_root ? 2 : lo))
      throw std::logic_error("audit: internal underflow");
    if (n->children.size() > hi)
      throw std::logic_error("audit: internal overflow");
    for (const auto& c : n->children) {
      if (c->parent != n) throw std::logic_error("audit: bad parent link");
      if (euclidean(n->centroid, c->centroid) + c->radius > n->radius)
        throw std::logic_error("audit: child sphere outside parent");
      audit_node(c.get(), depth + 1, leaf_depth, entries_seen);
    }
  }
}

void SsTree::audit() const {
  if (!root_) {
    if (!leaf_of_.empty())
      throw std::logic_error("audit: empty tree with mapped points");
    return;
  }
  if (root_->parent) throw std::logic_error("audit: root has a parent");
  int leaf_depth = -1;
  std::size_t entries_seen = 0;
  audit_node(root_.get(), 0, leaf_depth, entries_seen);
  if (entries_seen != leaf_of_.size())
    throw std::logic_error("audit: point count mismatch");
}

}  // namespace dynhc
