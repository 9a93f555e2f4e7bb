#include "dynhc/bubble_tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "dynhc/errors.hpp"
#include "dynhc/metric.hpp"

namespace dynhc {

QualityReport classify_quality(std::span<const std::int64_t> weights,
                               std::int64_t total, double k) {
  if (weights.empty()) throw InputError("no summary weights to classify");
  if (!(k > 0.0)) throw InputError("band width factor must be positive");
  std::int64_t sum = 0;
  for (std::int64_t w : weights) {
    if (w <= 0) throw InputError("summary weights must be positive");
    sum += w;
  }
  if (sum != total)
    throw InputError("summary weights do not sum to the stated total");

  QualityReport report;
  report.beta.reserve(weights.size());
  for (std::int64_t w : weights)
    report.beta.push_back(static_cast<double>(w) / static_cast<double>(total));

  double mean = 0.0;
  for (double b : report.beta) mean += b;
  mean /= static_cast<double>(report.beta.size());
  double var = 0.0;
  for (double b : report.beta) var += (b - mean) * (b - mean);
  var /= static_cast<double>(report.beta.size());

  report.mean = mean;
  report.stddev = std::sqrt(var);
  report.lower = mean - k * report.stddev;
  report.upper = mean + k * report.stddev;
  report.labels.reserve(report.beta.size());
  for (double b : report.beta) {
    QualityLabel label = QualityLabel::kGood;
    if (report.stddev > 0.0) {
      if (b <= report.lower)
        label = QualityLabel::kUnder;
      else if (b >= report.upper)
        label = QualityLabel::kOver;
    }
    report.labels.push_back(label);
  }
  return report;
}

std::vector<double> BubbleNode::rep() const {
  if (cf.n < 1) throw std::logic_error("representative of an empty summary");
  std::vector<double> r(cf.ls.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = cf.ls[i] / static_cast<double>(cf.n);
  return r;
}

BubbleTree::BubbleTree(double rho, int min_fanout, int max_fanout)
    : rho_(rho), min_fanout_(min_fanout), max_fanout_(max_fanout) {
  if (!(rho > 0.0) || rho > 1.0)
    throw InputError("compression ratio must lie in (0, 1]");
  if (min_fanout < 2) throw InputError("min fanout must be at least 2");
  if (max_fanout < min_fanout)
    throw InputError("max fanout must be at least min fanout");
  if (2 * min_fanout > max_fanout + 1)
    throw InputError("fanout bounds leave no valid split");
}

std::size_t BubbleTree::target_leaf_count() const {
  const std::size_t n = registry_.size();
  if (n == 0) return 0;
  // the epsilon keeps exact integer products from rounding upward
  double raw = std::ceil(rho_ * static_cast<double>(n) - 1e-9);
  auto target = static_cast<std::size_t>(raw);
  return std::clamp<std::size_t>(target, 1, n);
}

const std::vector<double>& BubbleTree::point_coords(PointId id) const {
  auto it = registry_.find(id);
  if (it == registry_.end()) throw NotFoundError("unknown point id");
  return it->second.coords;
}

const ClusteringFeature& BubbleTree::root_cf() const {
  if (!root_) throw StateError("summary tree is empty");
  return root_->cf;
}

std::unique_ptr<BubbleNode> BubbleTree::make_node(bool leaf) {
  auto node = std::make_unique<BubbleNode>();
  node->leaf = leaf;
  node->seq = next_seq_++;
  node->cf.ls.assign(dim_, 0.0);
  return node;
}

BubbleNode* BubbleTree::descend(std::span<const double> coords) {
  BubbleNode* cur = root_.get();
  while (!cur->leaf) {
    BubbleNode* best = nullptr;
    double best_d = 0.0;
    for (const auto& child : cur->children) {
      const double d = euclidean(coords, child->rep());
      if (best == nullptr || d < best_d ||
          (d == best_d && child->seq < best->seq)) {
        best = child.get();
        best_d = d;
      }
    }
    cur = best;
  }
  return cur;
}

void BubbleTree::add_on_path(BubbleNode* node, const ClusteringFeature& cf) {
  for (BubbleNode* cur = node; cur != nullptr; cur = cur->parent)
    cur->cf = cf_merge(cur->cf, cf);
}

void BubbleTree::subtract_on_path(BubbleNode* node,
                                  const ClusteringFeature& cf) {
  for (BubbleNode* cur = node; cur != nullptr; cur = cur->parent)
    cur->cf = cf_subtract(cur->cf, cf);
}

void BubbleTree::absorb_existing(PointId id) {
  PointRecord& rec = registry_.at(id);
  BubbleNode* leaf = descend(rec.coords);
  add_on_path(leaf, single_point_cf(rec.coords));
  leaf->members.push_back(id);
  rec.leaf = leaf;
}

void BubbleTree::insert(const Point& p) {
  if (p.coords.empty()) throw InputError("point has no coordinates");
  if (registry_.count(p.id) != 0)
    throw ConflictError("point id already stored");
  if (root_ && p.coords.size() != dim_)
    throw InputError("point dimension does not match the tree");

  if (!root_) {
    dim_ = p.coords.size();
    root_ = make_node(true);
    leaves_.push_back(root_.get());
  }
  registry_.emplace(p.id, PointRecord{p.coords, nullptr});
  absorb_existing(p.id);
  maintain_compression();
}

void BubbleTree::erase(PointId id) {
  auto it = registry_.find(id);
  if (it == registry_.end()) throw NotFoundError("unknown point id");
  BubbleNode* leaf = it->second.leaf;
  const ClusteringFeature cf_p = single_point_cf(it->second.coords);

  auto pos = std::find(leaf->members.begin(), leaf->members.end(), id);
  if (pos == leaf->members.end())
    throw std::logic_error("registry points at a leaf without the member");
  leaf->members.erase(pos);
  registry_.erase(it);

  if (leaf->members.empty()) {
    // the leaf goes away entirely; only the ancestors lose the point
    subtract_on_path(leaf->parent, cf_p);
    remove_empty_leaf(leaf);
  } else {
    subtract_on_path(leaf, cf_p);
  }
  if (!registry_.empty()) maintain_compression();
}

void BubbleTree::remove_empty_leaf(BubbleNode* leaf) {
  std::erase(leaves_, leaf);
  if (leaf == root_.get()) {
    root_.reset();
    dim_ = 0;
    return;
  }
  BubbleNode* parent = leaf->parent;
  auto owned = std::find_if(
      parent->children.begin(), parent->children.end(),
      [leaf](const std::unique_ptr<BubbleNode>& c) { return c.get() == leaf; });
  parent->children.erase(owned);
  repair_underflow(parent);
}

// Restores the fanout floor after a node lost a child: merge into a
// neighbor when the combined fanout fits, otherwise borrow the
// neighbor's child nearest this node's representative. Leaf count and
// leaf depth stay untouched either way, so maintenance keeps its
// one-step-toward-target accounting.
void BubbleTree::repair_underflow(BubbleNode* node) {
  while (node != root_.get() &&
         node->children.size() < static_cast<std::size_t>(min_fanout_)) {
    BubbleNode* parent = node->parent;
    std::size_t idx = 0;
    while (parent->children[idx].get() != node) ++idx;
    const std::size_t sib_idx = idx > 0 ? idx - 1 : idx + 1;
    BubbleNode* sibling = parent->children[sib_idx].get();

    if (node->children.size() + sibling->children.size() <=
        static_cast<std::size_t>(max_fanout_)) {
      for (auto& child : node->children) {
        child->parent = sibling;
        sibling->children.push_back(std::move(child));
      }
      sibling->cf = cf_merge(sibling->cf, node->cf);
      parent->children.erase(parent->children.begin() +
                             static_cast<std::ptrdiff_t>(idx));
      node = parent;
      continue;
    }

    const auto target_rep = node->rep();
    std::size_t pick = 0;
    double pick_d = 0.0;
    for (std::size_t i = 0; i < sibling->children.size(); ++i) {
      const double d = euclidean(target_rep, sibling->children[i]->rep());
      if (i == 0 || d < pick_d ||
          (d == pick_d &&
           sibling->children[i]->seq < sibling->children[pick]->seq)) {
        pick = i;
        pick_d = d;
      }
    }
    auto moved = std::move(sibling->children[pick]);
    sibling->children.erase(sibling->children.begin() +
                            static_cast<std::ptrdiff_t>(pick));
    sibling->cf = cf_subtract(sibling->cf, moved->cf);
    node->cf = cf_merge(node->cf, moved->cf);
    moved->parent = node;
    node->children.push_back(std::move(moved));
    break;
  }
  collapse_root();
}

void BubbleTree::collapse_root() {
  while (root_ && !root_->leaf && root_->children.size() == 1) {
    auto child = std::move(root_->children.front());
    child->parent = nullptr;
    root_ = std::move(child);
  }
}

ClusteringFeature BubbleTree::members_cf(
    const std::vector<PointId>& ids) const {
  ClusteringFeature out;
  out.ls.assign(dim_, 0.0);
  for (PointId id : ids)
    out = cf_merge(out, single_point_cf(registry_.at(id).coords));
  return out;
}

void BubbleTree::split_leaf(BubbleNode* leaf) {
  if (leaf->members.size() < 2)
    throw std::logic_error("cannot split a single-member leaf");
  std::vector<PointId> ids = leaf->members;
  std::sort(ids.begin(), ids.end());

  // farthest pair seeds the two sides; scan order breaks ties
  std::size_t seed_a = 0, seed_b = 1;
  double best = -1.0;
  for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
    const auto& ci = registry_.at(ids[i]).coords;
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const double d = euclidean(ci, registry_.at(ids[j]).coords);
      if (d > best) {
        best = d;
        seed_a = i;
        seed_b = j;
      }
    }
  }
  const auto& coords_a = registry_.at(ids[seed_a]).coords;
  const auto& coords_b = registry_.at(ids[seed_b]).coords;
  std::vector<PointId> side_a{ids[seed_a]};
  std::vector<PointId> side_b{ids[seed_b]};
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i == seed_a || i == seed_b) continue;
    const auto& c = registry_.at(ids[i]).coords;
    if (euclidean(c, coords_a) <= euclidean(c, coords_b))
      side_a.push_back(ids[i]);
    else
      side_b.push_back(ids[i]);
  }
  std::sort(side_a.begin(), side_a.end());
  std::sort(side_b.begin(), side_b.end());

  auto sibling = make_node(true);
  sibling->members = side_b;
  sibling->cf = members_cf(side_b);
  for (PointId id : side_b) registry_.at(id).leaf = sibling.get();
  leaf->members = side_a;
  leaf->cf = members_cf(side_a);
  leaves_.push_back(sibling.get());

  if (leaf == root_.get()) {
    auto new_root = make_node(false);
    new_root->cf = cf_merge(leaf->cf, sibling->cf);
    sibling->parent = new_root.get();
    new_root->children.push_back(std::move(root_));
    new_root->children.push_back(std::move(sibling));
    new_root->children.front()->parent = new_root.get();
    root_ = std::move(new_root);
    return;
  }
  BubbleNode* parent = leaf->parent;
  sibling->parent = parent;
  auto at = std::find_if(
      parent->children.begin(), parent->children.end(),
      [leaf](const std::unique_ptr<BubbleNode>& c) { return c.get() == leaf; });
  parent->children.insert(at + 1, std::move(sibling));
  split_overflow_chain(parent);
}

BubbleNode* BubbleTree::split_internal(BubbleNode* node) {
  const std::size_t count = node->children.size();
  std::vector<std::vector<double>> reps(count);
  for (std::size_t i = 0; i < count; ++i) reps[i] = node->children[i]->rep();

  std::size_t seed_a = 0, seed_b = 1;
  double best = -1.0;
  for (std::size_t i = 0; i + 1 < count; ++i)
    for (std::size_t j = i + 1; j < count; ++j) {
      const double d = euclidean(reps[i], reps[j]);
      if (d > best) {
        best = d;
        seed_a = i;
        seed_b = j;
      }
    }

  std::vector<bool> in_a(count, false);
  in_a[seed_a] = true;
  std::size_t size_a = 1;
  for (std::size_t i = 0; i < count; ++i) {
    if (i == seed_a || i == seed_b) continue;
    if (euclidean(reps[i], reps[seed_a]) <= euclidean(reps[i], reps[seed_b])) {
      in_a[i] = true;
      ++size_a;
    }
  }
  // rebalance so both sides respect the fanout floor
  const auto floor_sz = static_cast<std::size_t>(min_fanout_);
  auto move_one = [&](bool to_a) {
    const auto& anchor = reps[to_a ? seed_a : seed_b];
    std::size_t pick = count;
    double pick_d = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      if (in_a[i] == to_a || i == seed_a || i == seed_b) continue;
      const double d = euclidean(reps[i], anchor);
      if (pick == count || d < pick_d ||
          (d == pick_d && node->children[i]->seq < node->children[pick]->seq)) {
        pick = i;
        pick_d = d;
      }
    }
    if (pick == count)
      throw std::logic_error("no movable child during split rebalance");
    in_a[pick] = to_a;
    size_a += to_a ? 1 : -1;
  };
  while (size_a < floor_sz) move_one(true);
  while (count - size_a < floor_sz) move_one(false);

  auto sibling = make_node(false);
  std::vector<std::unique_ptr<BubbleNode>> keep;
  for (std::size_t i = 0; i < count; ++i) {
    if (in_a[i]) {
      keep.push_back(std::move(node->children[i]));
    } else {
      node->children[i]->parent = sibling.get();
      sibling->children.push_back(std::move(node->children[i]));
    }
  }
  node->children = std::move(keep);

  auto sum_children = [this](const BubbleNode* n) {
    ClusteringFeature cf;
    cf.ls.assign(dim_, 0.0);
    for (const auto& c : n->children) cf = cf_merge(cf, c->cf);
    return cf;
  };
  node->cf = sum_children(node);
  sibling->cf = sum_children(sibling.get());

  if (node == root_.get()) {
    auto new_root = make_node(false);
    new_root->cf = cf_merge(node->cf, sibling->cf);
    sibling->parent = new_root.get();
    new_root->children.push_back(std::move(root_));
    new_root->children.push_back(std::move(sibling));
    new_root->children.front()->parent = new_root.get();
    root_ = std::move(new_root);
    return root_.get();
  }
  BubbleNode* parent = node->parent;
  sibling->parent = parent;
  auto at = std::find_if(
      parent->children.begin(), parent->children.end(),
      [node](const std::unique_ptr<BubbleNode>& c) { return c.get() == node; });
  parent->children.insert(at + 1, std::move(sibling));
  return parent;
}

void BubbleTree::split_overflow_chain(BubbleNode* node) {
  while (node != nullptr &&
         node->children.size() > static_cast<std::size_t>(max_fanout_))
    node = split_internal(node);
}

MaintenanceAction BubbleTree::maintain_compression() {
  if (!root_) throw StateError("maintenance on an empty tree");
  const std::size_t target = target_leaf_count();
  const std::size_t have = leaves_.size();

  auto pick_leaf = [&](bool smallest) {
    BubbleNode* best = nullptr;
    for (BubbleNode* leaf : leaves_) {
      if (best == nullptr) {
        best = leaf;
        continue;
      }
      const bool wins = smallest
                            ? std::tuple(leaf->cf.n, leaf->seq) <
                                  std::tuple(best->cf.n, best->seq)
                            : std::tuple(-leaf->cf.n, leaf->seq) <
                                  std::tuple(-best->cf.n, best->seq);
      if (wins) best = leaf;
    }
    return best;
  };

  if (have > target) {
    // dissolve the lightest leaf and re-home its points
    BubbleNode* victim = pick_leaf(true);
    if (victim == root_.get())
      throw std::logic_error("sole leaf cannot exceed the target count");
    std::vector<PointId> ids = victim->members;
    std::sort(ids.begin(), ids.end());
    for (PointId id : ids) registry_.at(id).leaf = nullptr;
    victim->members.clear();
    subtract_on_path(victim->parent, victim->cf);
    remove_empty_leaf(victim);
    for (PointId id : ids) absorb_existing(id);
    return MaintenanceAction::kRemovedLeaf;
  }
  if (have < target) {
    split_leaf(pick_leaf(false));
    return MaintenanceAction::kSplitLeaf;
  }

  // on-target: pull the farthest members out of the heaviest leaf so
  // drifting points can migrate to better-fitting summaries
  BubbleNode* heavy = pick_leaf(false);
  const std::int64_t k =
      std::min<std::int64_t>(min_fanout_, heavy->cf.n - 1);
  if (k > 0) {
    const auto rep = heavy->rep();
    std::vector<std::pair<double, PointId>> ranked;
    ranked.reserve(heavy->members.size());
    for (PointId id : heavy->members)
      ranked.emplace_back(euclidean(registry_.at(id).coords, rep), id);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return std::tuple(-a.first, a.second) < std::tuple(-b.first, b.second);
    });
    std::vector<PointId> moved;
    for (std::int64_t i = 0; i < k; ++i) moved.push_back(ranked[i].second);
    std::sort(moved.begin(), moved.end());

    subtract_on_path(heavy, members_cf(moved));
    for (PointId id : moved) {
      auto pos = std::find(heavy->members.begin(), heavy->members.end(), id);
      heavy->members.erase(pos);
      registry_.at(id).leaf = nullptr;
    }
    for (PointId id : moved) absorb_existing(id);
  }
  return MaintenanceAction::kReorganized;
}

std::vector<LeafSummary> BubbleTree::leaf_cfs() const {
  std::vector<LeafSummary> out;
  out.reserve(leaves_.size());
  for (const BubbleNode* leaf : leaves_) {
    LeafSummary summary{leaf->cf, leaf->members};
    std::sort(summary.members.begin(), summary.members.end());
    out.push_back(std::move(summary));
  }
  return out;
}

namespace {

void check_close(const ClusteringFeature& got, const ClusteringFeature& want) {
  if (got.n != want.n)
    throw std::logic_error("summary count disagrees with its children");
  if (got.ls.size() != want.ls.size())
    throw std::logic_error("summary dimension disagrees with its children");
  auto close = [](double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
  };
  for (std::size_t i = 0; i < got.ls.size(); ++i)
    if (!close(got.ls[i], want.ls[i]))
      throw std::logic_error("summary linear sum drifted from its children");
  if (!close(got.ss, want.ss))
    throw std::logic_error("summary squared sum drifted from its children");
}

}  // namespace

void BubbleTree::audit_node(const BubbleNode* node, std::size_t depth,
                            std::size_t& leaf_depth, std::size_t& leaves_seen,
                            std::size_t& members_seen) const {
  if (node->leaf) {
    if (node->members.empty())
      throw std::logic_error("empty leaf left in the tree");
    if (!node->children.empty())
      throw std::logic_error("leaf node owns children");
    if (leaf_depth == static_cast<std::size_t>(-1)) leaf_depth = depth;
    if (depth != leaf_depth)
      throw std::logic_error("leaves sit at different depths");
    ++leaves_seen;
    members_seen += node->members.size();
    if (std::find(leaves_.begin(), leaves_.end(), node) == leaves_.end())
      throw std::logic_error("leaf missing from the leaf listing");
    ClusteringFeature want;
    want.ls.assign(dim_, 0.0);
    std::vector<PointId> ids = node->members;
    std::sort(ids.begin(), ids.end());
    for (PointId id : ids) {
      auto it = registry_.find(id);
      if (it == registry_.end())
        throw std::logic_error("leaf member missing from the registry");
      if (it->second.leaf != node)
        throw std::logic_error("registry points a member at the wrong leaf");
      want = cf_merge(want, single_point_cf(it->second.coords));
    }
    check_close(node->cf, want);
    return;
  }

  const std::size_t floor_sz =
      node == root_.get() ? 2 : static_cast<std::size_t>(min_fanout_);
  if (node->children.size() < floor_sz ||
      node->children.size() > static_cast<std::size_t>(max_fanout_))
    throw std::logic_error("internal fanout out of bounds");
  ClusteringFeature want;
  want.ls.assign(dim_, 0.0);
  for (const auto& child : node->children) {
    if (child->parent != node)
      throw std::logic_error("child has a stale parent pointer");
    audit_node(child.get(), depth + 1, leaf_depth, leaves_seen, members_seen);
    want = cf_merge(want, child->cf);
  }
  check_close(node->cf, want);
}

void BubbleTree::audit() const {
  if (!root_) {
    if (!leaves_.empty() || !registry_.empty() || dim_ != 0)
      throw std::logic_error("empty tree left stale bookkeeping");
    return;
  }
  if (root_->parent != nullptr)
    throw std::logic_error("root has a parent pointer");
  std::size_t leaf_depth = static_cast<std::size_t>(-1);
  std::size_t leaves_seen = 0;
  std::size_t members_seen = 0;
  audit_node(root_.get(), 0, leaf_depth, leaves_seen, members_seen);
  if (leaves_seen != leaves_.size())
    throw std::logic_error("leaf listing disagrees with the tree");
  if (members_seen != registry_.size())
    throw std::logic_error("member total disagrees with the registry");
  if (root_->cf.n != static_cast<std::int64_t>(registry_.size()))
    throw std::logic_error("root count disagrees with the registry");
  const std::size_t target = target_leaf_count();
  const std::size_t have = leaves_.size();
  const std::size_t gap = have > target ? have - target : target - have;
  if (gap > 1)
    throw std::logic_error("leaf count strayed from the target");
}

}  // namespace dynhc
