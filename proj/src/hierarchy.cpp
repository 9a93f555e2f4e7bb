#include "dynhc/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>
#include <utility>

#include "dynhc/errors.hpp"

namespace dynhc {

std::int64_t Dendrogram::total_weight() const {
  std::int64_t total = 0;
  for (std::int64_t w : leaf_weights) total += w;
  return total;
}

Dendrogram build_dendrogram(std::span<const ReachEdge> edges,
                            std::vector<std::int64_t> leaf_weights) {
  const auto n = static_cast<std::int64_t>(leaf_weights.size());
  if (n < 1) throw InputError("dendrogram needs at least one leaf");
  for (std::int64_t w : leaf_weights)
    if (w < 1) throw InputError("leaf weights must be positive");
  if (static_cast<std::int64_t>(edges.size()) != n - 1)
    throw InputError("edge count does not span the leaf set");

  std::vector<ReachEdge> sorted(edges.begin(), edges.end());
  for (const ReachEdge& e : sorted) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n || e.u == e.v)
      throw InputError("edge endpoint outside the leaf set");
    if (e.weight < 0.0) throw InputError("negative merge weight");
  }
  std::sort(sorted.begin(), sorted.end(), edge_less);

  // plain union-find; `cluster` tracks each root's current cluster index
  std::vector<std::int64_t> parent(static_cast<std::size_t>(n));
  std::vector<std::int64_t> cluster(static_cast<std::size_t>(n));
  std::vector<std::int64_t> weight_of(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    parent[static_cast<std::size_t>(i)] = i;
    cluster[static_cast<std::size_t>(i)] = i;
    weight_of[static_cast<std::size_t>(i)] =
        leaf_weights[static_cast<std::size_t>(i)];
  }
  auto find = [&](std::int64_t x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };

  Dendrogram out;
  out.leaf_weights = std::move(leaf_weights);
  out.merges.reserve(sorted.size());
  for (const ReachEdge& e : sorted) {
    const std::int64_t ru = find(e.u);
    const std::int64_t rv = find(e.v);
    if (ru == rv) throw InputError("edges contain a cycle");
    MergeRecord rec;
    rec.left = std::min(cluster[static_cast<std::size_t>(ru)],
                        cluster[static_cast<std::size_t>(rv)]);
    rec.right = std::max(cluster[static_cast<std::size_t>(ru)],
                         cluster[static_cast<std::size_t>(rv)]);
    rec.weight = e.weight;
    rec.size = weight_of[static_cast<std::size_t>(ru)] +
               weight_of[static_cast<std::size_t>(rv)];
    parent[static_cast<std::size_t>(ru)] = rv;
    cluster[static_cast<std::size_t>(rv)] =
        n + static_cast<std::int64_t>(out.merges.size());
    weight_of[static_cast<std::size_t>(rv)] = rec.size;
    out.merges.push_back(rec);
  }
  return out;
}

FlatClustering extract_flat(const Dendrogram& dendro,
                            std::int64_t min_cluster_weight,
                            std::span<const double> leaf_density_caps) {
  const std::int64_t n = dendro.leaf_count();
  if (n < 1) throw InputError("dendrogram has no leaves");
  if (min_cluster_weight < 1)
    throw InputError("minimum cluster weight must be at least 1");
  if (static_cast<std::int64_t>(dendro.merges.size()) != n - 1)
    throw InputError("dendrogram is not a full merge history");
  if (!leaf_density_caps.empty() &&
      static_cast<std::int64_t>(leaf_density_caps.size()) != n)
    throw InputError("one density cap per leaf expected");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto node_size = [&](std::int64_t idx) {
    return idx < n ? dendro.leaf_weights[static_cast<std::size_t>(idx)]
                   : dendro.merges[static_cast<std::size_t>(idx - n)].size;
  };
  // densities can be unbounded on duplicate data; a difference of two
  // unbounded values contributes nothing rather than poisoning sums
  auto gain = [](double leave, double birth) {
    if (std::isinf(leave) && std::isinf(birth)) return 0.0;
    return leave - birth;
  };

  // smallest leaf index under each node, for canonical child ordering
  std::vector<std::int64_t> min_leaf(static_cast<std::size_t>(2 * n - 1));
  for (std::int64_t i = 0; i < n; ++i) min_leaf[static_cast<std::size_t>(i)] = i;
  for (std::size_t t = 0; t < dendro.merges.size(); ++t)
    min_leaf[static_cast<std::size_t>(n) + t] =
        std::min(min_leaf[static_cast<std::size_t>(dendro.merges[t].left)],
                 min_leaf[static_cast<std::size_t>(dendro.merges[t].right)]);

  struct Condensed {
    std::int64_t parent;
    double birth;
    double stability = 0.0;
    std::vector<std::int64_t> children;
  };
  std::vector<Condensed> conds;
  conds.push_back({-1, 0.0, 0.0, {}});

  std::vector<std::int64_t> depart_cond(static_cast<std::size_t>(n), 0);
  std::vector<double> depart_lambda(static_cast<std::size_t>(n), 0.0);

  // falls are accumulated in ascending leaf order so stability sums do
  // not depend on the binary shape the tied merges happened to take
  std::vector<std::int64_t> leaf_stack;
  std::vector<std::int64_t> fallen;
  auto drop_leaves = [&](std::int64_t node, std::int64_t c, double lam) {
    leaf_stack.assign(1, node);
    fallen.clear();
    while (!leaf_stack.empty()) {
      const std::int64_t cur = leaf_stack.back();
      leaf_stack.pop_back();
      if (cur < n) {
        fallen.push_back(cur);
        continue;
      }
      const MergeRecord& m = dendro.merges[static_cast<std::size_t>(cur - n)];
      leaf_stack.push_back(m.left);
      leaf_stack.push_back(m.right);
    }
    std::sort(fallen.begin(), fallen.end());
    for (std::int64_t leaf : fallen) {
      conds[static_cast<std::size_t>(c)].stability +=
          static_cast<double>(node_size(leaf)) *
          gain(lam, conds[static_cast<std::size_t>(c)].birth);
      depart_cond[static_cast<std::size_t>(leaf)] = c;
      depart_lambda[static_cast<std::size_t>(leaf)] = lam;
    }
  };

  std::vector<std::pair<std::int64_t, std::int64_t>> walk;
  std::vector<std::int64_t> region;
  std::vector<std::int64_t> parts;
  std::vector<std::pair<std::int64_t, std::int64_t>> spawned;
  walk.emplace_back(n == 1 ? 0 : 2 * n - 2, std::int64_t{0});
  while (!walk.empty()) {
    const auto [node, c] = walk.back();
    walk.pop_back();
    if (node < n) {
      // the cluster has narrowed to one leaf; its mass departs at the
      // leaf's own density cap
      const double cap = leaf_density_caps.empty()
                             ? kInf
                             : leaf_density_caps[static_cast<std::size_t>(node)];
      const double leave =
          std::max(cap, conds[static_cast<std::size_t>(c)].birth);
      drop_leaves(node, c, leave);
      continue;
    }

    // merges tied at one weight happen simultaneously: flatten the run
    // into a single multiway event whose parts are the subtrees formed
    // strictly below it, a set no choice among equal-weight tree edges
    // can change
    const double top_weight =
        dendro.merges[static_cast<std::size_t>(node - n)].weight;
    const double lam = top_weight > 0.0 ? 1.0 / top_weight : kInf;
    region.assign(1, node);
    parts.clear();
    while (!region.empty()) {
      const std::int64_t cur = region.back();
      region.pop_back();
      if (cur >= n &&
          dendro.merges[static_cast<std::size_t>(cur - n)].weight == top_weight) {
        region.push_back(dendro.merges[static_cast<std::size_t>(cur - n)].left);
        region.push_back(dendro.merges[static_cast<std::size_t>(cur - n)].right);
        continue;
      }
      parts.push_back(cur);
    }
    std::sort(parts.begin(), parts.end(),
              [&](std::int64_t a, std::int64_t b) {
                return min_leaf[static_cast<std::size_t>(a)] <
                       min_leaf[static_cast<std::size_t>(b)];
              });

    std::int64_t big_count = 0;
    for (std::int64_t part : parts)
      if (node_size(part) >= min_cluster_weight) ++big_count;

    if (top_weight <= 0.0) {
      // zero-distance merges join coincident mass, which no density
      // level can separate again; everything settles here
      for (std::int64_t part : parts) drop_leaves(part, c, lam);
    } else if (big_count >= 2) {
      // real split: the cluster dies, each qualifying part is born as
      // its own child and the rest fall out here
      spawned.clear();
      for (std::int64_t part : parts) {
        if (node_size(part) < min_cluster_weight) {
          drop_leaves(part, c, lam);
          continue;
        }
        conds[static_cast<std::size_t>(c)].stability +=
            static_cast<double>(node_size(part)) *
            gain(lam, conds[static_cast<std::size_t>(c)].birth);
        const auto child = static_cast<std::int64_t>(conds.size());
        conds.push_back({c, lam, 0.0, {}});
        conds[static_cast<std::size_t>(c)].children.push_back(child);
        spawned.emplace_back(part, child);
      }
      for (auto it = spawned.rbegin(); it != spawned.rend(); ++it)
        walk.push_back(*it);
    } else if (big_count == 1) {
      std::int64_t keep = -1;
      for (std::int64_t part : parts) {
        if (node_size(part) >= min_cluster_weight)
          keep = part;
        else
          drop_leaves(part, c, lam);
      }
      walk.emplace_back(keep, c);
    } else {
      for (std::int64_t part : parts) drop_leaves(part, c, lam);
    }
  }

  // excess-of-mass: a cluster beats its children when its own mass
  // integral is at least theirs combined; the root competes only when
  // it never split
  const auto total = static_cast<std::int64_t>(conds.size());
  std::vector<double> best(static_cast<std::size_t>(total), 0.0);
  std::vector<char> selected(static_cast<std::size_t>(total), 0);
  for (std::int64_t c = total - 1; c >= 0; --c) {
    const Condensed& cond = conds[static_cast<std::size_t>(c)];
    if (cond.children.empty()) {
      best[static_cast<std::size_t>(c)] = cond.stability;
      selected[static_cast<std::size_t>(c)] = c != 0;
      continue;
    }
    double child_sum = 0.0;
    for (std::int64_t child : cond.children)
      child_sum += best[static_cast<std::size_t>(child)];
    if (c != 0 && cond.stability >= child_sum) {
      best[static_cast<std::size_t>(c)] = cond.stability;
      selected[static_cast<std::size_t>(c)] = 1;
    } else {
      best[static_cast<std::size_t>(c)] = child_sum;
    }
  }
  if (conds[0].children.empty() && dendro.total_weight() >= min_cluster_weight)
    selected[0] = 1;

  // highest selected ancestor wins; descendants collapse into it
  std::vector<std::int64_t> resolve(static_cast<std::size_t>(total), -1);
  for (std::int64_t c = 0; c < total; ++c) {
    const std::int64_t up =
        c == 0 ? -1
               : resolve[static_cast<std::size_t>(
                     conds[static_cast<std::size_t>(c)].parent)];
    resolve[static_cast<std::size_t>(c)] =
        up != -1 ? up : (selected[static_cast<std::size_t>(c)] ? c : -1);
  }

  std::vector<std::int64_t> label_of(static_cast<std::size_t>(total), -1);
  std::int64_t next_label = 0;
  for (std::int64_t c = 0; c < total; ++c)
    if (resolve[static_cast<std::size_t>(c)] == c)
      label_of[static_cast<std::size_t>(c)] = next_label++;

  FlatClustering out;
  out.labels.assign(static_cast<std::size_t>(n), kNoiseLabel);
  out.cluster_weights.assign(static_cast<std::size_t>(next_label), 0);

  // a never-split root holds everything that ever existed, so member-
  // ship is gated at the maximal fall-out density
  double root_gate = -kInf;
  const bool root_sole = resolve[0] == 0;
  if (root_sole)
    for (double lam : depart_lambda) root_gate = std::max(root_gate, lam);

  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t home =
        resolve[static_cast<std::size_t>(depart_cond[static_cast<std::size_t>(i)])];
    if (home == -1) {
      out.noise_weight += dendro.leaf_weights[static_cast<std::size_t>(i)];
      continue;
    }
    if (root_sole && home == 0 &&
        depart_lambda[static_cast<std::size_t>(i)] < root_gate) {
      out.noise_weight += dendro.leaf_weights[static_cast<std::size_t>(i)];
      continue;
    }
    const std::int64_t label = label_of[static_cast<std::size_t>(home)];
    out.labels[static_cast<std::size_t>(i)] = label;
    out.cluster_weights[static_cast<std::size_t>(label)] +=
        dendro.leaf_weights[static_cast<std::size_t>(i)];
  }

  // drop labels that ended up empty under the root gate
  std::vector<std::int64_t> remap(out.cluster_weights.size(), kNoiseLabel);
  std::int64_t kept = 0;
  for (std::size_t l = 0; l < out.cluster_weights.size(); ++l)
    if (out.cluster_weights[l] > 0) remap[l] = kept++;
  if (kept != static_cast<std::int64_t>(out.cluster_weights.size())) {
    std::vector<std::int64_t> weights(static_cast<std::size_t>(kept), 0);
    for (std::size_t l = 0; l < out.cluster_weights.size(); ++l)
      if (remap[l] != kNoiseLabel)
        weights[static_cast<std::size_t>(remap[l])] = out.cluster_weights[l];
    for (auto& label : out.labels)
      if (label != kNoiseLabel) label = remap[static_cast<std::size_t>(label)];
    out.cluster_weights = std::move(weights);
  }
  return out;
}

double nmi(std::span<const std::int64_t> labels_a,
           std::span<const std::int64_t> labels_b) {
  if (labels_a.size() != labels_b.size())
    throw InputError("label vectors differ in length");
  if (labels_a.empty()) throw InputError("label vectors are empty");

  // identical partitions short-circuit to exactly one; the entropy
  // ratio lands a few ulps shy otherwise
  auto canonical = [](std::span<const std::int64_t> v) {
    std::vector<std::int64_t> out;
    out.reserve(v.size());
    std::unordered_map<std::int64_t, std::int64_t> seen;
    for (std::int64_t x : v) {
      const auto it =
          seen.emplace(x, static_cast<std::int64_t>(seen.size())).first;
      out.push_back(it->second);
    }
    return out;
  };
  if (canonical(labels_a) == canonical(labels_b)) return 1.0;

  const double total = static_cast<double>(labels_a.size());
  std::map<std::int64_t, std::int64_t> count_a, count_b;
  std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> joint;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    ++count_a[labels_a[i]];
    ++count_b[labels_b[i]];
    ++joint[{labels_a[i], labels_b[i]}];
  }
  auto entropy = [total](const std::map<std::int64_t, std::int64_t>& counts) {
    double h = 0.0;
    for (const auto& [label, count] : counts) {
      const double p = static_cast<double>(count) / total;
      h -= p * std::log(p);
    }
    return h;
  };
  double information = 0.0;
  for (const auto& [cell, count] : joint) {
    const double p = static_cast<double>(count) / total;
    information +=
        p * std::log(static_cast<double>(count) * total /
                     (static_cast<double>(count_a[cell.first]) *
                      static_cast<double>(count_b[cell.second])));
  }
  const double denom = 0.5 * (entropy(count_a) + entropy(count_b));
  if (denom <= 0.0) return 0.0;
  return std::clamp(information / denom, 0.0, 1.0);
}

}  // namespace dynhc
