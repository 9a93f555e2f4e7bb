#include "dynhc/bubble_tree.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "dynhc/errors.hpp"

using namespace dynhc;

namespace {

// recomputes the surviving points' summary straight from the source
ClusteringFeature direct_sum(const BubbleTree& tree,
                             const std::vector<Point>& alive) {
  ClusteringFeature total;
  total.ls.assign(tree.dim(), 0.0);
  for (const Point& p : alive) total = cf_merge(total, single_point_cf(p.coords));
  return total;
}

void check_conserved(const BubbleTree& tree, const std::vector<Point>& alive) {
  const ClusteringFeature want = direct_sum(tree, alive);
  const ClusteringFeature& got = tree.root_cf();
  REQUIRE(got.n == want.n);
  auto close = [](double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
  };
  for (std::size_t i = 0; i < want.ls.size(); ++i)
    CHECK(close(got.ls[i], want.ls[i]));
  CHECK(close(got.ss, want.ss));

  std::int64_t member_total = 0;
  for (const LeafSummary& leaf : tree.leaf_cfs()) member_total += leaf.cf.n;
  CHECK(member_total == static_cast<std::int64_t>(alive.size()));
}

}  // namespace

TEST_CASE("population share classification") {
  const std::vector<std::int64_t> skewed{100, 100, 100, 700};
  const QualityReport report = classify_quality(skewed, 1000, 1.0);
  CHECK(report.mean == 0.25);
  CHECK(std::abs(report.stddev - 0.2598076211353316) < 1e-12);
  CHECK(report.labels == std::vector<QualityLabel>{
                             QualityLabel::kGood, QualityLabel::kGood,
                             QualityLabel::kGood, QualityLabel::kOver});

  const std::vector<std::int64_t> flat{5, 5, 5, 5};
  const QualityReport even = classify_quality(flat, 20, 0.5);
  CHECK(even.stddev == 0.0);
  for (QualityLabel label : even.labels) CHECK(label == QualityLabel::kGood);

  const std::vector<std::int64_t> extreme{1, 999};
  const QualityReport split = classify_quality(extreme, 1000, 1.0);
  CHECK(split.labels ==
        std::vector<QualityLabel>{QualityLabel::kUnder, QualityLabel::kOver});
}

TEST_CASE("classification input checks") {
  CHECK_THROWS_AS(classify_quality({}, 0, 1.0), InputError);
  const std::vector<std::int64_t> w{1, 2};
  CHECK_THROWS_AS(classify_quality(w, 4, 1.0), InputError);
  CHECK_THROWS_AS(classify_quality(w, 3, 0.0), InputError);
  const std::vector<std::int64_t> zero{0, 3};
  CHECK_THROWS_AS(classify_quality(zero, 3, 1.0), InputError);
}

TEST_CASE("construction guards") {
  CHECK_THROWS_AS(BubbleTree(0.0), InputError);
  CHECK_THROWS_AS(BubbleTree(1.5), InputError);
  CHECK_THROWS_AS(BubbleTree(0.5, 1, 8), InputError);
  CHECK_THROWS_AS(BubbleTree(0.5, 4, 3), InputError);
  CHECK_THROWS_AS(BubbleTree(0.5, 5, 8), InputError);
}

TEST_CASE("first insert makes a single-leaf tree") {
  BubbleTree tree(0.5);
  CHECK(tree.empty());
  tree.insert(Point{7, {1.0, 2.0}});
  CHECK(tree.size() == 1);
  CHECK(tree.leaf_count() == 1);
  CHECK(tree.target_leaf_count() == 1);
  CHECK(tree.root_cf() == single_point_cf(std::vector<double>{1.0, 2.0}));

  const auto leaves = tree.leaf_cfs();
  REQUIRE(leaves.size() == 1);
  CHECK(leaves[0].members == std::vector<PointId>{7});
  tree.audit();
}

TEST_CASE("error contracts") {
  BubbleTree tree(0.5);
  CHECK_THROWS_AS(tree.maintain_compression(), StateError);
  CHECK_THROWS_AS(tree.root_cf(), StateError);
  CHECK_THROWS_AS(tree.erase(1), NotFoundError);
  CHECK_THROWS_AS(tree.point_coords(1), NotFoundError);
  CHECK_THROWS_AS(tree.insert(Point{1, {}}), InputError);

  tree.insert(Point{1, {0.0, 0.0}});
  CHECK_THROWS_AS(tree.insert(Point{1, {5.0, 5.0}}), ConflictError);
  CHECK_THROWS_AS(tree.insert(Point{2, {5.0}}), InputError);
}

TEST_CASE("insert then erase round-trips to empty") {
  BubbleTree tree(1.0);
  tree.insert(Point{3, {2.0, 2.0}});
  tree.erase(3);
  CHECK(tree.empty());
  CHECK(tree.leaf_count() == 0);
  CHECK(tree.leaf_cfs().empty());
  tree.audit();

  // the tree is reusable afterwards, even at a new dimensionality
  tree.insert(Point{4, {1.0, 2.0, 3.0}});
  CHECK(tree.size() == 1);
  tree.audit();
}

TEST_CASE("full compression keeps every point in its own leaf") {
  BubbleTree tree(1.0);
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> coord(0.0, 10.0);
  for (PointId i = 0; i < 40; ++i) {
    tree.insert(Point{i, {coord(rng), coord(rng)}});
    tree.audit();
    CHECK(tree.leaf_count() == static_cast<std::size_t>(i) + 1);
  }
  for (const LeafSummary& leaf : tree.leaf_cfs()) CHECK(leaf.cf.n == 1);

  // duplicates of an existing location still split out cleanly
  tree.insert(Point{100, {5.0, 5.0}});
  tree.insert(Point{101, {5.0, 5.0}});
  tree.audit();
  CHECK(tree.leaf_count() == 42);
  for (const LeafSummary& leaf : tree.leaf_cfs()) CHECK(leaf.cf.n == 1);
}

TEST_CASE("maintenance walks the leaf count toward the target") {
  BubbleTree tree(0.34);
  tree.insert(Point{0, {0.0}});
  tree.insert(Point{1, {10.0}});
  tree.insert(Point{2, {20.0}});
  CHECK(tree.target_leaf_count() == 2);
  CHECK(tree.leaf_count() == 2);

  // shrinking the set drops the target; the update's own maintenance
  // dissolves a leaf to follow it
  tree.erase(2);
  CHECK(tree.target_leaf_count() == 1);
  CHECK(tree.leaf_count() == 1);
  tree.audit();

  // on-target calls reshuffle without changing the leaf count
  const ClusteringFeature before = tree.root_cf();
  CHECK(tree.maintain_compression() == MaintenanceAction::kReorganized);
  CHECK(tree.leaf_count() == 1);
  CHECK(tree.root_cf().n == before.n);
  tree.audit();
}

TEST_CASE("maintenance converges one step at a time") {
  BubbleTree tree(0.25, 2, 4);
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> coord(0.0, 50.0);
  std::vector<Point> alive;
  for (PointId i = 0; i < 80; ++i) {
    alive.push_back(Point{i, {coord(rng), coord(rng)}});
    tree.insert(alive.back());
  }
  for (PointId i = 0; i < 40; ++i) {
    tree.erase(i);
    alive.erase(alive.begin());
  }
  tree.audit();

  std::size_t gap = std::max(tree.leaf_count(), tree.target_leaf_count()) -
                    std::min(tree.leaf_count(), tree.target_leaf_count());
  std::size_t calls = 0;
  while (tree.leaf_count() != tree.target_leaf_count()) {
    const std::size_t before = tree.leaf_count();
    const MaintenanceAction action = tree.maintain_compression();
    ++calls;
    if (action == MaintenanceAction::kRemovedLeaf)
      CHECK(tree.leaf_count() == before - 1);
    else if (action == MaintenanceAction::kSplitLeaf)
      CHECK(tree.leaf_count() == before + 1);
    tree.audit();
    REQUIRE(calls <= gap + 1);
  }
  check_conserved(tree, alive);
}

TEST_CASE("interleaved updates conserve the summary exactly") {
  BubbleTree tree(0.2, 3, 6);
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> coord(-20.0, 20.0);
  std::vector<Point> alive;
  PointId next = 0;

  for (int op = 0; op < 150; ++op) {
    const bool grow = alive.size() < 8 || rng() % 3 != 0;
    if (grow) {
      Point p{next++, {coord(rng), coord(rng), coord(rng)}};
      alive.push_back(p);
      tree.insert(p);
    } else {
      const std::size_t at =
          std::uniform_int_distribution<std::size_t>(0, alive.size() - 1)(rng);
      tree.erase(alive[at].id);
      alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(at));
    }
    tree.audit();
    check_conserved(tree, alive);

    const std::size_t target = tree.target_leaf_count();
    const std::size_t have = tree.leaf_count();
    CHECK(std::max(target, have) - std::min(target, have) <= 1);
  }
}

TEST_CASE("insertion order changes membership, not shape") {
  std::mt19937 rng(31);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Point> pts;
  for (PointId i = 0; i < 60; ++i) {
    const double cx = (i % 3) * 25.0;
    pts.push_back(Point{i, {cx + noise(rng), noise(rng)}});
  }

  auto build = [&](const std::vector<Point>& order) {
    BubbleTree tree(0.25);
    for (const Point& p : order) tree.insert(p);
    tree.audit();
    return tree.leaf_cfs();
  };

  std::vector<Point> shuffled = pts;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937(7));
  const auto a = build(pts);
  const auto b = build(shuffled);

  CHECK(a.size() == 15);
  CHECK(b.size() == 15);
  for (const auto& leaves : {a, b}) {
    std::int64_t smallest = leaves.front().cf.n;
    std::int64_t largest = leaves.front().cf.n;
    for (const LeafSummary& leaf : leaves) {
      smallest = std::min(smallest, leaf.cf.n);
      largest = std::max(largest, leaf.cf.n);
    }
    CHECK(largest <= smallest * 16);
  }
}
