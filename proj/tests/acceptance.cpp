// End-to-end acceptance checks for the dynamic clustering stack. Each
// check prints exactly one PASS/FAIL line with the measured numbers it
// was judged on; the exit code is the number of failing checks.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "dynhc/bubble_offline.hpp"
#include "dynhc/bubble_tree.hpp"
#include "dynhc/clustering_feature.hpp"
#include "dynhc/dynamic_clusterer.hpp"
#include "dynhc/harness.hpp"
#include "dynhc/hierarchy.hpp"
#include "dynhc/metric.hpp"
#include "dynhc/types.hpp"

using namespace dynhc;

namespace {

int g_failures = 0;

void report(int num, const std::string& name, bool ok,
            const std::string& detail) {
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " check " << std::setw(2) << num
            << ": " << name << " (" << detail << ")" << std::endl;
  if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::vector<Point> uniform_points(std::int64_t n, int dim,
                                  std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    Point p{static_cast<PointId>(i), {}};
    for (int d = 0; d < dim; ++d) p.coords.push_back(unit(rng));
    out.push_back(std::move(p));
  }
  return out;
}

void settle(BubbleTree& tree) {
  if (tree.size() == 0) return;
  tree.maintain_compression();
  while (true) {
    const auto leaves = static_cast<std::int64_t>(tree.leaf_count());
    const auto target = static_cast<std::int64_t>(tree.target_leaf_count());
    if (std::abs(leaves - target) <= 1) break;
    tree.maintain_compression();
  }
}

// Summarize-then-cluster: compress the points at ratio rho, cluster the
// summaries, and fan the flat labels back out to every point.
struct BubbleRun {
  std::vector<std::int64_t> labels;
  Dendrogram dendrogram;
};

BubbleRun bubble_pipeline(const std::vector<Point>& points, double rho,
                          int min_pts) {
  BubbleTree tree(rho);
  for (const Point& p : points) {
    tree.insert(p);
    settle(tree);
  }
  std::vector<DataBubble> bubbles;
  for (const LeafSummary& leaf : tree.leaf_cfs())
    bubbles.push_back(
        derive_bubble(leaf.cf, static_cast<int>(tree.dim()), leaf.members));

  BubbleClustering offline = cluster_bubbles(bubbles, min_pts);
  const FlatClustering flat = extract_flat(
      offline.dendrogram, min_pts, density_caps(offline.core_distances));
  const auto home = assign_points(points, bubbles);

  BubbleRun run;
  run.labels.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    run.labels[i] =
        flat.labels[static_cast<std::size_t>(home.at(points[i].id))];
  run.dendrogram = std::move(offline.dendrogram);
  return run;
}

// ---- check 1: dynamic maintenance equals brute-force oracles ----
void check_dynamic_oracle() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int min_pts = 5;
  auto fresh = [&](PointId id) {
    Point p{id, {}};
    for (int d = 0; d < 3; ++d) p.coords.push_back(unit(rng));
    return p;
  };

  DynamicClusterer dc(min_pts);
  std::vector<PointId> resident;
  for (PointId i = 0; i < 150; ++i) {
    dc.insert_point(fresh(i));
    resident.push_back(i);
  }

  PointId next_id = 150;
  int mismatches = 0;
  for (int op = 0; op < 200; ++op) {
    const bool grow = resident.size() <= 60 ||
                      (resident.size() < 250 && (rng() & 1) == 0);
    if (grow) {
      dc.insert_point(fresh(next_id));
      resident.push_back(next_id++);
    } else {
      const std::size_t pick = rng() % resident.size();
      const PointId gone = resident[pick];
      resident[pick] = resident.back();
      resident.pop_back();
      dc.delete_point(gone);
    }

    const std::vector<Point> pts = dc.points();
    const auto oracle = brute_core_distances(pts, min_pts);
    const auto& live = dc.core_records();
    bool op_ok = live.size() == oracle.size();
    for (const auto& [id, want] : oracle) {
      const auto it = live.find(id);
      if (it == live.end() || it->second.point_id != want.point_id ||
          it->second.core_distance != want.core_distance ||
          it->second.neighbors != want.neighbors) {
        op_ok = false;
        break;
      }
    }
    const double maintained = total_weight(dc.mst_snapshot());
    const double truth = total_weight(brute_mst(pts, oracle));
    if (maintained != truth) op_ok = false;
    if (!op_ok) ++mismatches;
  }

  const double secs = seconds_since(start);
  report(1, "dynamic updates match brute-force oracles",
         mismatches == 0 && secs < 60.0,
         "200 ops, " + std::to_string(mismatches) + " mismatches, " +
             fmt(secs, 3) + " s of 60 s budget");
}

// ---- check 2: collinear fixture update weights ----
void check_collinear_updates() {
  const std::vector<double> coords{0.0, 1.0, 2.0, 10.0};

  DynamicClusterer grown(2);
  for (std::size_t i = 0; i < coords.size(); ++i)
    grown.insert_point(Point{static_cast<PointId>(i), {coords[i]}});
  grown.insert_point(Point{4, {1.5}});
  const double after_insert = total_weight(grown.mst_snapshot());

  DynamicClusterer shrunk(2);
  for (std::size_t i = 0; i < coords.size(); ++i)
    shrunk.insert_point(Point{static_cast<PointId>(i), {coords[i]}});
  shrunk.delete_point(3);
  const double after_delete = total_weight(shrunk.mst_snapshot());

  report(2, "collinear fixture update weights",
         after_insert == 12.0 && after_delete == 4.0,
         "insert -> " + fmt(after_insert, 17) + " want 12, delete -> " +
             fmt(after_delete, 17) + " want 4");
}

// ---- check 3: neighborhood queries equal linear scans ----
void check_neighbor_queries() {
  std::mt19937_64 rng(303);
  const std::vector<Point> points = uniform_points(300, 8, rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> queries;
  for (int q = 0; q < 50; ++q) {
    std::vector<double> coords;
    for (int d = 0; d < 8; ++d) coords.push_back(unit(rng));
    queries.push_back(std::move(coords));
  }

  int knn_bad = 0;
  int rknn_bad = 0;
  for (const int min_pts : {3, 5, 10}) {
    DynamicClusterer dc(min_pts);
    dc.insert_batch(points);
    for (const auto& q : queries) {
      if (dc.index().knn(q, min_pts) != brute_knn(points, q, min_pts))
        ++knn_bad;
      std::vector<PointId> expected;
      for (const Point& p : points)
        if (euclidean(q, p.coords) < dc.core_record(p.id).core_distance)
          expected.push_back(p.id);
      std::sort(expected.begin(), expected.end());
      if (dc.index().rknn(q) != expected) ++rknn_bad;
    }
  }
  report(3, "neighborhood queries equal linear scans",
         knn_bad == 0 && rknn_bad == 0,
         "150 query/min_pts pairs, knn mismatches " +
             std::to_string(knn_bad) + ", reverse mismatches " +
             std::to_string(rknn_bad));
}

// ---- check 4: deletion cost trend and reconnect share ----
void check_deletion_trend() {
  const auto data = gen_gaussian_mixture(20000, 10, 5, 0.1, 4);
  DynamicClusterer dc(10);
  dc.insert_batch(data.points);

  std::vector<PointId> order(data.points.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = static_cast<PointId>(i);
  std::mt19937_64 rng(11);
  std::shuffle(order.begin(), order.end(), rng);

  double cum_ms = 0.0;
  double core_ms = 0.0;
  double mst_ms = 0.0;
  std::size_t next = 0;
  std::vector<double> at_checkpoint;
  for (const std::int64_t checkpoint : {200, 400, 800}) {
    while (static_cast<std::int64_t>(next) < checkpoint) {
      const auto t0 = std::chrono::steady_clock::now();
      const UpdateStats stats = dc.delete_point(order[next]);
      cum_ms += std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
      core_ms += stats.t_core_ms;
      mst_ms += stats.t_mst_ms;
      ++next;
    }
    at_checkpoint.push_back(cum_ms);
  }

  // deleting 4% of the window must cost more than four times deleting
  // 1%: per-deletion price rises as the survivors thin out
  const double growth = at_checkpoint[2] / at_checkpoint[0];
  const double share = mst_ms / (core_ms + mst_ms);
  report(4, "deletion cost trend and reconnect share",
         growth > 4.0 && share > 0.5,
         "cumulative s at 1/2/4% deleted: " + fmt(at_checkpoint[0] / 1e3, 3) +
             " / " + fmt(at_checkpoint[1] / 1e3, 3) + " / " +
             fmt(at_checkpoint[2] / 1e3, 3) + ", growth x" + fmt(growth, 3) +
             " (want > 4), tree-repair share " + fmt(share, 3) +
             " (want > 0.5)");
}

// ---- check 5: summary tree conservation and compression ----
void check_tree_conservation() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double rho = 0.05;
  const int dim = 4;

  BubbleTree tree(rho);
  std::vector<PointId> ids;
  std::unordered_map<PointId, Point> live;
  PointId next_id = 0;
  for (int op = 0; op < 10000; ++op) {
    const bool grow = live.empty() || unit(rng) < 0.65;
    if (grow) {
      Point p{next_id++, {}};
      for (int d = 0; d < dim; ++d) p.coords.push_back(unit(rng));
      tree.insert(p);
      ids.push_back(p.id);
      live.emplace(p.id, std::move(p));
    } else {
      const std::size_t pick = rng() % ids.size();
      const PointId gone = ids[pick];
      ids[pick] = ids.back();
      ids.pop_back();
      live.erase(gone);
      tree.erase(gone);
    }
    settle(tree);
  }

  ClusteringFeature direct;
  direct.ls.assign(dim, 0.0);
  for (const PointId id : ids)
    direct = cf_merge(direct, single_point_cf(live.at(id).coords));

  const ClusteringFeature& root = tree.root_cf();
  bool ok = tree.size() == live.size() && root.n == direct.n;
  double worst_rel = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double rel = std::abs(root.ls[static_cast<std::size_t>(d)] -
                                direct.ls[static_cast<std::size_t>(d)]) /
                       std::max(1.0, std::abs(direct.ls[static_cast<std::size_t>(d)]));
    worst_rel = std::max(worst_rel, rel);
  }
  worst_rel = std::max(
      worst_rel, std::abs(root.ss - direct.ss) / std::max(1.0, direct.ss));
  ok = ok && worst_rel <= 1e-9;

  const auto target = static_cast<std::int64_t>(
      std::ceil(rho * static_cast<double>(live.size())));
  const auto leaves = static_cast<std::int64_t>(tree.leaf_count());
  ok = ok && std::abs(leaves - target) <= 1;

  report(5, "summary tree conservation and compression", ok,
         std::to_string(live.size()) + " residents after 10000 ops, count " +
             std::to_string(root.n) + " vs " + std::to_string(direct.n) +
             ", worst sum drift " + fmt(worst_rel, 3) + " (want <= 1e-9), " +
             std::to_string(leaves) + " leaves vs target " +
             std::to_string(target) + " +/-1");
}

// ---- check 6: full-resolution summaries reproduce the exact pipeline ----
void check_full_resolution() {
  std::mt19937_64 rng(606);
  const std::vector<Point> points = uniform_points(500, 3, rng);
  const int min_pts = 5;

  const auto oracle = brute_core_distances(points, min_pts);
  const std::vector<ReachEdge> mst = brute_mst(points, oracle);
  const Dendrogram exact_dendro =
      build_dendrogram(mst, std::vector<std::int64_t>(points.size(), 1));
  std::vector<double> caps(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double cd = oracle.at(points[i].id).core_distance;
    caps[i] = cd > 0.0 ? 1.0 / cd : std::numeric_limits<double>::infinity();
  }
  const FlatClustering exact_flat = extract_flat(exact_dendro, min_pts, caps);

  const BubbleRun via_summaries = bubble_pipeline(points, 1.0, min_pts);

  std::vector<double> exact_weights;
  for (const MergeRecord& m : exact_dendro.merges)
    exact_weights.push_back(m.weight);
  std::vector<double> summary_weights;
  for (const MergeRecord& m : via_summaries.dendrogram.merges)
    summary_weights.push_back(m.weight);
  std::sort(exact_weights.begin(), exact_weights.end());
  std::sort(summary_weights.begin(), summary_weights.end());

  const bool same_weights = exact_weights == summary_weights;
  const double agreement = nmi(via_summaries.labels, exact_flat.labels);
  report(6, "full-resolution summaries reproduce the exact pipeline",
         same_weights && agreement == 1.0,
         "500 points, merge multisets " +
             std::string(same_weights ? "equal" : "differ") +
             ", label agreement " + fmt(agreement, 17) + " (want 1)");
}

// ---- check 7: clustering quality under compression ----
void check_compression_quality() {
  const auto data = gen_gaussian_mixture(50000, 10, 10, 0.1, 9);
  const StaticRun base = static_cluster(data.points, 10);

  std::vector<double> scores;
  for (const double rho : {0.01, 0.05, 0.10}) {
    const BubbleRun run = bubble_pipeline(data.points, rho, 10);
    scores.push_back(nmi(run.labels, base.labels));
  }
  const bool ok = scores[2] >= 0.85 && scores[1] >= scores[0] - 0.05 &&
                  scores[2] >= scores[1] - 0.05;
  report(7, "clustering quality under compression", ok,
         "agreement at 1/5/10% compression: " + fmt(scores[0], 4) + " / " +
             fmt(scores[1], 4) + " / " + fmt(scores[2], 4) +
             " (want >= 0.85 at 10% and no drop beyond 0.05)");
}

// ---- check 8: sliding-window speed ordering ----
void check_window_speed() {
  const auto stream = gen_gaussian_mixture(20000, 10, 10, 0.1, 808).points;
  WindowConfig cfg;
  cfg.window_size = 10000;
  cfg.slide_delete = 1000;
  cfg.slide_insert = 1000;
  cfg.min_pts = 10;
  cfg.seed = 808;

  cfg.mode = WindowMode::kBubble;
  cfg.rho = 0.01;
  const auto summarized = run_sliding_window(cfg, stream);

  cfg.mode = WindowMode::kStatic;
  const auto recomputed = run_sliding_window(cfg, stream);

  auto mean_ms = [](const std::vector<SlideReport>& reports) {
    double total = 0.0;
    for (const SlideReport& r : reports)
      total += r.t_online_ms + r.t_offline_ms;
    return total / static_cast<double>(reports.size());
  };
  const double summarized_ms = mean_ms(summarized);
  const double recomputed_ms = mean_ms(recomputed);
  report(8, "sliding-window speed ordering",
         summarized.size() >= 10 && recomputed.size() >= 10 &&
             summarized_ms < recomputed_ms,
         std::to_string(summarized.size()) +
             " slides, mean per-slide ms summarized " + fmt(summarized_ms, 4) +
             " vs recomputed " + fmt(recomputed_ms, 4));
}

// ---- check 9: share classifier hand values ----
void check_share_classifier() {
  const std::vector<std::int64_t> weights{100, 100, 100, 700};
  const QualityReport q = classify_quality(weights, 1000, 1.0);
  const std::vector<QualityLabel> want{QualityLabel::kGood, QualityLabel::kGood,
                                       QualityLabel::kGood, QualityLabel::kOver};
  const bool ok = q.labels == want && q.mean == 0.25 &&
                  std::abs(q.stddev - 0.259808) <= 1e-6;
  report(9, "share classifier hand values", ok,
         "labels " + std::string(q.labels == want ? "good,good,good,over"
                                                  : "unexpected") +
             ", mean " + fmt(q.mean, 17) + " want 0.25, spread " +
             fmt(q.stddev, 9) + " want 0.259808 +/-1e-6");
}

// ---- check 10: determinism of reports ----
void check_determinism() {
  const auto stream = gen_gaussian_mixture(1600, 4, 3, 0.1, 77).points;
  WindowConfig cfg;
  cfg.window_size = 1000;
  cfg.slide_delete = 100;
  cfg.slide_insert = 100;
  cfg.min_pts = 5;
  cfg.seed = 77;

  bool ok = true;
  std::string note;
  for (const WindowMode mode : {WindowMode::kExact, WindowMode::kBubble}) {
    cfg.mode = mode;
    cfg.rho = 0.05;
    auto first = run_sliding_window(cfg, stream);
    auto second = run_sliding_window(cfg, stream);
    if (first.size() != second.size()) {
      ok = false;
      break;
    }
    for (std::size_t i = 0; i < first.size(); ++i) {
      // wall-clock fields are the only permitted difference
      first[i].t_online_ms = second[i].t_online_ms = 0.0;
      first[i].t_offline_ms = second[i].t_offline_ms = 0.0;
      if (first[i].slide != second[i].slide ||
          first[i].nmi != second[i].nmi ||
          first[i].n_resident != second[i].n_resident ||
          first[i].mode != second[i].mode ||
          first[i].seed != second[i].seed ||
          first[i].rknn_mean != second[i].rknn_mean ||
          first[i].boruvka_components != second[i].boruvka_components ||
          first[i].cluster_count != second[i].cluster_count)
        ok = false;
    }

    for (const std::string format : {"jsonl", "csv"}) {
      const auto dir = std::filesystem::temp_directory_path();
      const std::string path_a =
          (dir / ("dynhc_acc_a_" + to_string(mode) + "." + format)).string();
      const std::string path_b =
          (dir / ("dynhc_acc_b_" + to_string(mode) + "." + format)).string();
      emit_report(first, path_a, format);
      emit_report(second, path_b, format);
      std::ifstream fa(path_a, std::ios::binary);
      std::ifstream fb(path_b, std::ios::binary);
      const std::string bytes_a((std::istreambuf_iterator<char>(fa)),
                                std::istreambuf_iterator<char>());
      const std::string bytes_b((std::istreambuf_iterator<char>(fb)),
                                std::istreambuf_iterator<char>());
      if (bytes_a != bytes_b) ok = false;
      std::filesystem::remove(path_a);
      std::filesystem::remove(path_b);
    }
    note += to_string(mode) + " " + std::to_string(first.size()) + " slides; ";
  }
  report(10, "identical runs emit identical reports", ok,
         note + "compared field-wise and byte-wise modulo timing");
}

}  // namespace

int main() {
  check_dynamic_oracle();
  check_collinear_updates();
  check_neighbor_queries();
  check_deletion_trend();
  check_tree_conservation();
  check_full_resolution();
  check_compression_quality();
  check_window_speed();
  check_share_classifier();
  check_determinism();
  std::cout << (10 - g_failures) << " of 10 acceptance checks passed"
            << std::endl;
  return g_failures;
}
