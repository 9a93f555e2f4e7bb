#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dynhc/types.hpp"

namespace dynhc {

// One point per row, ids in 0-based row order. A non-numeric first row
// is treated as a header and skipped. Ragged or non-numeric rows fail
// with the 1-based file row in the message.
std::vector<Point> load_csv(const std::string& path);

struct GeneratedData {
  std::vector<Point> points;
  std::vector<std::int64_t> labels;
};

// Deterministic isotropic Gaussian mixture in the unit cube. Component
// means keep a minimum pairwise separation scaled by (1 - overlap_hint)
// and the per-component spread shrinks with it, so a small hint means
// nearly disjoint blobs. Points cycle through components round-robin.
GeneratedData gen_gaussian_mixture(std::int64_t n, int dim, int components,
                                   double overlap_hint, std::uint64_t seed);

enum class WindowMode { kExact, kBubble, kStatic };
std::string to_string(WindowMode mode);
WindowMode parse_window_mode(const std::string& name);

struct WindowConfig {
  std::int64_t window_size = 10000;  // W
  std::int64_t slide_delete = 1000;  // D, oldest-first
  std::int64_t slide_insert = 1000;  // I
  int min_pts = 10;
  std::int64_t min_cluster_weight = 0;  // 0 means min_pts
  WindowMode mode = WindowMode::kExact;
  double rho = 0.01;  // bubble mode only
  std::uint64_t seed = 0;
};

struct SlideReport {
  std::int64_t slide = 0;
  double t_online_ms = 0.0;   // structure updates for the slide's ops
  double t_offline_ms = 0.0;  // dendrogram + flat extraction
  double nmi = 1.0;           // vs the static baseline on the same residents
  std::int64_t n_resident = 0;
  std::string mode;
  std::uint64_t seed = 0;
  double rknn_mean = 0.0;  // mean reverse-neighborhood size (exact mode)
  std::int64_t boruvka_components = 0;  // reconnections summed (exact mode)
  std::int64_t cluster_count = 0;
};

struct StaticRun {
  std::vector<std::int64_t> labels;  // aligned with the input order
  std::int64_t cluster_count = 0;
};

// One-shot pipeline: exact core distances and MST via a bulk build,
// then the capped condensed-tree extraction.
StaticRun static_cluster(const std::vector<Point>& points, int min_pts,
                         std::int64_t min_cluster_weight = 0);

// Replays the stream through a window of W points: each slide evicts
// the D oldest residents, admits the next I, reclusters per the mode,
// and scores against a fresh static run on identical residents. Stops
// cleanly when the stream cannot fill another slide.
std::vector<SlideReport> run_sliding_window(const WindowConfig& cfg,
                                            const std::vector<Point>& stream);

// format is "jsonl" or "csv"; fields are stable across formats.
void emit_report(std::span<const SlideReport> reports, const std::string& path,
                 const std::string& format);
std::vector<SlideReport> load_report(const std::string& path,
                                     const std::string& format);

// One integer label per line.
void save_labels(std::span<const std::int64_t> labels,
                 const std::string& path);
std::vector<std::int64_t> load_labels(const std::string& path);

}  // namespace dynhc
