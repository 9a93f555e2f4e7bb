#include "dynhc/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <unordered_map>
#include <utility>

#include "json.hpp"

#include "dynhc/bubble_offline.hpp"
#include "dynhc/bubble_tree.hpp"
#include "dynhc/dynamic_clusterer.hpp"
#include "dynhc/errors.hpp"
#include "dynhc/hierarchy.hpp"
#include "dynhc/metric.hpp"

namespace dynhc {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

bool parse_double(const std::string& cell, double& out) {
  const char* b = cell.data();
  const char* e = b + cell.size();
  if (b != e && *b == '+') ++b;
  if (b == e) return false;
  double v = 0.0;
  const auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || !std::isfinite(v)) return false;
  out = v;
  return true;
}

bool parse_int(const std::string& cell, std::int64_t& out) {
  const char* b = cell.data();
  const char* e = b + cell.size();
  if (b != e && *b == '+') ++b;
  if (b == e) return false;
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) return false;
  out = v;
  return true;
}

std::string fmt(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::logic_error("double formatting failed");
  return std::string(buf, p);
}

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

constexpr const char* kCsvHeader =
    "slide,t_online_ms,t_offline_ms,nmi,n_resident,mode,seed,rknn_mean,"
    "boruvka_components";

}  // namespace

std::vector<Point> load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::vector<Point> points;
  std::string line;
  std::size_t row = 0;
  std::size_t dim = 0;
  bool header_checked = false;
  PointId next_id = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_cells(line);

    if (!header_checked) {
      header_checked = true;
      double probe = 0.0;
      const bool numeric = std::all_of(
          cells.begin(), cells.end(),
          [&probe](const std::string& c) { return parse_double(c, probe); });
      if (!numeric) continue;  // header row
    }
    if (dim == 0) {
      dim = cells.size();
    } else if (cells.size() != dim) {
      throw InputError("row " + std::to_string(row) + ": expected " +
                       std::to_string(dim) + " values, got " +
                       std::to_string(cells.size()));
    }
    Point p{next_id++, {}};
    p.coords.reserve(dim);
    for (const std::string& cell : cells) {
      double v = 0.0;
      if (!parse_double(cell, v))
        throw InputError("row " + std::to_string(row) + ": cannot parse '" +
                         cell + "' as a number");
      p.coords.push_back(v);
    }
    points.push_back(std::move(p));
  }
  return points;
}

GeneratedData gen_gaussian_mixture(std::int64_t n, int dim, int components,
                                   double overlap_hint, std::uint64_t seed) {
  if (components < 1) throw InputError("components must be at least 1");
  if (n < components) throw InputError("need at least one point per component");
  if (dim < 1) throw InputError("dimension must be at least 1");
  if (!(overlap_hint >= 0.0) || overlap_hint > 1.0)
    throw InputError("overlap hint must lie in [0, 1]");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // rejection-sample means at the cube's natural packing scale, backing
  // off gradually when the draw gets unlucky
  double sep = (1.0 - overlap_hint) *
               std::pow(static_cast<double>(components),
                        -1.0 / static_cast<double>(dim));
  std::vector<std::vector<double>> means;
  int rejected = 0;
  while (static_cast<int>(means.size()) < components) {
    std::vector<double> cand(static_cast<std::size_t>(dim));
    for (double& c : cand) c = unit(rng);
    const bool clear = std::all_of(
        means.begin(), means.end(), [&](const std::vector<double>& m) {
          return euclidean(m, cand) >= sep;
        });
    if (clear) {
      means.push_back(std::move(cand));
      rejected = 0;
    } else if (++rejected > 64 * components) {
      sep *= 0.9;
      rejected = 0;
    }
  }

  const double spread = std::max(overlap_hint, 0.01) * sep / 4.0;
  std::normal_distribution<double> gauss(0.0, spread);
  GeneratedData out;
  out.points.reserve(static_cast<std::size_t>(n));
  out.labels.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(i % components);
    Point p{static_cast<PointId>(i), {}};
    p.coords.reserve(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) p.coords.push_back(means[c][d] + gauss(rng));
    out.points.push_back(std::move(p));
    out.labels.push_back(static_cast<std::int64_t>(c));
  }
  return out;
}

std::string to_string(WindowMode mode) {
  switch (mode) {
    case WindowMode::kExact: return "exact";
    case WindowMode::kBubble: return "bubble";
    case WindowMode::kStatic: return "static";
  }
  throw std::logic_error("unreachable window mode");
}

WindowMode parse_window_mode(const std::string& name) {
  if (name == "exact") return WindowMode::kExact;
  if (name == "bubble") return WindowMode::kBubble;
  if (name == "static") return WindowMode::kStatic;
  throw InputError("unknown mode '" + name + "' (use exact, bubble, static)");
}

StaticRun static_cluster(const std::vector<Point>& points, int min_pts,
                         std::int64_t min_cluster_weight) {
  const auto n = static_cast<std::int64_t>(points.size());
  if (n <= min_pts)
    throw InputError("static clustering needs more points than min_pts");

  DynamicClusterer clusterer(min_pts);
  clusterer.insert_batch(points);

  std::unordered_map<PointId, std::int64_t> pos;
  pos.reserve(points.size());
  for (std::int64_t i = 0; i < n; ++i) pos.emplace(points[static_cast<std::size_t>(i)].id, i);

  std::vector<ReachEdge> edges;
  edges.reserve(static_cast<std::size_t>(n - 1));
  for (const ReachEdge& e : clusterer.mst_snapshot())
    edges.push_back(make_edge(pos.at(e.u), pos.at(e.v), e.weight));

  std::vector<double> caps(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const double cd =
        clusterer.core_record(points[static_cast<std::size_t>(i)].id).core_distance;
    caps[static_cast<std::size_t>(i)] =
        cd > 0.0 ? 1.0 / cd : std::numeric_limits<double>::infinity();
  }

  const Dendrogram dendro = build_dendrogram(
      edges, std::vector<std::int64_t>(static_cast<std::size_t>(n), 1));
  const std::int64_t floor =
      min_cluster_weight > 0 ? min_cluster_weight : min_pts;
  FlatClustering flat = extract_flat(dendro, floor, caps);

  StaticRun out;
  out.cluster_count = static_cast<std::int64_t>(flat.cluster_weights.size());
  out.labels = std::move(flat.labels);
  return out;
}

namespace {

// keep |leaves - target| within one; each maintenance call moves the
// count by at most one step, so this is a short bounded loop
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

std::vector<std::int64_t> bubble_slide_labels(const BubbleTree& tree,
                                              const std::vector<Point>& residents,
                                              int min_pts, std::int64_t floor,
                                              std::int64_t& cluster_count) {
  std::vector<DataBubble> bubbles;
  for (const LeafSummary& leaf : tree.leaf_cfs())
    bubbles.push_back(
        derive_bubble(leaf.cf, static_cast<int>(tree.dim()), leaf.members));

  const BubbleClustering offline = cluster_bubbles(bubbles, min_pts);
  const FlatClustering flat = extract_flat(
      offline.dendrogram, floor, density_caps(offline.core_distances));
  cluster_count = static_cast<std::int64_t>(flat.cluster_weights.size());

  const auto home = assign_points(residents, bubbles);
  std::vector<std::int64_t> labels(residents.size(), kNoiseLabel);
  for (std::size_t i = 0; i < residents.size(); ++i)
    labels[i] =
        flat.labels[static_cast<std::size_t>(home.at(residents[i].id))];
  return labels;
}

std::vector<std::int64_t> exact_slide_labels(const DynamicClusterer& clusterer,
                                             const std::vector<Point>& residents,
                                             std::int64_t floor,
                                             std::int64_t& cluster_count) {
  const auto n = static_cast<std::int64_t>(residents.size());
  std::unordered_map<PointId, std::int64_t> pos;
  pos.reserve(residents.size());
  for (std::int64_t i = 0; i < n; ++i)
    pos.emplace(residents[static_cast<std::size_t>(i)].id, i);

  std::vector<ReachEdge> edges;
  edges.reserve(static_cast<std::size_t>(n - 1));
  for (const ReachEdge& e : clusterer.mst_snapshot())
    edges.push_back(make_edge(pos.at(e.u), pos.at(e.v), e.weight));

  std::vector<double> caps(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const double cd =
        clusterer.core_record(residents[static_cast<std::size_t>(i)].id)
            .core_distance;
    caps[static_cast<std::size_t>(i)] =
        cd > 0.0 ? 1.0 / cd : std::numeric_limits<double>::infinity();
  }

  const Dendrogram dendro = build_dendrogram(
      edges, std::vector<std::int64_t>(static_cast<std::size_t>(n), 1));
  FlatClustering flat = extract_flat(dendro, floor, caps);
  cluster_count = static_cast<std::int64_t>(flat.cluster_weights.size());
  return std::move(flat.labels);
}

}  // namespace

std::vector<SlideReport> run_sliding_window(const WindowConfig& cfg,
                                            const std::vector<Point>& stream) {
  const std::int64_t w = cfg.window_size;
  const std::int64_t d = cfg.slide_delete;
  const std::int64_t i_count = cfg.slide_insert;
  if (w < 1) throw InputError("window size must be positive");
  if (d < 0 || d > w) throw InputError("slide deletion must lie in [0, W]");
  if (i_count < 0) throw InputError("slide insertion must be non-negative");
  if (w <= cfg.min_pts)
    throw InputError("window must hold more points than min_pts");
  if (static_cast<std::int64_t>(stream.size()) < w + i_count)
    throw InputError("stream too short for one slide");
  if (cfg.mode == WindowMode::kBubble) {
    const double l = std::ceil(cfg.rho * static_cast<double>(w) - 1e-9);
    if (l < 2.0)
      throw InputError("rho compresses the window below two summaries");
  }
  const std::int64_t floor =
      cfg.min_cluster_weight > 0 ? cfg.min_cluster_weight : cfg.min_pts;

  std::optional<DynamicClusterer> clusterer;
  std::optional<BubbleTree> tree;
  if (cfg.mode == WindowMode::kExact) {
    clusterer.emplace(cfg.min_pts);
    clusterer->insert_batch(
        std::vector<Point>(stream.begin(), stream.begin() + w));
  } else if (cfg.mode == WindowMode::kBubble) {
    tree.emplace(cfg.rho);
    for (std::int64_t i = 0; i < w; ++i) {
      tree->insert(stream[static_cast<std::size_t>(i)]);
      settle(*tree);
    }
  }

  std::deque<std::int64_t> window;
  for (std::int64_t i = 0; i < w; ++i) window.push_back(i);
  std::int64_t consumed = w;

  std::vector<SlideReport> reports;
  while (i_count > 0 &&
         consumed + i_count <= static_cast<std::int64_t>(stream.size())) {
    SlideReport rep;
    rep.slide = static_cast<std::int64_t>(reports.size()) + 1;
    rep.mode = to_string(cfg.mode);
    rep.seed = cfg.seed;

    const auto online_start = std::chrono::steady_clock::now();
    double r_sum = 0.0;
    std::int64_t ops = 0;
    std::int64_t components = 0;
    for (std::int64_t k = 0; k < d; ++k) {
      const std::int64_t pos = window.front();
      window.pop_front();
      const PointId id = stream[static_cast<std::size_t>(pos)].id;
      if (clusterer) {
        const UpdateStats stats = clusterer->delete_point(id);
        r_sum += static_cast<double>(stats.r_set_size);
        components += static_cast<std::int64_t>(stats.components_reconnected);
        ++ops;
      } else if (tree) {
        tree->erase(id);
        settle(*tree);
      }
    }
    for (std::int64_t k = 0; k < i_count; ++k) {
      const std::int64_t pos = consumed++;
      window.push_back(pos);
      const Point& p = stream[static_cast<std::size_t>(pos)];
      if (clusterer) {
        const UpdateStats stats = clusterer->insert_point(p);
        r_sum += static_cast<double>(stats.r_set_size);
        components += static_cast<std::int64_t>(stats.components_reconnected);
        ++ops;
      } else if (tree) {
        tree->insert(p);
        settle(*tree);
      }
    }
    rep.t_online_ms = ms_since(online_start);
    rep.rknn_mean = ops > 0 ? r_sum / static_cast<double>(ops) : 0.0;
    rep.boruvka_components = components;
    rep.n_resident = static_cast<std::int64_t>(window.size());

    std::vector<Point> residents;
    residents.reserve(window.size());
    for (std::int64_t pos : window)
      residents.push_back(stream[static_cast<std::size_t>(pos)]);
    std::sort(residents.begin(), residents.end(),
              [](const Point& a, const Point& b) { return a.id < b.id; });

    const auto offline_start = std::chrono::steady_clock::now();
    std::vector<std::int64_t> labels;
    switch (cfg.mode) {
      case WindowMode::kExact:
        labels = exact_slide_labels(*clusterer, residents, floor,
                                    rep.cluster_count);
        break;
      case WindowMode::kBubble:
        labels = bubble_slide_labels(*tree, residents, cfg.min_pts, floor,
                                     rep.cluster_count);
        break;
      case WindowMode::kStatic: {
        StaticRun run = static_cluster(residents, cfg.min_pts, floor);
        rep.cluster_count = run.cluster_count;
        labels = std::move(run.labels);
        break;
      }
    }
    rep.t_offline_ms = ms_since(offline_start);

    if (cfg.mode == WindowMode::kStatic) {
      rep.nmi = 1.0;
    } else {
      const StaticRun baseline = static_cluster(residents, cfg.min_pts, floor);
      rep.nmi = nmi(labels, baseline.labels);
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

void emit_report(std::span<const SlideReport> reports, const std::string& path,
                 const std::string& format) {
  if (format != "jsonl" && format != "csv")
    throw InputError("unknown report format '" + format + "'");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");

  if (format == "csv") {
    out << kCsvHeader << '\n';
    for (const SlideReport& r : reports)
      out << r.slide << ',' << fmt(r.t_online_ms) << ',' << fmt(r.t_offline_ms)
          << ',' << fmt(r.nmi) << ',' << r.n_resident << ',' << r.mode << ','
          << r.seed << ',' << fmt(r.rknn_mean) << ',' << r.boruvka_components
          << '\n';
  } else {
    for (const SlideReport& r : reports) {
      nlohmann::json j;
      j["slide"] = r.slide;
      j["t_online_ms"] = r.t_online_ms;
      j["t_offline_ms"] = r.t_offline_ms;
      j["nmi"] = r.nmi;
      j["n_resident"] = r.n_resident;
      j["mode"] = r.mode;
      j["seed"] = r.seed;
      j["rknn_mean"] = r.rknn_mean;
      j["boruvka_components"] = r.boruvka_components;
      out << j.dump() << '\n';
    }
  }
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

std::vector<SlideReport> load_report(const std::string& path,
                                     const std::string& format) {
  if (format != "jsonl" && format != "csv")
    throw InputError("unknown report format '" + format + "'");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::vector<SlideReport> out;
  std::string line;
  std::size_t row = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (format == "csv" && !header_seen) {
      header_seen = true;
      if (line != kCsvHeader)
        throw InputError("row 1: unexpected report header");
      continue;
    }
    SlideReport r;
    if (format == "csv") {
      const std::vector<std::string> cells = split_cells(line);
      if (cells.size() != 9)
        throw InputError("row " + std::to_string(row) +
                         ": expected 9 report fields");
      std::int64_t seed = 0;
      if (!parse_int(cells[0], r.slide) ||
          !parse_double(cells[1], r.t_online_ms) ||
          !parse_double(cells[2], r.t_offline_ms) ||
          !parse_double(cells[3], r.nmi) ||
          !parse_int(cells[4], r.n_resident) ||
          !parse_int(cells[6], seed) ||
          !parse_double(cells[7], r.rknn_mean) ||
          !parse_int(cells[8], r.boruvka_components))
        throw InputError("row " + std::to_string(row) +
                         ": malformed report fields");
      r.mode = cells[5];
      r.seed = static_cast<std::uint64_t>(seed);
    } else {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw InputError("row " + std::to_string(row) + ": " + e.what());
      }
      try {
        r.slide = j.at("slide").get<std::int64_t>();
        r.t_online_ms = j.at("t_online_ms").get<double>();
        r.t_offline_ms = j.at("t_offline_ms").get<double>();
        r.nmi = j.at("nmi").get<double>();
        r.n_resident = j.at("n_resident").get<std::int64_t>();
        r.mode = j.at("mode").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.rknn_mean = j.at("rknn_mean").get<double>();
        r.boruvka_components = j.at("boruvka_components").get<std::int64_t>();
      } catch (const nlohmann::json::exception& e) {
        throw InputError("row " + std::to_string(row) + ": " + e.what());
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

void save_labels(std::span<const std::int64_t> labels,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (std::int64_t label : labels) out << label << '\n';
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

std::vector<std::int64_t> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::int64_t> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string cell = trim(line);
    if (cell.empty()) continue;
    std::int64_t v = 0;
    if (!parse_int(cell, v))
      throw InputError("row " + std::to_string(row) + ": cannot parse '" +
                       cell + "' as a label");
    out.push_back(v);
  }
  return out;
}

}  // namespace dynhc
