// command line front end: generate synthetic streams, run static or
// sliding-window clustering, and score label files against each other
#include <charconv>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dynhc/errors.hpp"
#include "dynhc/harness.hpp"
#include "dynhc/hierarchy.hpp"
#include "dynhc/types.hpp"

namespace {

void write_points_csv(const std::vector<dynhc::Point>& points,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw dynhc::IoError("cannot open " + path + " for writing");
  for (const dynhc::Point& p : points) {
    for (std::size_t d = 0; d < p.coords.size(); ++d) {
      if (d > 0) out << ',';
      char buf[64];
      const auto [end, ec] =
          std::to_chars(buf, buf + sizeof buf, p.coords[d]);
      out.write(buf, end - buf);
      (void)ec;
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw dynhc::IoError("write failed: " + path);
}

int run(int argc, char** argv) {
  CLI::App app{"dynamic hierarchical density clustering harness"};
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate a gaussian mixture stream");
  std::int64_t gen_n = 5000;
  int gen_dim = 10;
  int gen_components = 10;
  double gen_overlap = 0.1;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  std::string gen_labels_out;
  gen->add_option("--n", gen_n, "number of points");
  gen->add_option("--dim", gen_dim, "dimensionality");
  gen->add_option("--components", gen_components, "mixture components");
  gen->add_option("--overlap", gen_overlap, "overlap hint in [0, 1]");
  gen->add_option("--seed", gen_seed, "rng seed");
  gen->add_option("--out", gen_out, "points csv path")->required();
  gen->add_option("--labels-out", gen_labels_out, "ground-truth labels path");

  // ---- static ----
  auto* stat = app.add_subcommand("static", "cluster a csv file once");
  std::string stat_input;
  int stat_min_pts = 10;
  std::int64_t stat_floor = 0;
  std::string stat_out;
  stat->add_option("--input", stat_input, "points csv path")->required();
  stat->add_option("--minpts", stat_min_pts, "density neighbour count");
  stat->add_option("--min-cluster-size", stat_floor,
                   "smallest reported cluster weight (0 = minpts)");
  stat->add_option("--out", stat_out, "labels output path");

  // ---- window ----
  auto* win = app.add_subcommand("window", "run a sliding-window stream");
  std::string win_mode = "exact";
  dynhc::WindowConfig cfg;
  std::string win_input;
  std::int64_t win_slides = 10;
  int win_dim = 10;
  int win_components = 10;
  double win_overlap = 0.1;
  std::string win_report;
  std::string win_format = "jsonl";
  win->add_option("--mode", win_mode, "exact, bubble, or static");
  win->add_option("--w", cfg.window_size, "window size");
  win->add_option("--d", cfg.slide_delete, "deletions per slide");
  win->add_option("--i", cfg.slide_insert, "insertions per slide");
  win->add_option("--minpts", cfg.min_pts, "density neighbour count");
  win->add_option("--min-cluster-size", cfg.min_cluster_weight,
                  "smallest reported cluster weight (0 = minpts)");
  win->add_option("--rho", cfg.rho, "bubble compression ratio");
  win->add_option("--seed", cfg.seed, "rng seed for synthetic streams");
  win->add_option("--input", win_input,
                  "points csv to stream (otherwise synthesized)");
  win->add_option("--slides", win_slides,
                  "slides to synthesize when no --input is given");
  win->add_option("--dim", win_dim, "synthetic stream dimensionality");
  win->add_option("--components", win_components,
                  "synthetic mixture components");
  win->add_option("--overlap", win_overlap, "synthetic overlap hint");
  win->add_option("--report", win_report, "per-slide report path");
  win->add_option("--format", win_format, "report format: jsonl or csv");

  // ---- nmi ----
  auto* score = app.add_subcommand("nmi", "score two label files");
  std::string score_a;
  std::string score_b;
  score->add_option("a", score_a, "first labels file")->required();
  score->add_option("b", score_b, "second labels file")->required();

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    const dynhc::GeneratedData data = dynhc::gen_gaussian_mixture(
        gen_n, gen_dim, gen_components, gen_overlap, gen_seed);
    write_points_csv(data.points, gen_out);
    if (!gen_labels_out.empty()) dynhc::save_labels(data.labels, gen_labels_out);
    std::cout << "wrote " << data.points.size() << " points to " << gen_out
              << '\n';
    return 0;
  }

  if (stat->parsed()) {
    const std::vector<dynhc::Point> points = dynhc::load_csv(stat_input);
    const dynhc::StaticRun run =
        dynhc::static_cluster(points, stat_min_pts, stat_floor);
    if (!stat_out.empty()) dynhc::save_labels(run.labels, stat_out);
    std::int64_t noise = 0;
    for (std::int64_t label : run.labels)
      if (label == dynhc::kNoiseLabel) ++noise;
    std::cout << run.cluster_count << " clusters, " << noise << " noise of "
              << points.size() << " points\n";
    return 0;
  }

  if (win->parsed()) {
    cfg.mode = dynhc::parse_window_mode(win_mode);
    std::vector<dynhc::Point> stream;
    if (!win_input.empty()) {
      stream = dynhc::load_csv(win_input);
    } else {
      if (win_slides < 1)
        throw dynhc::InputError("need at least one slide to synthesize");
      const std::int64_t total =
          cfg.window_size + win_slides * cfg.slide_insert;
      stream = dynhc::gen_gaussian_mixture(total, win_dim, win_components,
                                           win_overlap, cfg.seed)
                   .points;
    }
    const std::vector<dynhc::SlideReport> reports =
        dynhc::run_sliding_window(cfg, stream);
    if (!win_report.empty())
      dynhc::emit_report(reports, win_report, win_format);
    for (const dynhc::SlideReport& r : reports)
      std::cout << "slide " << r.slide << ": online " << r.t_online_ms
                << " ms, offline " << r.t_offline_ms << " ms, nmi " << r.nmi
                << ", clusters " << r.cluster_count << '\n';
    std::cout << reports.size() << " slides complete\n";
    return 0;
  }

  if (score->parsed()) {
    const std::vector<std::int64_t> a = dynhc::load_labels(score_a);
    const std::vector<std::int64_t> b = dynhc::load_labels(score_b);
    std::cout << dynhc::nmi(a, b) << '\n';
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const dynhc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
}
