#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dsamp/errors.hpp"
#include "dsamp/frames.hpp"
#include "dsamp/harness.hpp"
#include "dsamp/patterns.hpp"
#include "dsamp/qmap.hpp"
#include "dsamp/scenes.hpp"
#include "dsamp/toy1d.hpp"

namespace fs = std::filesystem;

namespace {

using namespace dsamp;

// Collects the paths a command intends to write and deletes them unless the
// command ran to completion, so a failed run leaves no partial artifacts.
class OutputGuard {
 public:
  OutputGuard() = default;
  OutputGuard(const OutputGuard&) = delete;
  OutputGuard& operator=(const OutputGuard&) = delete;
  ~OutputGuard() {
    if (committed_) return;
    for (const fs::path& p : paths_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }

  void declare(const fs::path& p) { paths_.push_back(p); }
  void commit() { committed_ = true; }

 private:
  std::vector<fs::path> paths_;
  bool committed_ = false;
};

// Flags shared by the sampling-related subcommands, mirroring FrameworkConfig.
struct CommonOpts {
  int budget = 0;  // 0 resolves to 1% of the pixel count
  double depth_threshold = 100.0;
  std::string metric = "rmse";
  int iters = 100;
  double grid_fraction = 0.05;
  double sigma = 0.0;  // 0 keeps the spacing-derived default
  std::uint64_t seed = 0;
  std::string predictor = "linear";
  std::string format = "auto";
};

void add_config_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--budget,-b", o.budget, "sample budget, 0 = 1% of the pixels");
  cmd->add_option("--depth-threshold", o.depth_threshold, "evaluation depth cutoff in meters");
  cmd->add_option("--metric", o.metric, "error metric: rmse, rel, mad");
  cmd->add_option("--iters,-j", o.iters, "monte carlo iteration count");
  cmd->add_option("--grid-fraction", o.grid_fraction, "budget fraction placed on a coarse grid");
  cmd->add_option("--sigma", o.sigma, "suppression kernel width, 0 = derive from spacing");
  cmd->add_option("--seed", o.seed, "rng seed");
  cmd->add_option("--predictor", o.predictor, "reconstruction predictor: nearest, linear, idw");
}

FrameworkConfig make_config(const CommonOpts& o, int width, int height) {
  FrameworkConfig cfg;
  cfg.budget = o.budget == 0 ? default_budget(width, height) : o.budget;
  cfg.depth_threshold = o.depth_threshold;
  cfg.metric = metric_from_string(o.metric);
  cfg.mc_iterations = o.iters;
  cfg.grid_fraction = o.grid_fraction;
  if (o.sigma > 0) cfg.sigma = o.sigma;
  cfg.rng_seed = o.seed;
  cfg.validate();
  return cfg;
}

Predictor make_predictor(const CommonOpts& o) {
  Predictor p;
  p.kind = predictor_from_string(o.predictor);
  return p;
}

DepthFrame load_depth_cli(const std::string& path, const std::string& format) {
  if (format == "auto") return load_depth(path, depth_format_for_path(path));
  if (format == "pfm") return load_depth(path, DepthFormat::PFM);
  if (format == "pgm") return load_depth(path, DepthFormat::PGM16);
  throw DataError("unknown depth format '" + format + "' (expected auto, pfm, or pgm)");
}

void write_text_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  out.flush();
  if (!out) throw DataError("write failed: " + path.string());
}

void run_gen_scenes(int count, std::uint64_t seed, double depth_threshold,
                    const std::string& out_dir) {
  const auto suite = generate_suite(count, seed, depth_threshold);
  fs::create_directories(out_dir);
  OutputGuard guard;
  std::string manifest =
      "name,width,height,seed,num_boxes,depth_min,depth_max,background,"
      "beyond_dt_fraction,test_split\n";
  for (const auto& entry : suite) {
    const fs::path depth_path = fs::path(out_dir) / (entry.name + "_depth.pfm");
    const fs::path guide_path = fs::path(out_dir) / (entry.name + "_guide.pgm");
    const fs::path edges_path = fs::path(out_dir) / (entry.name + "_edges.pgm");
    guard.declare(depth_path);
    guard.declare(guide_path);
    guard.declare(edges_path);
    save_depth(entry.scene.depth, depth_path, DepthFormat::PFM);
    save_guide(entry.scene.guide, guide_path);
    save_mask(entry.scene.edges, edges_path);
    char line[320];
    std::snprintf(line, sizeof(line), "%s,%d,%d,%" PRIu64 ",%d,%.12g,%.12g,%s,%.12g,%d\n",
                  entry.name.c_str(), entry.spec.width, entry.spec.height, entry.spec.seed,
                  entry.spec.num_boxes, entry.spec.depth_min, entry.spec.depth_max,
                  entry.spec.background == BackgroundKind::Ramp ? "ramp" : "constant",
                  entry.spec.beyond_dt_fraction, entry.test_split ? 1 : 0);
    manifest += line;
  }
  const fs::path manifest_path = fs::path(out_dir) / "manifest.csv";
  guard.declare(manifest_path);
  write_text_file(manifest_path, manifest);
  guard.commit();
  std::printf("wrote %d scenes to %s\n", count, out_dir.c_str());
}

void run_compute_q(const std::string& in, const std::string& guide_path, const CommonOpts& o,
                   const std::string& out) {
  const DepthFrame y = load_depth_cli(in, o.format);
  std::optional<GuideImage> guide;
  if (!guide_path.empty()) guide = load_guide(guide_path);
  const FrameworkConfig cfg = make_config(o, y.width, y.height);
  OutputGuard guard;
  guard.declare(out);
  const QMap q = compute_q(y, guide ? &*guide : nullptr, make_predictor(o), cfg);
  save_qmap(q, out);
  guard.commit();
  std::printf("q map %dx%d (budget %d, iters %d) -> %s\n", q.width, q.height, cfg.budget,
              cfg.mc_iterations, out.c_str());
}

void run_estimate_qhat(const std::string& estimator, const std::string& in,
                       const std::string& guide_path, const std::string& qmap_path,
                       const CommonOpts& o, const std::string& out) {
  QEstimator est;
  est.kind = qestimator_from_string(estimator);
  est.path = qmap_path;
  std::optional<DepthFrame> y;
  if (!in.empty()) y = load_depth_cli(in, o.format);
  std::optional<GuideImage> guide;
  if (!guide_path.empty()) guide = load_guide(guide_path);
  // Without a reference raster the config dimensions are moot; budget 1 keeps
  // validation happy for the from-file path.
  const int w = y ? y->width : (guide ? guide->width : 1);
  const int h = y ? y->height : (guide ? guide->height : 1);
  const FrameworkConfig cfg = make_config(o, w, h);
  OutputGuard guard;
  guard.declare(out);
  const QMap qhat =
      estimate_qhat(est, y ? &*y : nullptr, guide ? &*guide : nullptr, make_predictor(o), cfg);
  save_qmap(qhat, out);
  guard.commit();
  std::printf("%s importance map %dx%d -> %s\n", estimator.c_str(), qhat.width, qhat.height,
              out.c_str());
}

void run_sample(const std::string& family, const std::string& estimator, const std::string& in,
                const std::string& guide_path, const std::string& qmap_path, const CommonOpts& o,
                const std::string& out) {
  std::optional<DepthFrame> y;
  if (!in.empty()) y = load_depth_cli(in, o.format);
  std::optional<GuideImage> guide;
  if (!guide_path.empty()) guide = load_guide(guide_path);
  std::optional<QMap> qmap;
  if (!qmap_path.empty()) qmap = load_qmap(qmap_path);

  int w = 0;
  int h = 0;
  if (y) {
    w = y->width;
    h = y->height;
  } else if (guide) {
    w = guide->width;
    h = guide->height;
  } else if (qmap) {
    w = qmap->width;
    h = qmap->height;
  } else {
    throw DataError("sample needs --in, --guide, or --qmap to define the raster");
  }
  if (guide && (guide->width != w || guide->height != h))
    throw DataError("guide dimensions disagree with the depth frame");
  if (qmap && (qmap->width != w || qmap->height != h))
    throw DataError("importance map dimensions disagree with the input raster");

  const FrameworkConfig cfg = make_config(o, w, h);
  const PixelMask* mask = y ? &y->valid : nullptr;

  SamplePattern pattern;
  if (family == "random") {
    pattern = random_pattern(w, h, mask, cfg.budget, cfg.rng_seed);
  } else if (family == "grid") {
    pattern = grid_pattern(w, h, mask, cfg.budget);
  } else if (family == "superpixel") {
    if (!guide) throw DataError("superpixel sampling requires --guide");
    pattern = superpixel_pattern(*guide, mask, cfg.budget);
  } else if (family == "importance") {
    QEstimator est;
    est.kind = qestimator_from_string(estimator);
    est.path = qmap_path;
    QMap qhat;
    if (est.kind == QEstimatorKind::FromFile) {
      if (!qmap) throw DataError("importance sampling from a file requires --qmap");
      qhat = *qmap;
    } else {
      qhat = estimate_qhat(est, y ? &*y : nullptr, guide ? &*guide : nullptr, make_predictor(o),
                           cfg);
    }
    pattern = blend_with_grid(qhat, mask, cfg.budget, cfg.grid_fraction, cfg.sigma);
  } else {
    throw DataError("unknown family '" + family +
                    "' (expected random, grid, superpixel, or importance)");
  }

  OutputGuard guard;
  guard.declare(out);
  save_pattern(pattern, out);
  guard.commit();
  std::printf("%s pattern with %d samples -> %s\n", family.c_str(), pattern.budget(), out.c_str());
}

void run_reconstruct(const std::string& in, const std::string& pattern_path,
                     const std::string& guide_path, const CommonOpts& o, const std::string& out) {
  const DepthFrame y = load_depth_cli(in, o.format);
  std::optional<GuideImage> guide;
  if (!guide_path.empty()) guide = load_guide(guide_path);
  const FrameworkConfig cfg = make_config(o, y.width, y.height);
  const SamplePattern pattern = load_pattern(pattern_path);
  const SampleSet samples = measure(y, pattern);
  const DenseDepth yhat =
      predict(make_predictor(o), samples, y.width, y.height, guide ? &*guide : nullptr);
  // Score before the lossy float cast below so the printed error matches the
  // in-memory evaluation path exactly.
  const double error = aggregate(y, yhat, cfg.metric, cfg.depth_threshold);
  if (!out.empty()) {
    OutputGuard guard;
    guard.declare(out);
    std::vector<float> data(yhat.data.begin(), yhat.data.end());
    save_depth(DepthFrame::dense(y.width, y.height, std::move(data)), out,
               depth_format_for_path(out));
    guard.commit();
  }
  std::printf("%s %.12g\n", metric_name(cfg.metric), error);
}

void run_evaluate(int suite_count, const std::string& estimator, bool no_oracle, int workers,
                  const CommonOpts& o, const std::string& out_dir) {
  QEstimator est;
  est.kind = qestimator_from_string(estimator);
  if (est.kind == QEstimatorKind::FromFile)
    throw DataError("suite evaluation supports the oracle and gradient estimators only");
  const auto suite = generate_suite(suite_count, o.seed, o.depth_threshold);

  FrameworkConfig cfg;
  cfg.budget = o.budget;  // 0 stays 0: the suite resolves it per frame
  cfg.depth_threshold = o.depth_threshold;
  cfg.metric = metric_from_string(o.metric);
  cfg.mc_iterations = o.iters;
  cfg.grid_fraction = o.grid_fraction;
  if (o.sigma > 0) cfg.sigma = o.sigma;
  cfg.rng_seed = o.seed;

  const SuiteResult result =
      evaluate_suite(suite, make_predictor(o), cfg, est, !no_oracle, workers);

  fs::create_directories(out_dir);
  OutputGuard guard;
  const fs::path records_path = fs::path(out_dir) / "records.csv";
  const fs::path summary_path = fs::path(out_dir) / "summary.csv";
  guard.declare(records_path);
  guard.declare(summary_path);
  write_records_csv(result.records, records_path.string());
  write_summary_csv(result.summary, summary_path.string());
  guard.commit();

  std::printf("%-18s %-6s %14s %7s\n", "family", "metric", "mean_error", "count");
  for (const auto& row : result.summary)
    std::printf("%-18s %-6s %14.6g %7d\n", family_name(row.family), metric_name(row.metric),
                row.mean_error, row.count);
  std::printf("records -> %s\n", records_path.string().c_str());
}

void run_toy1d(int budget, int iters, std::uint64_t seed, const std::string& out) {
  const Signal1D signal = canonical_toy_signal();
  const ToyReport report = toy_run(signal, budget, iters, seed);
  OutputGuard guard;
  guard.declare(out);
  write_toy_csv(signal, report, out);
  guard.commit();
  std::printf("mean random RMSE %.6g over %d patterns, adaptive RMSE %.6g (ratio %.3g) -> %s\n",
              report.mean_random_rmse, iters, report.adaptive_rmse,
              report.adaptive_rmse / report.mean_random_rmse, out.c_str());
}

void run_q_converge(const std::string& in, const std::string& guide_path,
                    const std::vector<int>& levels, const CommonOpts& o, const std::string& out,
                    const std::string& maps_prefix) {
  const DepthFrame y = load_depth_cli(in, o.format);
  std::optional<GuideImage> guide;
  if (!guide_path.empty()) guide = load_guide(guide_path);
  const FrameworkConfig cfg = make_config(o, y.width, y.height);
  const ConvergenceResult result =
      q_convergence(y, guide ? &*guide : nullptr, make_predictor(o), cfg, levels);
  OutputGuard guard;
  guard.declare(out);
  std::vector<fs::path> map_paths;
  if (!maps_prefix.empty()) {
    for (int level : result.levels) {
      map_paths.emplace_back(maps_prefix + "J" + std::to_string(level) + ".pfm");
      guard.declare(map_paths.back());
    }
  }
  write_convergence_csv(result, out);
  for (std::size_t i = 0; i < map_paths.size(); ++i) save_qmap(result.maps[i], map_paths[i]);
  guard.commit();
  for (const auto& row : result.table)
    std::printf("J %d -> %d: mad %.12g\n", row.j_low, row.j_high, row.mad);
  std::printf("table -> %s\n", out.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"importance-guided adaptive depth sampling toolkit"};
  app.require_subcommand(1);

  // gen-scenes
  auto* gen = app.add_subcommand("gen-scenes", "generate a synthetic scene suite");
  int gen_count = 20;
  std::uint64_t gen_seed = 0;
  double gen_dt = 100.0;
  std::string gen_out = "scenes";
  gen->add_option("--count", gen_count, "number of scenes");
  gen->add_option("--seed", gen_seed, "suite seed");
  gen->add_option("--depth-threshold", gen_dt, "evaluation depth cutoff in meters");
  gen->add_option("--out", gen_out, "output directory");
  gen->callback([&] { run_gen_scenes(gen_count, gen_seed, gen_dt, gen_out); });

  // compute-q
  auto* cq = app.add_subcommand("compute-q", "estimate the expected-error map of a depth frame");
  CommonOpts cq_opts;
  std::string cq_in;
  std::string cq_guide;
  std::string cq_out = "q.pfm";
  cq->add_option("--in", cq_in, "ground-truth depth frame")->required();
  cq->add_option("--guide", cq_guide, "aligned guide image");
  cq->add_option("--format", cq_opts.format, "depth input format: auto, pfm, pgm");
  cq->add_option("--out", cq_out, "output importance map (pfm)");
  add_config_flags(cq, cq_opts);
  cq->callback([&] { run_compute_q(cq_in, cq_guide, cq_opts, cq_out); });

  // estimate-qhat
  auto* eq = app.add_subcommand("estimate-qhat", "produce an importance map estimate");
  CommonOpts eq_opts;
  std::string eq_estimator = "gradient";
  std::string eq_in;
  std::string eq_guide;
  std::string eq_qmap;
  std::string eq_out = "qhat.pfm";
  eq->add_option("--estimator", eq_estimator, "importance source: oracle, from-file, gradient");
  eq->add_option("--in", eq_in, "ground-truth depth frame (oracle)");
  eq->add_option("--guide", eq_guide, "aligned guide image (gradient)");
  eq->add_option("--qmap", eq_qmap, "stored importance map (from-file)");
  eq->add_option("--format", eq_opts.format, "depth input format: auto, pfm, pgm");
  eq->add_option("--out", eq_out, "output importance map (pfm)");
  add_config_flags(eq, eq_opts);
  eq->callback([&] { run_estimate_qhat(eq_estimator, eq_in, eq_guide, eq_qmap, eq_opts, eq_out); });

  // sample
  auto* sm = app.add_subcommand("sample", "generate a sampling pattern");
  CommonOpts sm_opts;
  std::string sm_family = "importance";
  std::string sm_estimator = "from-file";
  std::string sm_in;
  std::string sm_guide;
  std::string sm_qmap;
  std::string sm_out = "pattern.csv";
  sm->add_option("--family", sm_family, "pattern family: random, grid, superpixel, importance");
  sm->add_option("--estimator", sm_estimator,
                 "importance source for --family importance: oracle, from-file, gradient");
  sm->add_option("--in", sm_in, "depth frame supplying dimensions and validity");
  sm->add_option("--guide", sm_guide, "aligned guide image");
  sm->add_option("--qmap", sm_qmap, "stored importance map");
  sm->add_option("--format", sm_opts.format, "depth input format: auto, pfm, pgm");
  sm->add_option("--out", sm_out, "output pattern csv");
  add_config_flags(sm, sm_opts);
  sm->callback(
      [&] { run_sample(sm_family, sm_estimator, sm_in, sm_guide, sm_qmap, sm_opts, sm_out); });

  // reconstruct
  auto* rc = app.add_subcommand("reconstruct", "densify a pattern's measurements and score it");
  CommonOpts rc_opts;
  std::string rc_in;
  std::string rc_pattern;
  std::string rc_guide;
  std::string rc_out;
  rc->add_option("--in", rc_in, "ground-truth depth frame")->required();
  rc->add_option("--pattern", rc_pattern, "pattern csv to measure")->required();
  rc->add_option("--guide", rc_guide, "aligned guide image");
  rc->add_option("--format", rc_opts.format, "depth input format: auto, pfm, pgm");
  rc->add_option("--out", rc_out, "optional output for the dense reconstruction");
  add_config_flags(rc, rc_opts);
  rc->callback([&] { run_reconstruct(rc_in, rc_pattern, rc_guide, rc_opts, rc_out); });

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "run the pattern-comparison protocol on a suite");
  CommonOpts ev_opts;
  int ev_suite = 20;
  std::string ev_estimator = "gradient";
  bool ev_no_oracle = false;
  int ev_workers = 1;
  std::string ev_out = "eval";
  ev->add_option("--suite", ev_suite, "number of generated scenes");
  ev->add_option("--estimator", ev_estimator, "importance source: oracle, gradient");
  ev->add_flag("--no-oracle", ev_no_oracle, "skip the oracle-importance family");
  ev->add_option("--workers", ev_workers, "worker threads, 0 = hardware concurrency");
  ev->add_option("--out", ev_out, "output directory for records.csv and summary.csv");
  add_config_flags(ev, ev_opts);
  ev->callback(
      [&] { run_evaluate(ev_suite, ev_estimator, ev_no_oracle, ev_workers, ev_opts, ev_out); });

  // toy1d
  auto* toy = app.add_subcommand("toy1d", "1d random-vs-adaptive sampling demo");
  int toy_budget = 15;
  int toy_iters = 7;
  std::uint64_t toy_seed = 0;
  std::string toy_out = "toy1d.csv";
  toy->add_option("--budget,-b", toy_budget, "samples per pattern, endpoints included");
  toy->add_option("--iters,-j", toy_iters, "number of random patterns");
  toy->add_option("--seed", toy_seed, "rng seed");
  toy->add_option("--out", toy_out, "output csv");
  toy->callback([&] { run_toy1d(toy_budget, toy_iters, toy_seed, toy_out); });

  // q-converge
  auto* qc = app.add_subcommand("q-converge", "expected-error map stability across iteration counts");
  CommonOpts qc_opts;
  std::string qc_in;
  std::string qc_guide;
  std::vector<int> qc_levels = {10, 100, 1000};
  std::string qc_out = "qconverge.csv";
  std::string qc_maps;
  qc->add_option("--in", qc_in, "ground-truth depth frame")->required();
  qc->add_option("--guide", qc_guide, "aligned guide image");
  qc->add_option("--levels", qc_levels, "ascending iteration counts")->delimiter(',');
  qc->add_option("--format", qc_opts.format, "depth input format: auto, pfm, pgm");
  qc->add_option("--out", qc_out, "output csv for the difference table");
  qc->add_option("--maps-prefix", qc_maps, "also store each level's map as <prefix>J<level>.pfm");
  add_config_flags(qc, qc_opts);
  qc->callback([&] { run_q_converge(qc_in, qc_guide, qc_levels, qc_opts, qc_out, qc_maps); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    std::fprintf(stderr, "run with --help for usage\n");
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const InternalError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
  return 0;
}
