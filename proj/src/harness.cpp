#include "dsamp/harness.hpp"

#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "dsamp/errors.hpp"
#include "dsamp/patterns.hpp"
#include "dsamp/rng.hpp"

namespace dsamp {
namespace {

// Stream tags for harness-level seed derivation.
constexpr std::uint64_t kFrameStream = 0x4652414dULL;
constexpr std::uint64_t kRandomStream = 0x52414e44ULL;

double seconds_since(std::chrono::steady_clock::time_point start) {
  const auto dt = std::chrono::steady_clock::now() - start;
  return std::chrono::duration<double>(dt).count();
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  out.flush();
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace

const char* family_name(PatternFamily family) {
  switch (family) {
    case PatternFamily::Random: return "Random";
    case PatternFamily::Grid: return "Grid";
    case PatternFamily::SuperPixel: return "SuperPixel";
    case PatternFamily::Importance: return "Importance";
    case PatternFamily::ImportanceOracle: return "ImportanceOracle";
  }
  throw InternalError("unknown pattern family");
}

int default_budget(int width, int height) {
  const double pixels = static_cast<double>(width) * static_cast<double>(height);
  const long b = std::lround(0.01 * pixels);
  return b < 1 ? 1 : static_cast<int>(b);
}

std::vector<EvalRecord> evaluate_frame(const std::string& frame_id, const DepthFrame& y,
                                       const GuideImage* guide, const Predictor& predictor,
                                       const FrameworkConfig& cfg, const QEstimator& estimator,
                                       bool with_oracle, std::uint64_t frame_seed) {
  y.validate();
  cfg.validate();
  if (guide) {
    guide->validate();
    if (guide->width != y.width || guide->height != y.height)
      throw DataError("guide dimensions do not match the depth frame");
  }

  std::vector<EvalRecord> records;
  records.reserve(static_cast<std::size_t>(kRandomRepeats) + 4);

  auto eval_pattern = [&](PatternFamily family, int random_index, std::uint64_t pattern_seed,
                          const SamplePattern& pattern, double pattern_seconds) {
    const auto start = std::chrono::steady_clock::now();
    const SampleSet samples = measure(y, pattern);
    const DenseDepth yhat = predict(predictor, samples, y.width, y.height, guide);
    const double error = aggregate(y, yhat, cfg.metric, cfg.depth_threshold);
    EvalRecord rec;
    rec.frame = frame_id;
    rec.family = family;
    rec.random_index = random_index;
    rec.metric = cfg.metric;
    rec.error = error;
    rec.pattern_seed = pattern_seed;
    rec.cfg = cfg;
    rec.seconds = pattern_seconds + seconds_since(start);
    records.push_back(std::move(rec));
  };

  auto run_family = [&](PatternFamily family, auto&& body) {
    try {
      body();
    } catch (const DataError& e) {
      throw DataError(std::string(e.what()) + " (family " + family_name(family) + ", frame " +
                      frame_id + ")");
    } catch (const InternalError& e) {
      throw InternalError(std::string(e.what()) + " (family " + family_name(family) + ", frame " +
                          frame_id + ")");
    }
  };

  run_family(PatternFamily::Random, [&] {
    for (int j = 1; j <= kRandomRepeats; ++j) {
      const std::uint64_t seed_j =
          derive_seed(frame_seed, kRandomStream, static_cast<std::uint64_t>(j));
      const auto start = std::chrono::steady_clock::now();
      const SamplePattern pattern = random_pattern(y.width, y.height, &y.valid, cfg.budget, seed_j);
      eval_pattern(PatternFamily::Random, j, seed_j, pattern, seconds_since(start));
    }
  });

  run_family(PatternFamily::Grid, [&] {
    const auto start = std::chrono::steady_clock::now();
    const SamplePattern pattern = grid_pattern(y.width, y.height, &y.valid, cfg.budget);
    eval_pattern(PatternFamily::Grid, 0, cfg.rng_seed, pattern, seconds_since(start));
  });

  run_family(PatternFamily::SuperPixel, [&] {
    if (!guide) throw DataError("superpixel sampling requires a guide image");
    const auto start = std::chrono::steady_clock::now();
    const SamplePattern pattern = superpixel_pattern(*guide, &y.valid, cfg.budget);
    eval_pattern(PatternFamily::SuperPixel, 0, cfg.rng_seed, pattern, seconds_since(start));
  });

  run_family(PatternFamily::Importance, [&] {
    const auto start = std::chrono::steady_clock::now();
    const QMap qhat = estimate_qhat(estimator, &y, guide, predictor, cfg);
    const SamplePattern pattern =
        blend_with_grid(qhat, &y.valid, cfg.budget, cfg.grid_fraction, cfg.sigma);
    eval_pattern(PatternFamily::Importance, 0, cfg.rng_seed, pattern, seconds_since(start));
  });

  if (with_oracle) {
    run_family(PatternFamily::ImportanceOracle, [&] {
      QEstimator oracle;
      oracle.kind = QEstimatorKind::Oracle;
      const auto start = std::chrono::steady_clock::now();
      const QMap q = estimate_qhat(oracle, &y, guide, predictor, cfg);
      const SamplePattern pattern =
          blend_with_grid(q, &y.valid, cfg.budget, cfg.grid_fraction, cfg.sigma);
      eval_pattern(PatternFamily::ImportanceOracle, 0, cfg.rng_seed, pattern, seconds_since(start));
    });
  }

  return records;
}

std::vector<SummaryRow> summarize(const std::vector<EvalRecord>& records) {
  constexpr PatternFamily kOrder[] = {PatternFamily::Random, PatternFamily::Grid,
                                      PatternFamily::SuperPixel, PatternFamily::Importance,
                                      PatternFamily::ImportanceOracle};
  std::vector<SummaryRow> rows;
  for (PatternFamily family : kOrder) {
    SummaryRow row;
    row.family = family;
    double sum = 0.0;
    for (const EvalRecord& rec : records) {
      if (rec.family != family) continue;
      if (row.count == 0) row.metric = rec.metric;
      sum += rec.error;
      ++row.count;
    }
    if (row.count == 0) continue;
    row.mean_error = sum / row.count;
    rows.push_back(row);
  }
  return rows;
}

SuiteResult evaluate_suite(const std::vector<SuiteEntry>& suite, const Predictor& predictor,
                           const FrameworkConfig& cfg, const QEstimator& estimator,
                           bool with_oracle, int workers) {
  if (suite.empty()) throw DataError("evaluation suite is empty");

  const std::size_t n = suite.size();
  std::vector<std::vector<EvalRecord>> slots(n);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto work = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        const SuiteEntry& entry = suite[i];
        FrameworkConfig frame_cfg = cfg;
        if (frame_cfg.budget == 0)
          frame_cfg.budget = default_budget(entry.scene.depth.width, entry.scene.depth.height);
        const std::uint64_t frame_seed =
            derive_seed(cfg.rng_seed, kFrameStream, static_cast<std::uint64_t>(i));
        slots[i] = evaluate_frame(entry.name, entry.scene.depth, &entry.scene.guide, predictor,
                                  frame_cfg, estimator, with_oracle, frame_seed);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  int effective = workers;
  if (effective < 1) {
    const unsigned hw = std::thread::hardware_concurrency();
    effective = hw == 0 ? 1 : static_cast<int>(hw);
  }
  if (static_cast<std::size_t>(effective) > n) effective = static_cast<int>(n);

  if (effective == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(effective));
    for (int t = 0; t < effective; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  SuiteResult result;
  for (std::vector<EvalRecord>& part : slots)
    for (EvalRecord& rec : part) result.records.push_back(std::move(rec));
  result.summary = summarize(result.records);
  return result;
}

void write_records_csv(const std::vector<EvalRecord>& records, const std::string& path) {
  std::string body = "frame,family,metric,error,seed\n";
  char line[256];
  for (const EvalRecord& rec : records) {
    std::snprintf(line, sizeof(line), "%s,%s,%.12g,%" PRIu64 "\n", family_name(rec.family),
                  metric_name(rec.metric), rec.error, rec.pattern_seed);
    body += rec.frame;
    body += ',';
    body += line;
  }
  write_text(path, body);
}

void write_summary_csv(const std::vector<SummaryRow>& summary, const std::string& path) {
  std::string body = "family,metric,mean_error,count\n";
  char line[160];
  for (const SummaryRow& row : summary) {
    std::snprintf(line, sizeof(line), "%s,%s,%.12g,%d\n", family_name(row.family),
                  metric_name(row.metric), row.mean_error, row.count);
    body += line;
  }
  write_text(path, body);
}

}  // namespace dsamp
