#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsamp/frames.hpp"
#include "dsamp/metrics.hpp"
#include "dsamp/predictors.hpp"
#include "dsamp/qmap.hpp"
#include "dsamp/scenes.hpp"

namespace dsamp {

// Sampling strategies compared by the evaluation harness.
enum class PatternFamily { Random, Grid, SuperPixel, Importance, ImportanceOracle };

const char* family_name(PatternFamily family);

// Number of random repetitions evaluated per frame.
inline constexpr int kRandomRepeats = 10;

// Default budget when none is given: 1% of the pixel count, at least 1.
int default_budget(int width, int height);

// One reconstruction outcome: a frame evaluated with one sampling pattern.
struct EvalRecord {
  std::string frame;
  PatternFamily family = PatternFamily::Random;
  int random_index = 0;  // 1-based repetition index, 0 for non-random families
  Metric metric = Metric::RMSE;
  double error = 0.0;
  std::uint64_t pattern_seed = 0;  // seed that reproduces the pattern
  FrameworkConfig cfg;             // resolved config the record was produced with
  double seconds = 0.0;
};

struct SummaryRow {
  PatternFamily family = PatternFamily::Random;
  Metric metric = Metric::RMSE;
  double mean_error = 0.0;
  int count = 0;
};

struct SuiteResult {
  std::vector<EvalRecord> records;
  std::vector<SummaryRow> summary;
};

// Evaluates every pattern family on one frame: kRandomRepeats random patterns
// (seeds derived from frame_seed), then grid, superpixel, and importance
// patterns, plus an oracle-importance run when with_oracle is set. cfg.budget
// must already be resolved to a positive count.
std::vector<EvalRecord> evaluate_frame(const std::string& frame_id, const DepthFrame& y,
                                       const GuideImage* guide, const Predictor& predictor,
                                       const FrameworkConfig& cfg, const QEstimator& estimator,
                                       bool with_oracle, std::uint64_t frame_seed);

// Runs evaluate_frame over a whole suite, optionally across worker threads.
// Frames are processed in any order but records are merged in suite order.
// cfg.budget == 0 selects the per-frame default budget.
SuiteResult evaluate_suite(const std::vector<SuiteEntry>& suite, const Predictor& predictor,
                           const FrameworkConfig& cfg, const QEstimator& estimator,
                           bool with_oracle, int workers);

// Per-family means over a record list, in fixed family order.
std::vector<SummaryRow> summarize(const std::vector<EvalRecord>& records);

// CSV with one row per record: frame,family,metric,error,seed.
void write_records_csv(const std::vector<EvalRecord>& records, const std::string& path);

// CSV with one row per family: family,metric,mean_error,count.
void write_summary_csv(const std::vector<SummaryRow>& summary, const std::string& path);

}  // namespace dsamp
