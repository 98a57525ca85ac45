#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dsamp/frames.hpp"
#include "dsamp/predictors.hpp"

namespace dsamp {

// Seed for iteration j (1-based) of the Monte-Carlo loop. Public so tests can
// replay individual iterations.
std::uint64_t qmap_iteration_seed(std::uint64_t rng_seed, int j);

// Expected pointwise reconstruction error under random sampling: averages
// pointwise_q over cfg.mc_iterations random patterns of cfg.budget samples,
// then zeroes pixels beyond cfg.depth_threshold. Accumulation runs in a
// double buffer in iteration order, so results are bit-reproducible.
QMap compute_q(const DepthFrame& y, const GuideImage* guide, const Predictor& predictor,
               const FrameworkConfig& cfg);

// Sources for the importance map used at inference time.
enum class QEstimatorKind {
  Oracle,             // compute_q on ground truth
  FromFile,           // previously stored map
  GradientHeuristic,  // guide-gradient stand-in for a learned estimator
};

struct QEstimator {
  QEstimatorKind kind = QEstimatorKind::GradientHeuristic;
  std::filesystem::path path;  // FromFile only
};

QEstimatorKind qestimator_from_string(const std::string& name);
const char* qestimator_name(QEstimatorKind kind);

// Oracle needs y; GradientHeuristic needs guide; FromFile loads from
// est.path and cross-checks dimensions against y or guide when given.
QMap estimate_qhat(const QEstimator& est, const DepthFrame* y, const GuideImage* guide,
                   const Predictor& predictor, const FrameworkConfig& cfg);

// Mean absolute difference between two maps of equal dimensions.
double map_mad(const QMap& a, const QMap& b);

struct ConvergenceRow {
  int j_low = 0;
  int j_high = 0;
  double mad = 0.0;
};

struct ConvergenceResult {
  std::vector<int> levels;
  std::vector<QMap> maps;             // one per level, shared prefix iterations
  std::vector<ConvergenceRow> table;  // consecutive-level differences
};

// Q at several iteration counts from one run: iterations are shared, each
// requested level snapshots the prefix average. j_list must be strictly
// ascending; cfg.mc_iterations is ignored in favor of j_list.
ConvergenceResult q_convergence(const DepthFrame& y, const GuideImage* guide,
                                const Predictor& predictor, const FrameworkConfig& cfg,
                                const std::vector<int>& j_list);

// CSV with header J_low,J_high,mad.
void write_convergence_csv(const ConvergenceResult& result, const std::filesystem::path& path);

}  // namespace dsamp
