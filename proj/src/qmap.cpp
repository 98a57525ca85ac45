#include "dsamp/qmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "dsamp/errors.hpp"
#include "dsamp/metrics.hpp"
#include "dsamp/patterns.hpp"
#include "dsamp/rng.hpp"

namespace dsamp {

namespace {

// Stream tag separating Monte-Carlo iteration seeds from every other
// consumer of the root seed.
constexpr std::uint64_t kIterationStream = 0x514d6974;

void check_guide(const GuideImage* guide, int width, int height) {
  if (!guide) return;
  guide->validate();
  if (guide->width != width || guide->height != height)
    throw DataError("guide dimensions do not match the depth frame");
}

}  // namespace

std::uint64_t qmap_iteration_seed(std::uint64_t rng_seed, int j) {
  return derive_seed(rng_seed, kIterationStream, static_cast<std::uint64_t>(j));
}

QMap compute_q(const DepthFrame& y, const GuideImage* guide, const Predictor& predictor,
               const FrameworkConfig& cfg) {
  y.validate();
  cfg.validate();
  check_guide(guide, y.width, y.height);
  if (y.valid.count() < static_cast<std::size_t>(cfg.budget))
    throw DataError("budget exceeds the valid pixel count");

  const std::size_t total = y.pixel_count();
  std::vector<double> acc(total, 0.0);
  for (int j = 1; j <= cfg.mc_iterations; ++j) {
    try {
      SamplePattern pattern = random_pattern(y.width, y.height, &y.valid, cfg.budget,
                                             qmap_iteration_seed(cfg.rng_seed, j));
      SampleSet samples = measure(y, pattern);
      DenseDepth yhat = predict(predictor, samples, y.width, y.height, guide);
      QMap q = pointwise_q(y, yhat, cfg.metric, cfg.depth_threshold);
      for (std::size_t i = 0; i < total; ++i) acc[i] += q.data[i];
    } catch (const DataError& e) {
      throw DataError(std::string(e.what()) + " (iteration " + std::to_string(j) + ")");
    } catch (const InternalError& e) {
      throw InternalError(std::string(e.what()) + " (iteration " + std::to_string(j) + ")");
    }
  }

  // Mask first, then divide, matching the reference procedure's step order.
  for (std::size_t i = 0; i < total; ++i) {
    if (y.data[i] > cfg.depth_threshold || !y.valid.data[i]) acc[i] = 0.0;
  }
  QMap out = QMap::zeros(y.width, y.height);
  for (std::size_t i = 0; i < total; ++i)
    out.data[i] = static_cast<float>(acc[i] / cfg.mc_iterations);
  return out;
}

QEstimatorKind qestimator_from_string(const std::string& name) {
  if (name == "oracle") return QEstimatorKind::Oracle;
  if (name == "from-file") return QEstimatorKind::FromFile;
  if (name == "gradient") return QEstimatorKind::GradientHeuristic;
  throw DataError("unknown importance estimator: " + name);
}

const char* qestimator_name(QEstimatorKind kind) {
  switch (kind) {
    case QEstimatorKind::Oracle: return "oracle";
    case QEstimatorKind::FromFile: return "from-file";
    case QEstimatorKind::GradientHeuristic: return "gradient";
  }
  throw InternalError("unhandled estimator kind");
}

namespace {

QMap gradient_heuristic(const GuideImage& guide) {
  const int width = guide.width, height = guide.height;
  std::vector<double> mag(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double gx = (guide.intensity(std::min(x + 1, width - 1), y) -
                         guide.intensity(std::max(x - 1, 0), y)) /
                        2.0;
      const double gy = (guide.intensity(x, std::min(y + 1, height - 1)) -
                         guide.intensity(x, std::max(y - 1, 0))) /
                        2.0;
      mag[linear_index(x, y, width)] = std::sqrt(gx * gx + gy * gy);
    }
  }

  // Radius-2 box blur, renormalized at the borders. The flat plateau it
  // spreads around a contour is deliberate: the greedy sampler then lands
  // picks on both sides of the contour instead of pinning one ridge line.
  std::vector<double> blurred(mag.size());
  double peak = 0.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double sum = 0.0;
      int count = 0;
      for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
          const int px = x + dx, py = y + dy;
          if (px < 0 || px >= width || py < 0 || py >= height) continue;
          sum += mag[linear_index(px, py, width)];
          ++count;
        }
      }
      const double v = sum / count;
      blurred[linear_index(x, y, width)] = v;
      peak = std::max(peak, v);
    }
  }

  QMap out = QMap::zeros(width, height);
  for (std::size_t i = 0; i < blurred.size(); ++i)
    out.data[i] = static_cast<float>(peak > 0.0 ? blurred[i] / peak : 0.0);
  return out;
}

}  // namespace

QMap estimate_qhat(const QEstimator& est, const DepthFrame* y, const GuideImage* guide,
                   const Predictor& predictor, const FrameworkConfig& cfg) {
  switch (est.kind) {
    case QEstimatorKind::Oracle:
      if (!y) throw DataError("oracle importance estimation needs a depth frame");
      return compute_q(*y, guide, predictor, cfg);
    case QEstimatorKind::FromFile: {
      if (est.path.empty()) throw DataError("importance-from-file needs a map path");
      QMap q = load_qmap(est.path);
      const int want_w = y ? y->width : (guide ? guide->width : q.width);
      const int want_h = y ? y->height : (guide ? guide->height : q.height);
      if (q.width != want_w || q.height != want_h)
        throw DataError("stored importance map dimensions do not match the frame");
      return q;
    }
    case QEstimatorKind::GradientHeuristic:
      if (!guide) throw DataError("gradient importance estimation needs a guide image");
      return gradient_heuristic(*guide);
  }
  throw InternalError("unhandled estimator kind");
}

double map_mad(const QMap& a, const QMap& b) {
  if (a.width != b.width || a.height != b.height)
    throw DataError("importance map dimensions differ");
  if (a.data.empty()) throw DataError("importance maps are empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    sum += std::abs(static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]));
  return sum / static_cast<double>(a.data.size());
}

ConvergenceResult q_convergence(const DepthFrame& y, const GuideImage* guide,
                                const Predictor& predictor, const FrameworkConfig& cfg,
                                const std::vector<int>& j_list) {
  y.validate();
  cfg.validate();
  check_guide(guide, y.width, y.height);
  if (j_list.empty()) throw DataError("iteration list is empty");
  for (std::size_t i = 0; i < j_list.size(); ++i) {
    if (j_list[i] < 1) throw DataError("iteration counts must be positive");
    if (i > 0 && j_list[i] <= j_list[i - 1])
      throw DataError("iteration list must be strictly ascending");
  }
  if (y.valid.count() < static_cast<std::size_t>(cfg.budget))
    throw DataError("budget exceeds the valid pixel count");

  const std::size_t total = y.pixel_count();
  std::vector<double> acc(total, 0.0);
  ConvergenceResult result;
  result.levels = j_list;

  std::size_t next = 0;
  for (int j = 1; j <= j_list.back(); ++j) {
    try {
      SamplePattern pattern = random_pattern(y.width, y.height, &y.valid, cfg.budget,
                                             qmap_iteration_seed(cfg.rng_seed, j));
      SampleSet samples = measure(y, pattern);
      DenseDepth yhat = predict(predictor, samples, y.width, y.height, guide);
      QMap q = pointwise_q(y, yhat, cfg.metric, cfg.depth_threshold);
      for (std::size_t i = 0; i < total; ++i) acc[i] += q.data[i];
    } catch (const DataError& e) {
      throw DataError(std::string(e.what()) + " (iteration " + std::to_string(j) + ")");
    } catch (const InternalError& e) {
      throw InternalError(std::string(e.what()) + " (iteration " + std::to_string(j) + ")");
    }

    if (next < j_list.size() && j == j_list[next]) {
      QMap snap = QMap::zeros(y.width, y.height);
      for (std::size_t i = 0; i < total; ++i) {
        double v = acc[i];
        if (y.data[i] > cfg.depth_threshold || !y.valid.data[i]) v = 0.0;
        snap.data[i] = static_cast<float>(v / j);
      }
      result.maps.push_back(std::move(snap));
      ++next;
    }
  }

  for (std::size_t i = 1; i < result.maps.size(); ++i) {
    result.table.push_back({result.levels[i - 1], result.levels[i],
                            map_mad(result.maps[i - 1], result.maps[i])});
  }
  return result;
}

void write_convergence_csv(const ConvergenceResult& result, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw DataError("cannot open for writing: " + path.string());
  std::string body = "J_low,J_high,mad\n";
  char row[96];
  for (const ConvergenceRow& r : result.table) {
    std::snprintf(row, sizeof(row), "%d,%d,%.12g\n", r.j_low, r.j_high, r.mad);
    body += row;
  }
  const std::size_t written = std::fwrite(body.data(), 1, body.size(), f);
  const bool ok = written == body.size() && std::fclose(f) == 0;
  if (!ok) throw DataError("failed writing: " + path.string());
}

}  // namespace dsamp
