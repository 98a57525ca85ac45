#include "dsamp/metrics.hpp"

#include <cmath>
#include <string>

#include "dsamp/errors.hpp"

namespace dsamp {

namespace {

void check_shapes(const DepthFrame& y, const DenseDepth& yhat) {
  if (y.width != yhat.width || y.height != yhat.height ||
      yhat.data.size() != y.pixel_count())
    throw DataError("prediction dimensions " + std::to_string(yhat.width) + "x" +
                    std::to_string(yhat.height) + " do not match frame " +
                    std::to_string(y.width) + "x" + std::to_string(y.height));
}

double q_value(double truth, double pred, Metric metric) {
  const double e = truth - pred;
  switch (metric) {
    case Metric::RMSE: return e * e;
    case Metric::REL: return std::abs(e) / truth;
    case Metric::MAD: return std::abs(e);
  }
  throw InternalError("unhandled metric enum value");
}

}  // namespace

QMap pointwise_q(const DepthFrame& y, const DenseDepth& yhat, Metric metric,
                 double depth_threshold) {
  check_shapes(y, yhat);
  if (!(depth_threshold > 0)) throw DataError("depth threshold must be positive");
  QMap q = QMap::zeros(y.width, y.height);
  for (std::size_t i = 0; i < y.data.size(); ++i) {
    if (!y.valid.data[i]) continue;
    const double truth = y.data[i];
    if (truth > depth_threshold) continue;
    const double pred = yhat.data[i];
    if (!std::isfinite(pred))
      throw DataError("non-finite prediction at evaluated pixel " + std::to_string(i));
    q.data[i] = static_cast<float>(q_value(truth, pred, metric));
  }
  return q;
}

double aggregate(const DepthFrame& y, const DenseDepth& yhat, Metric metric,
                 double depth_threshold) {
  check_shapes(y, yhat);
  if (!(depth_threshold > 0)) throw DataError("depth threshold must be positive");
  double sum = 0.0;
  std::size_t evaluated = 0;
  for (std::size_t i = 0; i < y.data.size(); ++i) {
    if (!y.valid.data[i]) continue;
    const double truth = y.data[i];
    if (truth > depth_threshold) continue;
    const double pred = yhat.data[i];
    if (!std::isfinite(pred))
      throw DataError("non-finite prediction at evaluated pixel " + std::to_string(i));
    sum += q_value(truth, pred, metric);
    ++evaluated;
  }
  if (evaluated == 0)
    throw DataError("no evaluated pixels: every pixel is invalid or beyond the depth threshold");
  const double mean = sum / static_cast<double>(evaluated);
  return metric == Metric::RMSE ? std::sqrt(mean) : mean;
}

}  // namespace dsamp
