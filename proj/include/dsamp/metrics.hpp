#pragma once

#include "dsamp/frames.hpp"

namespace dsamp {

// Per-pixel error contribution of a reconstruction against ground truth.
// A pixel is evaluated when it is valid and its true depth does not exceed
// the threshold; everywhere else the entry is exactly zero.
//
//   RMSE: q = (y - yhat)^2
//   REL:  q = |y - yhat| / y
//   MAD:  q = |y - yhat|
QMap pointwise_q(const DepthFrame& y, const DenseDepth& yhat, Metric metric,
                 double depth_threshold);

// Scalar error over the evaluated pixels only: sqrt(mean q) for RMSE,
// mean q for REL and MAD. An empty evaluation domain is an error, never a
// silent zero.
double aggregate(const DepthFrame& y, const DenseDepth& yhat, Metric metric,
                 double depth_threshold);

}  // namespace dsamp
