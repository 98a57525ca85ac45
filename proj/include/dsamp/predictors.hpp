#pragma once

#include <string>
#include <vector>

#include "dsamp/frames.hpp"

namespace dsamp {

enum class PredictorKind {
  // Each pixel copies the depth of its Euclidean-nearest sample; distance
  // ties go to the sample with the lowest linear index.
  Nearest,
  // Barycentric interpolation on a Delaunay triangulation of the sample
  // sites; pixels outside the convex hull take the nearest sample's value.
  // Cocircular configurations are resolved by lexicographic site order.
  ScatteredLinear,
  // Inverse-distance weighting over the k nearest samples.
  Idw,
};

PredictorKind predictor_from_string(const std::string& name);
const char* predictor_name(PredictorKind kind);

struct Predictor {
  PredictorKind kind = PredictorKind::Nearest;
  double idw_power = 2.0;
  int idw_neighbors = 8;
};

// A pattern together with the depths measured at its coordinates.
struct SampleSet {
  std::vector<PixelCoord> coords;
  std::vector<double> values;

  int size() const { return static_cast<int>(coords.size()); }
};

// Reads ground truth at the pattern's pixels. The pattern must be distinct,
// in bounds, and on valid pixels.
SampleSet measure(const DepthFrame& y, const SamplePattern& pattern);

// Dense reconstruction over the full raster. The guide is accepted for
// interface parity but not consulted by any of the current kinds.
DenseDepth predict(const Predictor& predictor, const SampleSet& samples, int width, int height,
                   const GuideImage* guide = nullptr);

}  // namespace dsamp
