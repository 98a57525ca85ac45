#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dsamp/frames.hpp"

namespace dsamp {

// Suppression kernel and its square footprint. The footprint half-width is
// ceil(2.5 * sigma), so the full window spans about 5 sigma on each axis.
struct KernelParams {
  double sigma = 1.0;
  int support = 3;

  static KernelParams from_sigma(double sigma);
};

// Complement of a Gaussian: 1 - exp(-(dx^2 + dy^2) / (2 sigma^2)).
// Zero at the center, approaches 1 away from it.
double kernel_value(double sigma, int dx, int dy);

// Default kernel width: half the mean inter-sample spacing of a uniform
// layout with the given budget.
double default_sigma(int width, int height, int importance_budget);

// Optional instrumentation for gaussian_sampling: snapshots of the internal
// priority raster taken right after each selection.
struct GreedyTrace {
  bool record_maps = false;
  std::vector<std::vector<double>> maps_after;
};

// Greedy importance sampling: repeatedly take the argmax of the priority map
// (ties break to the lowest linear index) and attenuate the map around the
// pick by kernel_value. Pixels listed in `exclude` are never selected.
SamplePattern gaussian_sampling(const QMap& qhat, const PixelMask* valid, int importance_budget,
                                const KernelParams& params,
                                const SamplePattern* exclude = nullptr,
                                GreedyTrace* trace = nullptr);

// round(grid_fraction * budget) evenly spaced samples first, then greedy
// importance samples for the rest. The priority map is zeroed at grid sites.
SamplePattern blend_with_grid(const QMap& qhat, const PixelMask* valid, int budget,
                              double grid_fraction, std::optional<double> sigma);

// Uniform sampling without replacement over the valid pixels.
SamplePattern random_pattern(int width, int height, const PixelMask* valid, int budget,
                             std::uint64_t seed);

// Centers of an r x c lattice of equal cells, r = round(sqrt(B*h/w)),
// c = ceil(B/r), truncated to B in row-major order. Centers on invalid
// pixels snap to the nearest free valid pixel (ties to the lowest index).
SamplePattern grid_pattern(int width, int height, const PixelMask* valid, int budget);

struct SlicParams {
  double compactness = 10.0;
  int iterations = 10;
};

// SLIC superpixels on (compactness-scaled intensity, x, y), seeded on the
// grid_pattern lattice; returns each cluster's rounded center of mass,
// snapped to free valid pixels, grid-backfilled if clusters emptied out.
SamplePattern superpixel_pattern(const GuideImage& guide, const PixelMask* valid, int budget,
                                 const SlicParams& params = {});

}  // namespace dsamp
