#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsamp/frames.hpp"

namespace dsamp {

enum class BackgroundKind { Ramp, Constant };

// Recipe for one synthetic scene: a planar background (constant depth, or a
// ramp rising row by row from depth_min at the bottom to depth_max at the
// top) occluded by tilted rectangular boxes much nearer than the background.
struct SceneSpec {
  int width = 0;
  int height = 0;
  std::uint64_t seed = 0;
  int num_boxes = 0;
  double depth_min = 0.0;
  double depth_max = 0.0;
  BackgroundKind background = BackgroundKind::Ramp;
  double beyond_dt_fraction = 0.0;

  void validate() const;
};

struct Scene {
  DepthFrame depth;
  GuideImage guide;
  PixelMask edges;  // pixels with a 4-neighbor depth jump above 0.5 m
};

// Deterministic in spec.seed. Throws DataError when the spec cannot be
// realized: background slope above 0.45 m per row (would blanket the edge
// mask), slope or depth scale leaving box contours without guide contrast,
// boxes that do not fit, or a beyond-threshold pixel fraction more than
// 0.05 away from the requested one.
Scene generate_scene(const SceneSpec& spec, double depth_threshold);

struct SuiteEntry {
  std::string name;
  SceneSpec spec;
  Scene scene;
  bool test_split = false;
};

// `count` scenes at 128x96 with varied box counts, depth ranges, and
// beyond-threshold fractions, all derived from base_seed; every fourth scene
// is tagged as the test split.
std::vector<SuiteEntry> generate_suite(int count, std::uint64_t base_seed,
                                       double depth_threshold);

}  // namespace dsamp
