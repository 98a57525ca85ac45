#include "dsamp/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "dsamp/errors.hpp"
#include "dsamp/rng.hpp"

namespace dsamp {

namespace {

constexpr std::uint64_t kSuiteStream = 0x53434e53;
constexpr double kEdgeJump = 0.5;       // depth step that counts as an edge, meters
constexpr double kMaxRampStep = 0.45;   // per-row slope that stays below kEdgeJump
constexpr double kTextureAmp = 0.05;

struct Box {
  int x0, y0, x1, y1;  // inclusive bounds
  double base, sx, sy; // depth plane: base + sx*(x-cx) + sy*(y-cy)
  double cx, cy;
  double albedo;
};

bool overlaps_with_gap(const Box& a, int x0, int y0, int x1, int y1, int gap) {
  return x0 <= a.x1 + gap && x1 >= a.x0 - gap && y0 <= a.y1 + gap && y1 >= a.y0 - gap;
}

}  // namespace

void SceneSpec::validate() const {
  if (width < 4 || height < 4) throw DataError("scene dimensions must be at least 4x4");
  if (!(depth_min > 0.0) || !std::isfinite(depth_min) || !std::isfinite(depth_max) ||
      depth_max < depth_min)
    throw DataError("scene depth range must be positive and ordered");
  if (num_boxes < 0) throw DataError("box count must be nonnegative");
  if (!(beyond_dt_fraction >= 0.0) || beyond_dt_fraction >= 1.0)
    throw DataError("beyond-threshold fraction must lie in [0, 1)");
}

Scene generate_scene(const SceneSpec& spec, double depth_threshold) {
  spec.validate();
  if (!(depth_threshold > 0.0) || !std::isfinite(depth_threshold))
    throw DataError("depth threshold must be positive");

  const int w = spec.width, h = spec.height;
  const bool ramp = spec.background == BackgroundKind::Ramp;
  const double step = ramp ? (spec.depth_max - spec.depth_min) / (h - 1) : 0.0;
  const double bg_top = ramp ? spec.depth_max : (spec.depth_min + spec.depth_max) / 2.0;
  const double bg_min = ramp ? spec.depth_min : bg_top;
  auto background_at = [&](int y) { return bg_top - step * y; };

  if (step > kMaxRampStep + 1e-12)
    throw DataError("background slope exceeds 0.45 m per row and would blanket the edge mask");
  if (spec.num_boxes > 0 && step > 0.013 * bg_min)
    throw DataError("background slope too steep for box contours to dominate the guide");

  Rng rng(spec.seed);
  // Boxes are painted brighter than the background so every depth contour
  // stays prominent in the guide even where the depth step itself is small.
  const double bg_albedo = rng.range(0.3, 0.6);
  const double lam_x = rng.range(11.0, 15.0);
  const double lam_y = rng.range(11.0, 15.0);
  const double two_pi = 8.0 * std::atan(1.0);
  const double phase_x = rng.range(0.0, two_pi);
  const double phase_y = rng.range(0.0, two_pi);

  // Boxes live below the row where the background crosses the threshold so
  // they cannot disturb the beyond-threshold pixel count.
  int row_lo = 0;
  if (ramp && bg_top > depth_threshold)
    row_lo = static_cast<int>(std::ceil((bg_top - depth_threshold) / step));

  std::vector<Box> boxes;
  for (int k = 0; k < spec.num_boxes; ++k) {
    // Obstacles are small relative to the frame, so a uniform pattern
    // under-resolves them, but larger than the sampler's suppression radius,
    // so adaptive patterns can anchor their interiors as well as their rims.
    const int bw = rng.range_int(std::max(3, w / 13), std::max(3, w / 9));
    const int bh = rng.range_int(std::max(3, h / 11), std::max(3, h / 8));

    Box b;
    b.albedo = rng.range(0.85, 1.0);
    // Contour height in meters. Kept comparable to the background's own
    // depth variation so no single discontinuity monopolizes the error
    // budget and starves the rest of the frame of samples.
    double jump = rng.range(1.1, 1.7);
    double tilt = 0.4;

    // When the ramp runs deep enough past the threshold, the last box becomes
    // a distant obstacle: visually as sharp as any other contour, but wholly
    // beyond the evaluation cutoff. Scenes need such objects so that samplers
    // which equate visual saliency with reconstruction value pay for it.
    int y_first = row_lo + 1, y_last = h - 2;
    if (ramp && k == spec.num_boxes - 1 && spec.num_boxes > 1) {
      const double far_jump = rng.range(2.5, 4.0);
      const double need = depth_threshold + far_jump + 2.0;
      if (bg_top >= need) {
        const int y1_max = static_cast<int>(std::floor((bg_top - need) / step));
        if (y1_max - 1 >= bh) {
          jump = far_jump;
          tilt = 0.4;
          y_first = 1;
          y_last = y1_max;
        }
      }
    }
    if (bw > w - 2 || y_last - y_first + 1 < bh)
      throw DataError("boxes cannot fit into the scene");

    bool placed = false;
    for (int attempt = 0; attempt < 300 && !placed; ++attempt) {
      const int x0 = rng.range_int(1, w - 1 - bw);
      const int y0 = rng.range_int(y_first, y_last - bh + 1);
      const int x1 = x0 + bw - 1, y1 = y0 + bh - 1;
      bool clear = true;
      for (const Box& other : boxes) {
        if (overlaps_with_gap(other, x0, y0, x1, y1, 2)) {
          clear = false;
          break;
        }
      }
      if (!clear) continue;
      b.x0 = x0;
      b.y0 = y0;
      b.x1 = x1;
      b.y1 = y1;
      b.cx = (x0 + x1) / 2.0;
      b.cy = (y0 + y1) / 2.0;
      // Anchor the plane so that even its deepest corner sits a full jump in
      // front of the shallowest background row the box covers (row y1).
      b.base = background_at(y1) - jump;
      const double sx_max = std::min(0.4, tilt / bw);
      const double sy_max = std::min(0.4, tilt / bh);
      b.sx = rng.range(-sx_max, sx_max);
      b.sy = rng.range(-sy_max, sy_max);
      if (b.base - 0.75 < kEdgeJump)
        throw DataError("depth range too shallow to give box contours a clear depth step");
      boxes.push_back(b);
      placed = true;
    }
    if (!placed) throw DataError("boxes cannot fit into the scene");
  }

  const std::size_t total = static_cast<std::size_t>(w) * h;
  std::vector<double> depth(total);
  std::vector<int> region(total, -1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) depth[linear_index(x, y, w)] = background_at(y);
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    const Box& b = boxes[k];
    for (int y = b.y0; y <= b.y1; ++y) {
      for (int x = b.x0; x <= b.x1; ++x) {
        depth[linear_index(x, y, w)] = b.base + b.sx * (x - b.cx) + b.sy * (y - b.cy);
        region[linear_index(x, y, w)] = static_cast<int>(k);
      }
    }
  }

  std::vector<float> depth_f(total);
  for (std::size_t i = 0; i < total; ++i) depth_f[i] = static_cast<float>(depth[i]);

  std::size_t beyond = 0;
  for (float d : depth_f)
    if (d > depth_threshold) ++beyond;
  const double achieved = static_cast<double>(beyond) / static_cast<double>(total);
  if (std::abs(achieved - spec.beyond_dt_fraction) > 0.05)
    throw DataError("scene cannot hit the requested beyond-threshold fraction");

  const double d_min = *std::min_element(depth.begin(), depth.end());
  const double d_max = *std::max_element(depth.begin(), depth.end());
  const double inv_span = 1.0 / d_min - 1.0 / d_max;
  auto normalized_inverse = [&](double d) {
    return inv_span > 0.0 ? (1.0 / d - 1.0 / d_max) / inv_span : 0.5;
  };

  std::vector<float> guide(total);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = linear_index(x, y, w);
      const double albedo = region[i] < 0 ? bg_albedo : boxes[region[i]].albedo;
      const double texture = kTextureAmp * std::sin(two_pi * x / lam_x + phase_x) *
                             std::sin(two_pi * y / lam_y + phase_y);
      guide[i] = static_cast<float>(
          std::clamp(albedo * normalized_inverse(depth[i]) + texture, 0.0, 1.0));
    }
  }

  PixelMask edges = PixelMask::filled(w, h, false);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float d = depth_f[linear_index(x, y, w)];
      if (x + 1 < w && std::abs(d - depth_f[linear_index(x + 1, y, w)]) > kEdgeJump) {
        edges.set(x, y, true);
        edges.set(x + 1, y, true);
      }
      if (y + 1 < h && std::abs(d - depth_f[linear_index(x, y + 1, w)]) > kEdgeJump) {
        edges.set(x, y, true);
        edges.set(x, y + 1, true);
      }
    }
  }

  Scene scene;
  scene.depth = DepthFrame::dense(w, h, std::move(depth_f));
  scene.guide = GuideImage::gray(w, h, std::move(guide));
  scene.edges = std::move(edges);
  return scene;
}

std::vector<SuiteEntry> generate_suite(int count, std::uint64_t base_seed,
                                       double depth_threshold) {
  if (count < 1) throw DataError("suite size must be at least 1");

  std::vector<SuiteEntry> suite;
  suite.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(base_seed, kSuiteStream, static_cast<std::uint64_t>(i)));
    SceneSpec spec;
    spec.width = 128;
    spec.height = 96;
    spec.seed = rng.next();
    spec.background = BackgroundKind::Ramp;

    const bool has_far_region = i % 2 == 1;
    // Scenes with a deep far region also carry a distant obstacle there.
    spec.num_boxes = has_far_region ? 2 : 1;
    if (has_far_region) {
      spec.beyond_dt_fraction = 0.30;
      const double step = rng.range(0.38, kMaxRampStep);
      spec.depth_min = depth_threshold -
                       step * (spec.height * (1.0 - spec.beyond_dt_fraction) - 1.0);
      spec.depth_max = spec.depth_min + step * (spec.height - 1);
    } else {
      spec.beyond_dt_fraction = 0.0;
      spec.depth_min = rng.range(30.0, 45.0);
      const double step = rng.range(0.25, std::min(0.40, 0.012 * spec.depth_min));
      spec.depth_max = spec.depth_min + step * (spec.height - 1);
    }

    SuiteEntry entry;
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%03d", i);
    entry.name = name;
    entry.spec = spec;
    entry.test_split = i % 4 == 3;
    entry.scene = generate_scene(spec, depth_threshold);
    suite.push_back(std::move(entry));
  }
  return suite;
}

}  // namespace dsamp
