#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dsamp/errors.hpp"
#include "dsamp/frames.hpp"
#include "dsamp/scenes.hpp"

using namespace dsamp;

namespace {

SceneSpec ramp_spec(int width, int height, std::uint64_t seed, int boxes, double lo, double hi,
                    double fraction = 0.0) {
  SceneSpec s;
  s.width = width;
  s.height = height;
  s.seed = seed;
  s.num_boxes = boxes;
  s.depth_min = lo;
  s.depth_max = hi;
  s.background = BackgroundKind::Ramp;
  s.beyond_dt_fraction = fraction;
  return s;
}

// Independent restatement of the edge rule: a pixel is an edge if any of its
// four neighbors differs in depth by more than half a meter.
PixelMask brute_force_edges(const DepthFrame& d) {
  PixelMask m = PixelMask::filled(d.width, d.height, false);
  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || nx[k] >= d.width || ny[k] < 0 || ny[k] >= d.height) continue;
        if (std::abs(d.at(x, y) - d.at(nx[k], ny[k])) > 0.5f) m.set(x, y, true);
      }
    }
  }
  return m;
}

std::vector<double> gradient_magnitudes(const GuideImage& g) {
  std::vector<double> mags(static_cast<std::size_t>(g.width) * g.height);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const double gx = (g.intensity(std::min(x + 1, g.width - 1), y) -
                         g.intensity(std::max(x - 1, 0), y)) /
                        2.0;
      const double gy = (g.intensity(x, std::min(y + 1, g.height - 1)) -
                         g.intensity(x, std::max(y - 1, 0))) /
                        2.0;
      mags[linear_index(x, y, g.width)] = std::sqrt(gx * gx + gy * gy);
    }
  }
  return mags;
}

}  // namespace

TEST_CASE("a constant background with no boxes is flat and edge free") {
  SceneSpec spec = ramp_spec(16, 12, 7, 0, 20.0, 20.0);
  spec.background = BackgroundKind::Constant;
  Scene s = generate_scene(spec, 100.0);
  s.depth.validate();
  s.guide.validate();
  for (float d : s.depth.data) CHECK(d == 20.0f);
  CHECK(s.edges.count() == 0);
  CHECK(s.depth.valid.count() == s.depth.pixel_count());

  Scene again = generate_scene(spec, 100.0);
  CHECK(s.depth.data == again.depth.data);
  CHECK(s.guide.data == again.guide.data);
  CHECK(s.edges.data == again.edges.data);
}

TEST_CASE("scenes differ across seeds") {
  SceneSpec a = ramp_spec(48, 40, 1, 2, 30.0, 42.0);
  SceneSpec b = a;
  b.seed = 2;
  CHECK(generate_scene(a, 100.0).depth.data != generate_scene(b, 100.0).depth.data);
}

TEST_CASE("the edge mask matches a brute-force neighbor check") {
  Scene s = generate_scene(ramp_spec(64, 48, 33, 3, 30.0, 44.0), 100.0);
  CHECK(s.edges.count() > 0);
  CHECK(s.edges.data == brute_force_edges(s.depth).data);
}

TEST_CASE("boxes sit strictly in front of the background") {
  SceneSpec spec = ramp_spec(64, 48, 12, 2, 35.0, 49.0);
  Scene s = generate_scene(spec, 100.0);
  const float nearest = *std::min_element(s.depth.data.begin(), s.depth.data.end());
  CHECK(nearest > 0.0f);
  // Boxes never span a full row, so the most common depth in each row is the
  // background plane; everything else must sit strictly in front of it.
  int covered = 0;
  for (int y = 0; y < 48; ++y) {
    std::map<float, int> counts;
    for (int x = 0; x < 64; ++x) ++counts[s.depth.at(x, y)];
    float bg = 0.0f;
    int best = 0;
    for (const auto& [value, count] : counts) {
      if (count > best) {
        best = count;
        bg = value;
      }
    }
    REQUIRE(best > 32);
    for (int x = 0; x < 64; ++x) {
      if (s.depth.at(x, y) != bg) {
        CHECK(s.depth.at(x, y) < bg - 0.5f);
        ++covered;
      }
    }
  }
  CHECK(covered > 0);  // the twelve boxes actually cover pixels
}

TEST_CASE("the far region hits the requested beyond-threshold fraction") {
  SceneSpec spec = ramp_spec(64, 80, 5, 2, 70.0, 105.0, 0.15);
  Scene s = generate_scene(spec, 100.0);
  std::size_t beyond = 0;
  int deepest_row = -1;
  for (int y = 0; y < 80; ++y) {
    for (int x = 0; x < 64; ++x) {
      if (s.depth.at(x, y) > 100.0f) {
        ++beyond;
        deepest_row = std::max(deepest_row, y);
      }
    }
  }
  const double achieved = static_cast<double>(beyond) / s.depth.pixel_count();
  CHECK(std::abs(achieved - 0.15) <= 0.05);
  CHECK(deepest_row <= 13);  // far pixels stay in the top rows of the ramp
}

TEST_CASE("edge pixels carry top-decile guide gradients") {
  std::vector<Scene> scenes;
  scenes.push_back(generate_scene(ramp_spec(64, 48, 91, 3, 30.0, 44.0), 100.0));
  scenes.push_back(generate_scene(ramp_spec(64, 80, 5, 2, 70.0, 105.0, 0.15), 100.0));
  for (const Scene& s : scenes) {
    std::vector<double> mags = gradient_magnitudes(s.guide);
    std::vector<double> sorted = mags;
    std::sort(sorted.begin(), sorted.end());
    const double p90 = sorted[static_cast<std::size_t>(0.9 * (sorted.size() - 1))];
    REQUIRE(s.edges.count() > 0);
    for (int y = 0; y < s.depth.height; ++y)
      for (int x = 0; x < s.depth.width; ++x)
        if (s.edges.at(x, y)) CHECK(mags[linear_index(x, y, s.depth.width)] > p90);
  }
}

TEST_CASE("unrealizable specs are rejected") {
  // Ramp steep enough to mark every row as an edge.
  CHECK_THROWS_AS(generate_scene(ramp_spec(20, 40, 1, 0, 10.0, 10.0 + 0.5 * 39), 100.0),
                  DataError);
  // Too shallow for a half-meter step at box contours.
  CHECK_THROWS_AS(generate_scene(ramp_spec(20, 20, 1, 1, 1.0, 1.2), 100.0), DataError);
  // Slope drowns the box contrast in background shading.
  CHECK_THROWS_AS(generate_scene(ramp_spec(20, 40, 1, 1, 10.0, 10.0 + 0.3 * 39), 100.0),
                  DataError);
  // More boxes than the frame can hold.
  CHECK_THROWS_AS(generate_scene(ramp_spec(16, 16, 1, 20, 30.0, 30.75), 100.0), DataError);
  // Constant background cannot produce far pixels.
  SceneSpec constant = ramp_spec(16, 16, 1, 0, 50.0, 50.0, 0.5);
  constant.background = BackgroundKind::Constant;
  CHECK_THROWS_AS(generate_scene(constant, 100.0), DataError);

  CHECK_THROWS_AS(ramp_spec(2, 16, 1, 0, 10.0, 20.0).validate(), DataError);
  CHECK_THROWS_AS(ramp_spec(16, 16, 1, 0, -1.0, 20.0).validate(), DataError);
  CHECK_THROWS_AS(ramp_spec(16, 16, 1, 0, 20.0, 10.0).validate(), DataError);
  CHECK_THROWS_AS(ramp_spec(16, 16, 1, 0, 10.0, 20.0, 1.0).validate(), DataError);
}

TEST_CASE("suites are deterministic and tagged into splits") {
  std::vector<SuiteEntry> a = generate_suite(8, 99, 100.0);
  std::vector<SuiteEntry> b = generate_suite(8, 99, 100.0);
  REQUIRE(a.size() == 8);
  std::set<std::string> names;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].scene.depth.data == b[i].scene.depth.data);
    CHECK(a[i].scene.guide.data == b[i].scene.guide.data);
    names.insert(a[i].name);
    CHECK(a[i].test_split == (i % 4 == 3));
  }
  CHECK(names.size() == 8);
  CHECK(generate_suite(1, 4, 100.0).size() == 1);
}

TEST_CASE("a twenty-scene suite covers most of the declared depth range") {
  std::vector<SuiteEntry> suite = generate_suite(20, 2024, 100.0);
  double lo = 1e300, hi = -1e300;
  for (const SuiteEntry& e : suite) {
    lo = std::min(lo, e.spec.depth_min);
    hi = std::max(hi, e.spec.depth_max);
  }
  const int bins = 50;
  std::vector<bool> hit(bins, false);
  for (const SuiteEntry& e : suite) {
    for (float d : e.scene.depth.data) {
      if (d < lo || d > hi) continue;
      const int b = std::min(bins - 1, static_cast<int>((d - lo) / (hi - lo) * bins));
      hit[b] = true;
    }
  }
  const int covered = static_cast<int>(std::count(hit.begin(), hit.end(), true));
  CHECK(covered >= 40);
}
