#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dsamp/errors.hpp"
#include "dsamp/frames.hpp"
#include "dsamp/metrics.hpp"
#include "dsamp/predictors.hpp"
#include "dsamp/rng.hpp"

using namespace dsamp;

namespace {

SampleSet make_samples(std::vector<PixelCoord> coords, std::vector<double> values) {
  SampleSet s;
  s.coords = std::move(coords);
  s.values = std::move(values);
  return s;
}

// Brute-force nearest with the same tie rule, written independently of the
// library implementation.
double oracle_nearest(const SampleSet& s, int x, int y, int width) {
  long long best_d = -1;
  std::size_t best_lin = 0;
  double best_v = 0.0;
  for (std::size_t i = 0; i < s.coords.size(); ++i) {
    const long long dx = s.coords[i].x - x;
    const long long dy = s.coords[i].y - y;
    const long long d = dx * dx + dy * dy;
    const std::size_t lin = linear_index(s.coords[i].x, s.coords[i].y, width);
    if (best_d < 0 || d < best_d || (d == best_d && lin < best_lin)) {
      best_d = d;
      best_lin = lin;
      best_v = s.values[i];
    }
  }
  return best_v;
}

// Solves for barycentric weights of p in triangle (a, b, c) by Cramer's rule.
double oracle_barycentric(PixelCoord p, PixelCoord a, PixelCoord b, PixelCoord c, double va,
                          double vb, double vc) {
  const double det = static_cast<double>((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
  const double w1 =
      static_cast<double>((p.x - a.x) * (c.y - a.y) - (c.x - a.x) * (p.y - a.y)) / det;
  const double w2 =
      static_cast<double>((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
  const double w0 = 1.0 - w1 - w2;
  return w0 * va + w1 * vb + w2 * vc;
}

SampleSet random_samples(int width, int height, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint8_t> taken(static_cast<std::size_t>(width) * height, 0);
  SampleSet s;
  while (s.size() < n) {
    const int x = static_cast<int>(rng.bounded(width));
    const int y = static_cast<int>(rng.bounded(height));
    const std::size_t lin = linear_index(x, y, width);
    if (taken[lin]) continue;
    taken[lin] = 1;
    s.coords.push_back({x, y});
    s.values.push_back(rng.range(0.5, 50.0));
  }
  return s;
}

}  // namespace

TEST_CASE("single sample gives a constant raster for every predictor kind") {
  SampleSet s = make_samples({{2, 1}}, {5.0});
  for (PredictorKind kind :
       {PredictorKind::Nearest, PredictorKind::ScatteredLinear, PredictorKind::Idw}) {
    Predictor p{kind};
    DenseDepth out = predict(p, s, 4, 3);
    for (double v : out.data) CHECK(v == 5.0);
  }
}

TEST_CASE("empty, duplicate, and collinear sample sets are rejected") {
  Predictor linear{PredictorKind::ScatteredLinear};
  CHECK_THROWS_AS(predict(linear, SampleSet{}, 4, 4), DataError);
  CHECK_THROWS_AS(predict(linear, make_samples({{0, 0}, {0, 0}}, {1.0, 1.0}), 4, 4), DataError);
  CHECK_THROWS_AS(predict(linear, make_samples({{0, 0}, {1, 1}, {2, 2}}, {1.0, 2.0, 3.0}), 4, 4),
                  DataError);
  CHECK_THROWS_AS(predict(linear, make_samples({{0, 0}, {3, 3}}, {1.0, 2.0}), 4, 4), DataError);
}

TEST_CASE("nearest ties resolve to the lowest linear index") {
  SampleSet s = make_samples({{2, 0}, {0, 0}}, {9.0, 1.0});
  DenseDepth out = predict(Predictor{PredictorKind::Nearest}, s, 3, 1);
  CHECK(out.data[0] == 1.0);
  CHECK(out.data[1] == 1.0);  // equidistant, (0,0) has the lower index
  CHECK(out.data[2] == 9.0);
}

TEST_CASE("nearest matches an independent brute force on random inputs") {
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    SampleSet s = random_samples(13, 9, 17, seed);
    DenseDepth out = predict(Predictor{PredictorKind::Nearest}, s, 13, 9);
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 13; ++x)
        CHECK(out.at(x, y) == oracle_nearest(s, x, y, 13));
  }
}

TEST_CASE("scattered linear reproduces the documented corner configuration") {
  // Corners of an 8x8 frame valued {1, 1, 1, 9}; the cocircular square is
  // split along the (0,7)-(7,0) diagonal by the lexicographic tie rule.
  SampleSet s = make_samples({{0, 0}, {7, 0}, {0, 7}, {7, 7}}, {1.0, 1.0, 1.0, 9.0});
  DenseDepth out = predict(Predictor{PredictorKind::ScatteredLinear}, s, 8, 8);

  const double below = oracle_barycentric({3, 3}, {0, 0}, {0, 7}, {7, 0}, 1.0, 1.0, 1.0);
  const double above = oracle_barycentric({4, 4}, {0, 7}, {7, 0}, {7, 7}, 1.0, 1.0, 9.0);
  CHECK(out.at(3, 3) == doctest::Approx(below).epsilon(1e-9));
  CHECK(out.at(4, 4) == doctest::Approx(above).epsilon(1e-9));
  CHECK(above == doctest::Approx(15.0 / 7.0).epsilon(1e-12));

  for (double v : out.data) {
    CHECK(v >= 1.0);
    CHECK(v <= 9.0);
  }
}

TEST_CASE("scattered linear reproduces planes exactly inside the hull") {
  const int width = 16, height = 12;
  auto plane = [](int x, int y) { return 2.0 + 0.5 * x + 0.25 * y; };

  SUBCASE("corner hull plus random interior sites") {
    SampleSet s = make_samples(
        {{0, 0}, {width - 1, 0}, {0, height - 1}, {width - 1, height - 1}, {5, 3}, {9, 7}, {3, 8}},
        {});
    for (const PixelCoord& c : s.coords) s.values.push_back(plane(c.x, c.y));
    DenseDepth out = predict(Predictor{PredictorKind::ScatteredLinear}, s, width, height);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        CHECK(out.at(x, y) == doctest::Approx(plane(x, y)).epsilon(1e-12));
  }

  SUBCASE("regular grid with many cocircular quads") {
    SampleSet s;
    for (int y = 0; y < height; y += 3)
      for (int x = 0; x < width; x += 3) {
        s.coords.push_back({x, y});
        s.values.push_back(plane(x, y));
      }
    DenseDepth out = predict(Predictor{PredictorKind::ScatteredLinear}, s, width, height);
    for (int y = 0; y <= 9; ++y)
      for (int x = 0; x <= 12; ++x)
        CHECK(out.at(x, y) == doctest::Approx(plane(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("interpolation property: sampled pixels reproduce their measurements") {
  SampleSet s = random_samples(15, 11, 24, 99);
  for (PredictorKind kind :
       {PredictorKind::Nearest, PredictorKind::ScatteredLinear, PredictorKind::Idw}) {
    DenseDepth out = predict(Predictor{kind}, s, 15, 11);
    for (int i = 0; i < s.size(); ++i) {
      const double got = out.at(s.coords[i].x, s.coords[i].y);
      if (kind == PredictorKind::Idw) {
        CHECK(got == doctest::Approx(s.values[i]).epsilon(1e-9));
      } else {
        CHECK(got == s.values[i]);
      }
    }
  }
}

TEST_CASE("predictions stay within the sampled value range") {
  SampleSet s = random_samples(14, 10, 20, 1234);
  const double lo = *std::min_element(s.values.begin(), s.values.end());
  const double hi = *std::max_element(s.values.begin(), s.values.end());
  for (PredictorKind kind :
       {PredictorKind::Nearest, PredictorKind::ScatteredLinear, PredictorKind::Idw}) {
    DenseDepth out = predict(Predictor{kind}, s, 14, 10);
    for (double v : out.data) {
      CHECK(v >= lo - 1e-12);
      CHECK(v <= hi + 1e-12);
    }
  }
}

TEST_CASE("full sampling reconstructs the frame with zero error") {
  Rng rng(5);
  std::vector<float> depths(6 * 5);
  for (auto& v : depths) v = static_cast<float>(rng.range(1.0, 40.0));
  DepthFrame y = DepthFrame::dense(6, 5, std::move(depths));
  SamplePattern all;
  for (int py = 0; py < 5; ++py)
    for (int px = 0; px < 6; ++px) all.coords.push_back({px, py});
  SampleSet s = measure(y, all);
  for (PredictorKind kind :
       {PredictorKind::Nearest, PredictorKind::ScatteredLinear, PredictorKind::Idw}) {
    DenseDepth out = predict(Predictor{kind}, s, 6, 5);
    CHECK(aggregate(y, out, Metric::RMSE, 1e6) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("predictors are insensitive to sample ordering") {
  SampleSet s = random_samples(12, 12, 15, 4242);
  SampleSet rev;
  rev.coords.assign(s.coords.rbegin(), s.coords.rend());
  rev.values.assign(s.values.rbegin(), s.values.rend());
  for (PredictorKind kind :
       {PredictorKind::Nearest, PredictorKind::ScatteredLinear, PredictorKind::Idw}) {
    DenseDepth a = predict(Predictor{kind}, s, 12, 12);
    DenseDepth b = predict(Predictor{kind}, rev, 12, 12);
    CHECK(a.data == b.data);
  }
}

TEST_CASE("measure reads ground truth values and validates the pattern") {
  PixelMask mask = PixelMask::filled(3, 2, true);
  mask.set(2, 1, false);
  DepthFrame y = DepthFrame::with_mask(3, 2, {1.0f, 2.0f, 3.0f, 4.0f, 5.0f, 0.0f}, mask);

  SamplePattern p;
  p.coords = {{1, 0}, {0, 1}};
  SampleSet s = measure(y, p);
  CHECK(s.values == std::vector<double>{2.0, 4.0});

  SamplePattern invalid;
  invalid.coords = {{2, 1}};
  CHECK_THROWS_AS(measure(y, invalid), DataError);
  SamplePattern oob;
  oob.coords = {{3, 0}};
  CHECK_THROWS_AS(measure(y, oob), DataError);
}

TEST_CASE("IDW uses the configured neighborhood") {
  // Two samples, k = 1: each pixel copies its nearest sample, so the result
  // matches the nearest predictor everywhere.
  SampleSet s = make_samples({{0, 0}, {7, 0}}, {2.0, 10.0});
  Predictor idw1{PredictorKind::Idw, 2.0, 1};
  DenseDepth a = predict(idw1, s, 8, 1);
  DenseDepth b = predict(Predictor{PredictorKind::Nearest}, s, 8, 1);
  CHECK(a.data == b.data);

  // With both neighbors the midpoint mixes them by inverse squared distance.
  Predictor idw{PredictorKind::Idw, 2.0, 8};
  DenseDepth c = predict(idw, s, 8, 1);
  const double w0 = 1.0 / 9.0, w1 = 1.0 / 16.0;  // pixel (3,0): d^2 = 9 and 16
  CHECK(c.at(3, 0) == doctest::Approx((w0 * 2.0 + w1 * 10.0) / (w0 + w1)).epsilon(1e-12));
}
