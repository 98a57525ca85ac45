#include <doctest.h>

#include <cmath>
#include <vector>

#include "dsamp/errors.hpp"
#include "dsamp/frames.hpp"
#include "dsamp/metrics.hpp"
#include "dsamp/rng.hpp"

using namespace dsamp;

namespace {

DenseDepth raster(int width, int height, std::vector<double> values) {
  DenseDepth d = DenseDepth::zeros(width, height);
  d.data = std::move(values);
  return d;
}

DepthFrame random_frame(int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> depths(static_cast<std::size_t>(width) * height);
  for (auto& v : depths) v = static_cast<float>(rng.range(0.5, 90.0));
  return DepthFrame::dense(width, height, std::move(depths));
}

DenseDepth random_prediction(const DepthFrame& y, std::uint64_t seed) {
  Rng rng(seed);
  DenseDepth d = DenseDepth::zeros(y.width, y.height);
  for (std::size_t i = 0; i < d.data.size(); ++i)
    d.data[i] = y.data[i] + rng.range(-3.0, 3.0);
  return d;
}

}  // namespace

TEST_CASE("REL pointwise example") {
  DepthFrame y = DepthFrame::dense(1, 1, {2.0f});
  QMap q = pointwise_q(y, raster(1, 1, {3.0}), Metric::REL, 100.0);
  CHECK(q.data[0] == 0.5f);
}

TEST_CASE("pixels beyond the threshold or invalid contribute zero and are excluded") {
  PixelMask mask = PixelMask::filled(3, 1, true);
  mask.set(2, 0, false);
  DepthFrame y = DepthFrame::with_mask(3, 1, {10.0f, 150.0f, 7.0f}, mask);
  DenseDepth yhat = raster(3, 1, {12.0, 0.0, 123.0});

  QMap q = pointwise_q(y, yhat, Metric::MAD, 100.0);
  CHECK(q.data[0] == 2.0f);
  CHECK(q.data[1] == 0.0f);
  CHECK(q.data[2] == 0.0f);

  // Only the first pixel enters the mean.
  CHECK(aggregate(y, yhat, Metric::MAD, 100.0) == doctest::Approx(2.0));

  // A bogus prediction at an excluded pixel is tolerated...
  yhat.data[1] = std::nan("");
  CHECK_NOTHROW(aggregate(y, yhat, Metric::MAD, 100.0));
  // ...but not at an evaluated one.
  yhat.data[0] = std::nan("");
  CHECK_THROWS_AS(aggregate(y, yhat, Metric::MAD, 100.0), DataError);
}

TEST_CASE("empty evaluation domain is an explicit error") {
  DepthFrame y = DepthFrame::dense(2, 1, {150.0f, 200.0f});
  DenseDepth yhat = raster(2, 1, {150.0, 200.0});
  CHECK_THROWS_AS(aggregate(y, yhat, Metric::RMSE, 100.0), DataError);

  PixelMask mask = PixelMask::filled(1, 1, false);
  DepthFrame allinvalid = DepthFrame::with_mask(1, 1, {0.0f}, mask);
  CHECK_THROWS_AS(aggregate(allinvalid, raster(1, 1, {1.0}), Metric::RMSE, 100.0), DataError);
}

TEST_CASE("identity reconstruction scores zero under every metric") {
  DepthFrame y = random_frame(9, 7, 21);
  DenseDepth yhat = DenseDepth::zeros(9, 7);
  for (std::size_t i = 0; i < yhat.data.size(); ++i) yhat.data[i] = y.data[i];
  for (Metric m : {Metric::RMSE, Metric::REL, Metric::MAD}) {
    CHECK(aggregate(y, yhat, m, 100.0) == 0.0);
    QMap q = pointwise_q(y, yhat, m, 100.0);
    for (float v : q.data) CHECK(v == 0.0f);
  }
}

TEST_CASE("RMSE is scale-equivariant and REL scale-invariant") {
  DepthFrame y = random_frame(8, 6, 33);
  DenseDepth yhat = random_prediction(y, 34);

  // Doubling is exact in floating point, so these hold to tight tolerance.
  std::vector<float> scaled_data(y.data);
  for (auto& v : scaled_data) v *= 2.0f;
  DepthFrame y2 = DepthFrame::dense(8, 6, std::move(scaled_data));
  DenseDepth yhat2 = yhat;
  for (auto& v : yhat2.data) v *= 2.0;

  const double rmse = aggregate(y, yhat, Metric::RMSE, 1000.0);
  const double rmse2 = aggregate(y2, yhat2, Metric::RMSE, 1000.0);
  CHECK(rmse2 == doctest::Approx(2.0 * rmse).epsilon(1e-12));

  const double rel = aggregate(y, yhat, Metric::REL, 1000.0);
  const double rel2 = aggregate(y2, yhat2, Metric::REL, 1000.0);
  CHECK(rel2 == doctest::Approx(rel).epsilon(1e-12));
}

TEST_CASE("RMSE aggregate squared equals the mean of pointwise q") {
  DepthFrame y = random_frame(10, 5, 77);
  DenseDepth yhat = random_prediction(y, 78);
  const double rmse = aggregate(y, yhat, Metric::RMSE, 1000.0);
  QMap q = pointwise_q(y, yhat, Metric::RMSE, 1000.0);
  double mean = 0.0;
  for (float v : q.data) mean += v;
  mean /= static_cast<double>(q.data.size());
  CHECK(rmse * rmse == doctest::Approx(mean).epsilon(1e-6));
}

TEST_CASE("hand-computed aggregate values") {
  // y = {2, 4}, yhat = {3, 6}: errors {1, 2}.
  DepthFrame y = DepthFrame::dense(2, 1, {2.0f, 4.0f});
  DenseDepth yhat = raster(2, 1, {3.0, 6.0});
  CHECK(aggregate(y, yhat, Metric::RMSE, 100.0) == doctest::Approx(std::sqrt(2.5)));
  CHECK(aggregate(y, yhat, Metric::REL, 100.0) == doctest::Approx(0.5));
  CHECK(aggregate(y, yhat, Metric::MAD, 100.0) == doctest::Approx(1.5));
}

TEST_CASE("dimension mismatch is rejected") {
  DepthFrame y = random_frame(3, 3, 5);
  CHECK_THROWS_AS(aggregate(y, DenseDepth::zeros(3, 2), Metric::RMSE, 100.0), DataError);
  CHECK_THROWS_AS(pointwise_q(y, DenseDepth::zeros(2, 3), Metric::RMSE, 100.0), DataError);
}
