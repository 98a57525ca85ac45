#include "dsamp/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "dsamp/errors.hpp"
#include "dsamp/rng.hpp"

namespace dsamp {

namespace {

void check_mask(const PixelMask* valid, int width, int height) {
  if (!valid) return;
  valid->validate();
  if (valid->width != width || valid->height != height)
    throw DataError("validity mask dimensions do not match the frame");
}

bool is_eligible(const PixelMask* valid, std::size_t lin) {
  return !valid || valid->data[lin] != 0;
}

std::size_t eligible_count(const PixelMask* valid, std::size_t total) {
  return valid ? valid->count() : total;
}

// Nearest pixel that is valid and not yet taken, by squared Euclidean
// distance with ties broken to the lowest linear index.
PixelCoord snap_to_free(int x, int y, int width, int height, const PixelMask* valid,
                        const std::vector<std::uint8_t>& taken) {
  long long best_d = -1;
  std::size_t best_lin = 0;
  for (int py = 0; py < height; ++py) {
    for (int px = 0; px < width; ++px) {
      const std::size_t lin = linear_index(px, py, width);
      if (taken[lin] || !is_eligible(valid, lin)) continue;
      const long long dx = px - x;
      const long long dy = py - y;
      const long long d = dx * dx + dy * dy;
      if (best_d < 0 || d < best_d) {
        best_d = d;
        best_lin = lin;
      }
    }
  }
  if (best_d < 0) throw InternalError("no free valid pixel left to snap to");
  return {static_cast<int>(best_lin % width), static_cast<int>(best_lin / width)};
}

}  // namespace

KernelParams KernelParams::from_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DataError("kernel sigma must be positive");
  KernelParams p;
  p.sigma = sigma;
  p.support = std::max(1, static_cast<int>(std::ceil(2.5 * sigma)));
  return p;
}

double kernel_value(double sigma, int dx, int dy) {
  const double r2 = static_cast<double>(dx) * dx + static_cast<double>(dy) * dy;
  return 1.0 - std::exp(-r2 / (2.0 * sigma * sigma));
}

double default_sigma(int width, int height, int importance_budget) {
  if (importance_budget < 1) throw DataError("importance budget must be at least 1");
  return std::sqrt(static_cast<double>(width) * height / importance_budget) / 2.0;
}

SamplePattern gaussian_sampling(const QMap& qhat, const PixelMask* valid, int importance_budget,
                                const KernelParams& params, const SamplePattern* exclude,
                                GreedyTrace* trace) {
  qhat.validate();
  check_mask(valid, qhat.width, qhat.height);
  if (!(params.sigma > 0.0) || params.support < 1) throw DataError("bad kernel parameters");
  if (importance_budget < 0) throw DataError("importance budget must be nonnegative");

  const int width = qhat.width, height = qhat.height;
  const std::size_t total = qhat.data.size();

  std::vector<std::uint8_t> taken(total, 0);
  std::size_t free_count = 0;
  for (std::size_t i = 0; i < total; ++i) {
    if (is_eligible(valid, i))
      ++free_count;
    else
      taken[i] = 1;
  }
  if (exclude) {
    for (const PixelCoord& c : exclude->coords) {
      if (c.x < 0 || c.x >= width || c.y < 0 || c.y >= height)
        throw DataError("excluded coordinate out of bounds");
      const std::size_t lin = linear_index(c.x, c.y, width);
      if (!taken[lin]) {
        taken[lin] = 1;
        --free_count;
      }
    }
  }
  if (free_count < static_cast<std::size_t>(importance_budget))
    throw DataError("importance budget exceeds the available pixel count");

  std::vector<double> w(qhat.data.begin(), qhat.data.end());

  SamplePattern out;
  out.coords.reserve(importance_budget);
  for (int pick = 0; pick < importance_budget; ++pick) {
    std::size_t best = total;
    double best_v = -1.0;
    for (std::size_t i = 0; i < total; ++i) {
      if (taken[i]) continue;
      if (best == total || w[i] > best_v) {
        best = i;
        best_v = w[i];
      }
    }
    const int sx = static_cast<int>(best % width);
    const int sy = static_cast<int>(best / width);
    taken[best] = 1;
    out.coords.push_back({sx, sy});

    const int x0 = std::max(0, sx - params.support);
    const int x1 = std::min(width - 1, sx + params.support);
    const int y0 = std::max(0, sy - params.support);
    const int y1 = std::min(height - 1, sy + params.support);
    for (int py = y0; py <= y1; ++py)
      for (int px = x0; px <= x1; ++px)
        w[linear_index(px, py, width)] *= kernel_value(params.sigma, px - sx, py - sy);

    if (trace && trace->record_maps) trace->maps_after.push_back(w);
  }
  return out;
}

SamplePattern blend_with_grid(const QMap& qhat, const PixelMask* valid, int budget,
                              double grid_fraction, std::optional<double> sigma) {
  qhat.validate();
  check_mask(valid, qhat.width, qhat.height);
  if (budget < 1) throw DataError("budget must be at least 1");
  if (!(grid_fraction >= 0.0 && grid_fraction <= 1.0))
    throw DataError("grid fraction must lie in [0, 1]");
  if (eligible_count(valid, qhat.data.size()) < static_cast<std::size_t>(budget))
    throw DataError("budget exceeds the valid pixel count");

  const int grid_count = static_cast<int>(std::llround(grid_fraction * budget));
  const int importance_count = budget - grid_count;

  SamplePattern out;
  if (grid_count > 0) out = grid_pattern(qhat.width, qhat.height, valid, grid_count);

  if (importance_count > 0) {
    QMap zeroed = qhat;
    for (const PixelCoord& c : out.coords) zeroed.data[linear_index(c.x, c.y, qhat.width)] = 0.0f;
    const double s =
        sigma ? *sigma : default_sigma(qhat.width, qhat.height, importance_count);
    SamplePattern imp =
        gaussian_sampling(zeroed, valid, importance_count, KernelParams::from_sigma(s), &out);
    out.coords.insert(out.coords.end(), imp.coords.begin(), imp.coords.end());
  }
  return out;
}

SamplePattern random_pattern(int width, int height, const PixelMask* valid, int budget,
                             std::uint64_t seed) {
  if (width < 1 || height < 1) throw DataError("frame dimensions must be positive");
  check_mask(valid, width, height);
  if (budget < 1) throw DataError("budget must be at least 1");

  std::vector<std::size_t> pool;
  const std::size_t total = static_cast<std::size_t>(width) * height;
  pool.reserve(total);
  for (std::size_t i = 0; i < total; ++i)
    if (is_eligible(valid, i)) pool.push_back(i);
  if (pool.size() < static_cast<std::size_t>(budget))
    throw DataError("budget exceeds the valid pixel count");

  Rng rng(seed);
  SamplePattern out;
  out.coords.reserve(budget);
  for (int j = 0; j < budget; ++j) {
    const std::size_t k = j + static_cast<std::size_t>(rng.bounded(pool.size() - j));
    std::swap(pool[j], pool[k]);
    out.coords.push_back(
        {static_cast<int>(pool[j] % width), static_cast<int>(pool[j] / width)});
  }
  return out;
}

SamplePattern grid_pattern(int width, int height, const PixelMask* valid, int budget) {
  if (width < 1 || height < 1) throw DataError("frame dimensions must be positive");
  check_mask(valid, width, height);
  if (budget < 1) throw DataError("budget must be at least 1");
  const std::size_t total = static_cast<std::size_t>(width) * height;
  if (eligible_count(valid, total) < static_cast<std::size_t>(budget))
    throw DataError("budget exceeds the valid pixel count");

  // Rows r ~ sqrt(B*h/w) so cells are near-square; clamping keeps c <= width.
  long long rows = std::llround(std::sqrt(static_cast<double>(budget) * height / width));
  const long long min_rows = std::max<long long>(1, (budget + width - 1) / width);
  rows = std::clamp(rows, min_rows, static_cast<long long>(height));
  const long long cols = (budget + rows - 1) / rows;

  std::vector<std::uint8_t> taken(total, 0);
  SamplePattern out;
  out.coords.reserve(budget);
  for (long long i = 0; i < rows && static_cast<int>(out.coords.size()) < budget; ++i) {
    const int cy = static_cast<int>((2 * i + 1) * height / (2 * rows));
    for (long long j = 0; j < cols && static_cast<int>(out.coords.size()) < budget; ++j) {
      const int cx = static_cast<int>((2 * j + 1) * width / (2 * cols));
      const std::size_t lin = linear_index(cx, cy, width);
      PixelCoord c{cx, cy};
      if (taken[lin] || !is_eligible(valid, lin))
        c = snap_to_free(cx, cy, width, height, valid, taken);
      taken[linear_index(c.x, c.y, width)] = 1;
      out.coords.push_back(c);
    }
  }
  return out;
}

SamplePattern superpixel_pattern(const GuideImage& guide, const PixelMask* valid, int budget,
                                 const SlicParams& params) {
  guide.validate();
  check_mask(valid, guide.width, guide.height);
  if (budget < 1) throw DataError("budget must be at least 1");
  if (params.iterations < 1 || !(params.compactness > 0.0))
    throw DataError("bad superpixel parameters");
  const int width = guide.width, height = guide.height;
  const std::size_t total = static_cast<std::size_t>(width) * height;
  const std::size_t n_valid = eligible_count(valid, total);
  if (n_valid < static_cast<std::size_t>(budget))
    throw DataError("budget exceeds the valid pixel count");

  struct Cluster {
    double x, y, intensity;
  };
  SamplePattern seeds = grid_pattern(width, height, valid, budget);
  std::vector<Cluster> clusters;
  clusters.reserve(budget);
  for (const PixelCoord& c : seeds.coords)
    clusters.push_back({static_cast<double>(c.x), static_cast<double>(c.y),
                        static_cast<double>(guide.intensity(c.x, c.y))});

  const double spacing = std::sqrt(static_cast<double>(n_valid) / budget);
  const int window = std::max(1, static_cast<int>(std::ceil(2.0 * spacing)));
  const double m = params.compactness;

  std::vector<int> assign(total, -1);
  std::vector<double> best_d(total, 0.0);
  std::vector<long long> member_count(budget, 0);

  auto distance_to = [&](const Cluster& c, int px, int py) {
    const double dx = px - c.x;
    const double dy = py - c.y;
    const double di = m * (guide.intensity(px, py) - c.intensity);
    return dx * dx + dy * dy + di * di;
  };

  for (int iter = 0; iter < params.iterations; ++iter) {
    std::fill(assign.begin(), assign.end(), -1);
    for (int k = 0; k < budget; ++k) {
      const int cx = static_cast<int>(std::llround(clusters[k].x));
      const int cy = static_cast<int>(std::llround(clusters[k].y));
      const int x0 = std::max(0, cx - window), x1 = std::min(width - 1, cx + window);
      const int y0 = std::max(0, cy - window), y1 = std::min(height - 1, cy + window);
      for (int py = y0; py <= y1; ++py) {
        for (int px = x0; px <= x1; ++px) {
          const std::size_t lin = linear_index(px, py, width);
          if (!is_eligible(valid, lin)) continue;
          const double d = distance_to(clusters[k], px, py);
          if (assign[lin] < 0 || d < best_d[lin]) {
            assign[lin] = k;
            best_d[lin] = d;
          }
        }
      }
    }
    // Windows can miss pixels on odd masks; fall back to a global scan.
    for (std::size_t lin = 0; lin < total; ++lin) {
      if (assign[lin] >= 0 || !is_eligible(valid, lin)) continue;
      const int px = static_cast<int>(lin % width);
      const int py = static_cast<int>(lin / width);
      for (int k = 0; k < budget; ++k) {
        const double d = distance_to(clusters[k], px, py);
        if (assign[lin] < 0 || d < best_d[lin]) {
          assign[lin] = k;
          best_d[lin] = d;
        }
      }
    }

    std::vector<double> sx(budget, 0.0), sy(budget, 0.0), si(budget, 0.0);
    std::fill(member_count.begin(), member_count.end(), 0);
    for (std::size_t lin = 0; lin < total; ++lin) {
      const int k = assign[lin];
      if (k < 0) continue;
      const int px = static_cast<int>(lin % width);
      const int py = static_cast<int>(lin / width);
      sx[k] += px;
      sy[k] += py;
      si[k] += guide.intensity(px, py);
      ++member_count[k];
    }
    for (int k = 0; k < budget; ++k) {
      if (member_count[k] == 0) continue;  // keep the old center, may refill
      const double n = static_cast<double>(member_count[k]);
      clusters[k] = {sx[k] / n, sy[k] / n, si[k] / n};
    }
  }

  std::vector<std::uint8_t> taken(total, 0);
  SamplePattern out;
  out.coords.reserve(budget);
  for (int k = 0; k < budget; ++k) {
    if (member_count[k] == 0) continue;
    const int cx = static_cast<int>(std::llround(clusters[k].x));
    const int cy = static_cast<int>(std::llround(clusters[k].y));
    const std::size_t lin = linear_index(cx, cy, width);
    PixelCoord c{cx, cy};
    if (taken[lin] || !is_eligible(valid, lin))
      c = snap_to_free(cx, cy, width, height, valid, taken);
    taken[linear_index(c.x, c.y, width)] = 1;
    out.coords.push_back(c);
  }

  if (static_cast<int>(out.coords.size()) < budget) {
    SamplePattern backfill = grid_pattern(width, height, valid, budget);
    for (const PixelCoord& c : backfill.coords) {
      if (static_cast<int>(out.coords.size()) == budget) break;
      const std::size_t lin = linear_index(c.x, c.y, width);
      if (taken[lin]) continue;
      taken[lin] = 1;
      out.coords.push_back(c);
    }
    for (std::size_t lin = 0; lin < total && static_cast<int>(out.coords.size()) < budget;
         ++lin) {
      if (taken[lin] || !is_eligible(valid, lin)) continue;
      taken[lin] = 1;
      out.coords.push_back({static_cast<int>(lin % width), static_cast<int>(lin / width)});
    }
  }
  return out;
}

}  // namespace dsamp
