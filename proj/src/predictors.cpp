#include "dsamp/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "dsamp/errors.hpp"

namespace dsamp {

namespace {

std::int64_t sq_dist(PixelCoord a, PixelCoord b) {
  const std::int64_t dx = a.x - b.x;
  const std::int64_t dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Index of the nearest sample to p; ties resolved toward the sample whose
// pixel has the lowest linear index. Distances are exact integers.
int nearest_sample(const std::vector<PixelCoord>& coords, PixelCoord p, int width) {
  int best = 0;
  std::int64_t best_d = sq_dist(coords[0], p);
  std::size_t best_lin = linear_index(coords[0].x, coords[0].y, width);
  for (int i = 1; i < static_cast<int>(coords.size()); ++i) {
    const std::int64_t d = sq_dist(coords[i], p);
    const std::size_t lin = linear_index(coords[i].x, coords[i].y, width);
    if (d < best_d || (d == best_d && lin < best_lin)) {
      best = i;
      best_d = d;
      best_lin = lin;
    }
  }
  return best;
}

DenseDepth predict_nearest(const SampleSet& s, int width, int height) {
  DenseDepth out = DenseDepth::zeros(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      out.data[linear_index(x, y, width)] = s.values[nearest_sample(s.coords, {x, y}, width)];
    }
  }
  return out;
}

DenseDepth predict_idw(const SampleSet& s, int width, int height, double power, int k) {
  if (k < 1) throw DataError("IDW neighbor count must be >= 1");
  const int n = s.size();
  const int use = std::min(k, n);
  DenseDepth out = DenseDepth::zeros(width, height);
  std::vector<std::pair<std::int64_t, int>> order(n);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const PixelCoord p{x, y};
      for (int i = 0; i < n; ++i) order[i] = {sq_dist(s.coords[i], p), i};
      std::partial_sort(order.begin(), order.begin() + use, order.end(),
                        [&](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first < b.first;
                          return linear_index(s.coords[a.second].x, s.coords[a.second].y, width) <
                                 linear_index(s.coords[b.second].x, s.coords[b.second].y, width);
                        });
      double value;
      if (order[0].first == 0 || use == 1) {
        // Exact hit, or a single neighbor: copy instead of weighting so the
        // value round-trips bit-exactly.
        value = s.values[order[0].second];
      } else {
        double wsum = 0.0, vsum = 0.0;
        for (int i = 0; i < use; ++i) {
          const double w = std::pow(static_cast<double>(order[i].first), -0.5 * power);
          wsum += w;
          vsum += w * s.values[order[i].second];
        }
        value = vsum / wsum;
      }
      out.data[linear_index(x, y, width)] = value;
    }
  }
  return out;
}

// --- Delaunay triangulation with exact integer predicates ------------------

struct Tri {
  int a, b, c;  // site indices, counter-clockwise
  bool alive = true;
};

// Twice the signed area of (a, b, c); positive for counter-clockwise.
std::int64_t orient(PixelCoord a, PixelCoord b, PixelCoord c) {
  const std::int64_t abx = b.x - a.x, aby = b.y - a.y;
  const std::int64_t acx = c.x - a.x, acy = c.y - a.y;
  return abx * acy - aby * acx;
}

// > 0 when d lies strictly inside the circumcircle of CCW triangle (a, b, c).
__int128 incircle(PixelCoord a, PixelCoord b, PixelCoord c, PixelCoord d) {
  const std::int64_t adx = a.x - d.x, ady = a.y - d.y;
  const std::int64_t bdx = b.x - d.x, bdy = b.y - d.y;
  const std::int64_t cdx = c.x - d.x, cdy = c.y - d.y;
  const __int128 ad = static_cast<__int128>(adx) * adx + static_cast<__int128>(ady) * ady;
  const __int128 bd = static_cast<__int128>(bdx) * bdx + static_cast<__int128>(bdy) * bdy;
  const __int128 cd = static_cast<__int128>(cdx) * cdx + static_cast<__int128>(cdy) * cdy;
  const __int128 m00 = static_cast<__int128>(bdx) * cdy - static_cast<__int128>(bdy) * cdx;
  const __int128 m01 = static_cast<__int128>(adx) * cdy - static_cast<__int128>(ady) * cdx;
  const __int128 m02 = static_cast<__int128>(adx) * bdy - static_cast<__int128>(ady) * bdx;
  return ad * m00 - bd * m01 + cd * m02;
}

std::uint64_t edge_key(int u, int v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
         static_cast<std::uint32_t>(v);
}

class Triangulation {
 public:
  explicit Triangulation(const std::vector<PixelCoord>& sites) : sites_(sites) { build(); }

  const std::vector<Tri>& triangles() const { return tris_; }
  const std::vector<PixelCoord>& sites() const { return sites_; }
  bool degenerate() const { return tris_.empty(); }

 private:
  void add_triangle(int a, int b, int c) {
    if (orient(sites_[a], sites_[b], sites_[c]) < 0) std::swap(b, c);
    const int id = static_cast<int>(tris_.size());
    tris_.push_back({a, b, c, true});
    link(a, b, id);
    link(b, c, id);
    link(c, a, id);
  }

  void link(int u, int v, int tri) { edges_[edge_key(u, v)].push_back(tri); }

  void unlink(int u, int v, int tri) {
    auto& list = edges_[edge_key(u, v)];
    list.erase(std::find(list.begin(), list.end(), tri));
  }

  // Points are inserted in lexicographic (x, y) order; each new point fans
  // to the hull edges it can see. The hull may carry collinear vertices,
  // which the per-edge visibility test handles without special cases.
  void build() {
    const int n = static_cast<int>(sites_.size());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int i, int j) {
      if (sites_[i].x != sites_[j].x) return sites_[i].x < sites_[j].x;
      return sites_[i].y < sites_[j].y;
    });

    std::vector<int> chain;  // collinear prefix, in sorted order
    std::vector<int> hull;   // counter-clockwise polygon
    for (int oi = 0; oi < n; ++oi) {
      const int p = order[oi];
      if (hull.empty()) {
        if (chain.size() < 2) {
          chain.push_back(p);
          continue;
        }
        if (orient(sites_[chain[0]], sites_[chain[1]], sites_[p]) == 0) {
          chain.push_back(p);
          continue;
        }
        for (std::size_t j = 0; j + 1 < chain.size(); ++j)
          add_triangle(chain[j], chain[j + 1], p);
        if (orient(sites_[chain[0]], sites_[chain[1]], sites_[p]) > 0) {
          hull = chain;
        } else {
          hull.assign(chain.rbegin(), chain.rend());
        }
        hull.push_back(p);
        continue;
      }

      const int m = static_cast<int>(hull.size());
      std::vector<bool> visible(m);
      for (int e = 0; e < m; ++e)
        visible[e] = orient(sites_[hull[e]], sites_[hull[(e + 1) % m]], sites_[p]) < 0;
      // The visible edges form one contiguous circular arc.
      int start = -1;
      for (int e = 0; e < m; ++e) {
        if (visible[e] && !visible[(e + m - 1) % m]) {
          start = e;
          break;
        }
      }
      if (start < 0) throw InternalError("hull insertion found no visible edge");
      int len = 0;
      while (len < m && visible[(start + len) % m]) ++len;
      for (int e = 0; e < len; ++e) {
        const int u = hull[(start + e) % m];
        const int v = hull[(start + e + 1) % m];
        add_triangle(u, v, p);
      }
      std::vector<int> next;
      next.reserve(m - len + 2);
      // Keep vertices from the end of the visible arc around to its start,
      // then splice in the new point.
      for (int e = 0; e <= m - len; ++e) next.push_back(hull[(start + len + e) % m]);
      next.push_back(p);
      hull = std::move(next);
    }

    if (!tris_.empty()) legalize();
  }

  // Lawson flips until every interior edge satisfies the empty-circle test.
  // Cocircular quads (determinant zero) are left as built, so the outcome is
  // fixed by the lexicographic insertion order.
  void legalize() {
    std::deque<std::uint64_t> queue;
    for (const auto& [key, list] : edges_)
      if (list.size() == 2) queue.push_back(key);
    std::sort(queue.begin(), queue.end());

    while (!queue.empty()) {
      const std::uint64_t key = queue.front();
      queue.pop_front();
      auto it = edges_.find(key);
      if (it == edges_.end() || it->second.size() != 2) continue;
      const int t0 = it->second[0];
      const int t1 = it->second[1];
      if (!tris_[t0].alive || !tris_[t1].alive) continue;

      const int u = static_cast<int>(key >> 32);
      const int v = static_cast<int>(key & 0xffffffffu);
      const int c0 = opposite(tris_[t0], u, v);
      const int c1 = opposite(tris_[t1], u, v);
      if (c0 < 0 || c1 < 0) continue;

      if (incircle(sites_[tris_[t0].a], sites_[tris_[t0].b], sites_[tris_[t0].c], sites_[c1]) <= 0)
        continue;
      // Flip is only valid across a strictly convex quad: u and v must lie
      // on opposite sides of the would-be diagonal.
      const std::int64_t side_u = orient(sites_[c0], sites_[c1], sites_[u]);
      const std::int64_t side_v = orient(sites_[c0], sites_[c1], sites_[v]);
      if (!((side_u > 0 && side_v < 0) || (side_u < 0 && side_v > 0))) continue;

      retire(t0);
      retire(t1);
      add_triangle(c0, c1, u);
      add_triangle(c0, c1, v);
      for (std::uint64_t k : {edge_key(u, c0), edge_key(u, c1), edge_key(v, c0), edge_key(v, c1)})
        queue.push_back(k);
    }
  }

  int opposite(const Tri& t, int u, int v) const {
    for (int s : {t.a, t.b, t.c})
      if (s != u && s != v) return s;
    return -1;
  }

  void retire(int id) {
    Tri& t = tris_[id];
    t.alive = false;
    unlink(t.a, t.b, id);
    unlink(t.b, t.c, id);
    unlink(t.c, t.a, id);
  }

  const std::vector<PixelCoord>& sites_;
  std::vector<Tri> tris_;
  std::unordered_map<std::uint64_t, std::vector<int>> edges_;
};

DenseDepth predict_scattered_linear(const SampleSet& input, int width, int height) {
  const int n = input.size();
  if (n == 1) {
    DenseDepth out = DenseDepth::zeros(width, height);
    std::fill(out.data.begin(), out.data.end(), input.values[0]);
    return out;
  }
  // Insert sites in lexicographic raster order. Bowyer-Watson results depend
  // on insertion order only for cocircular quads; a canonical order makes the
  // reconstruction independent of how the pattern happened to be listed.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return linear_index(input.coords[static_cast<std::size_t>(a)].x,
                        input.coords[static_cast<std::size_t>(a)].y, width) <
           linear_index(input.coords[static_cast<std::size_t>(b)].x,
                        input.coords[static_cast<std::size_t>(b)].y, width);
  });
  SampleSet s;
  s.coords.reserve(input.coords.size());
  s.values.reserve(input.values.size());
  for (int idx : order) {
    s.coords.push_back(input.coords[static_cast<std::size_t>(idx)]);
    s.values.push_back(input.values[static_cast<std::size_t>(idx)]);
  }
  Triangulation tri(s.coords);
  if (tri.degenerate())
    throw DataError("scattered-linear interpolation needs at least 3 non-collinear samples");

  DenseDepth out = DenseDepth::zeros(width, height);
  std::vector<std::uint8_t> written(out.data.size(), 0);

  // Sample sites first: their pixels carry the measured value exactly.
  for (int i = 0; i < n; ++i) {
    const std::size_t lin = linear_index(s.coords[i].x, s.coords[i].y, width);
    out.data[lin] = s.values[i];
    written[lin] = 1;
  }

  for (const Tri& t : tri.triangles()) {
    if (!t.alive) continue;
    const PixelCoord pa = s.coords[t.a], pb = s.coords[t.b], pc = s.coords[t.c];
    const double va = s.values[t.a], vb = s.values[t.b], vc = s.values[t.c];
    const int x0 = std::max(0, std::min({pa.x, pb.x, pc.x}));
    const int x1 = std::min(width - 1, std::max({pa.x, pb.x, pc.x}));
    const int y0 = std::max(0, std::min({pa.y, pb.y, pc.y}));
    const int y1 = std::min(height - 1, std::max({pa.y, pb.y, pc.y}));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const std::size_t lin = linear_index(x, y, width);
        if (written[lin]) continue;
        const PixelCoord p{x, y};
        const std::int64_t e0 = orient(pb, pc, p);
        if (e0 < 0) continue;
        const std::int64_t e1 = orient(pc, pa, p);
        if (e1 < 0) continue;
        const std::int64_t e2 = orient(pa, pb, p);
        if (e2 < 0) continue;
        const double denom = static_cast<double>(e0 + e1 + e2);
        out.data[lin] = (static_cast<double>(e0) * va + static_cast<double>(e1) * vb +
                         static_cast<double>(e2) * vc) /
                        denom;
        written[lin] = 1;
      }
    }
  }

  // Pixels outside the convex hull extrapolate from the nearest sample.
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t lin = linear_index(x, y, width);
      if (!written[lin])
        out.data[lin] = s.values[nearest_sample(s.coords, {x, y}, width)];
    }
  }
  return out;
}

}  // namespace

PredictorKind predictor_from_string(const std::string& name) {
  if (name == "nearest") return PredictorKind::Nearest;
  if (name == "linear" || name == "scattered-linear") return PredictorKind::ScatteredLinear;
  if (name == "idw") return PredictorKind::Idw;
  throw DataError("unknown predictor '" + name + "' (expected nearest, linear, or idw)");
}

const char* predictor_name(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::Nearest: return "nearest";
    case PredictorKind::ScatteredLinear: return "linear";
    case PredictorKind::Idw: return "idw";
  }
  throw InternalError("unhandled predictor enum value");
}

SampleSet measure(const DepthFrame& y, const SamplePattern& pattern) {
  validate_pattern(pattern, y.valid);
  SampleSet s;
  s.coords = pattern.coords;
  s.values.reserve(pattern.coords.size());
  for (const PixelCoord& c : pattern.coords)
    s.values.push_back(static_cast<double>(y.at(c.x, c.y)));
  return s;
}

DenseDepth predict(const Predictor& predictor, const SampleSet& samples, int width, int height,
                   const GuideImage* guide) {
  (void)guide;
  if (width <= 0 || height <= 0) throw DataError("prediction raster dimensions must be positive");
  if (samples.size() == 0) throw DataError("cannot predict from an empty sample set");
  if (samples.values.size() != samples.coords.size())
    throw DataError("sample coordinate and value counts differ");
  std::vector<std::size_t> lins;
  lins.reserve(samples.coords.size());
  for (const PixelCoord& c : samples.coords) {
    if (c.x < 0 || c.x >= width || c.y < 0 || c.y >= height)
      throw DataError("sample coordinate out of bounds");
    lins.push_back(linear_index(c.x, c.y, width));
  }
  std::sort(lins.begin(), lins.end());
  if (std::adjacent_find(lins.begin(), lins.end()) != lins.end())
    throw DataError("sample set contains duplicate coordinates");
  switch (predictor.kind) {
    case PredictorKind::Nearest: return predict_nearest(samples, width, height);
    case PredictorKind::ScatteredLinear: return predict_scattered_linear(samples, width, height);
    case PredictorKind::Idw:
      return predict_idw(samples, width, height, predictor.idw_power, predictor.idw_neighbors);
  }
  throw InternalError("unhandled predictor enum value");
}

}  // namespace dsamp
