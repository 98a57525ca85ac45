#include "dsamp/toy1d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "dsamp/errors.hpp"
#include "dsamp/rng.hpp"

namespace dsamp {

namespace {

constexpr std::uint64_t kToyStream = 0x544f5931;

std::vector<int> sorted_unique(std::vector<int> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return indices;
}

// B indices with both endpoints forced, the rest uniform over the interior.
std::vector<int> random_indices(int n, int budget, std::uint64_t seed) {
  std::vector<int> pool(n - 2);
  for (int i = 0; i < n - 2; ++i) pool[i] = i + 1;
  Rng rng(seed);
  std::vector<int> out{0, n - 1};
  for (int j = 0; j < budget - 2; ++j) {
    const std::size_t k = j + static_cast<std::size_t>(rng.bounded(pool.size() - j));
    std::swap(pool[j], pool[k]);
    out.push_back(pool[j]);
  }
  return out;
}

double kernel_1d(double sigma, int dx) {
  return 1.0 - std::exp(-static_cast<double>(dx) * dx / (2.0 * sigma * sigma));
}

}  // namespace

Signal1D Signal1D::from_sinusoids(int n, const std::vector<double>& amplitudes,
                                  const std::vector<double>& frequencies,
                                  const std::vector<double>& phases) {
  if (n < 2) throw DataError("signal needs at least two points");
  if (amplitudes.size() != frequencies.size() || amplitudes.size() != phases.size() ||
      amplitudes.empty())
    throw DataError("sinusoid parameter lists must be nonempty and equally long");
  const double two_pi = 8.0 * std::atan(1.0);
  Signal1D s;
  s.positions.resize(n);
  s.values.resize(n);
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    s.positions[i] = t;
    double v = 0.0;
    for (std::size_t k = 0; k < amplitudes.size(); ++k)
      v += amplitudes[k] * std::sin(two_pi * frequencies[k] * t + phases[k]);
    s.values[i] = v;
  }
  return s;
}

void Signal1D::validate() const {
  if (positions.size() != values.size() || positions.size() < 2)
    throw DataError("signal needs matching position and value lists of length >= 2");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!std::isfinite(positions[i]) || !std::isfinite(values[i]))
      throw DataError("signal entries must be finite");
    if (i > 0 && positions[i] <= positions[i - 1])
      throw DataError("signal positions must be strictly increasing");
  }
}

Signal1D canonical_toy_signal() {
  return Signal1D::from_sinusoids(200, {1.0, 0.55, 0.3}, {1.3, 2.9, 4.7}, {0.7, 2.1, 4.4});
}

std::vector<double> interpolate_linear_1d(const Signal1D& signal,
                                          const std::vector<int>& sample_indices) {
  signal.validate();
  if (sample_indices.empty()) throw DataError("need at least one sample index");
  const int n = signal.size();
  std::vector<int> idx = sorted_unique(sample_indices);
  for (int i : idx)
    if (i < 0 || i >= n) throw DataError("sample index out of range");

  std::vector<double> out(n);
  std::size_t seg = 0;
  for (int i = 0; i < n; ++i) {
    if (i <= idx.front()) {
      out[i] = signal.values[idx.front()];
      continue;
    }
    if (i >= idx.back()) {
      out[i] = signal.values[idx.back()];
      continue;
    }
    while (idx[seg + 1] < i) ++seg;
    const int a = idx[seg], b = idx[seg + 1];
    const double t = (signal.positions[i] - signal.positions[a]) /
                     (signal.positions[b] - signal.positions[a]);
    out[i] = signal.values[a] + (signal.values[b] - signal.values[a]) * t;
  }
  return out;
}

double rmse_1d(const std::vector<double>& y, const std::vector<double>& yhat) {
  if (y.size() != yhat.size() || y.empty()) throw DataError("series lengths differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - yhat[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(y.size()));
}

ToyReport toy_run(const Signal1D& signal, int budget, int iters, std::uint64_t seed) {
  signal.validate();
  const int n = signal.size();
  if (budget < 2) throw DataError("budget must cover both endpoints");
  if (budget >= n) throw DataError("budget must be below the signal resolution");
  if (iters < 1) throw DataError("need at least one random pattern");

  ToyReport report;
  report.q.assign(n, 0.0);

  for (int j = 1; j <= iters; ++j) {
    std::vector<int> idx = random_indices(n, budget, derive_seed(seed, kToyStream, j));
    std::vector<double> yhat = interpolate_linear_1d(signal, idx);
    for (int i = 0; i < n; ++i) {
      const double d = signal.values[i] - yhat[i];
      report.q[i] += d * d;
    }
    report.random_rmse.push_back(rmse_1d(signal.values, yhat));
    report.random_patterns.push_back(std::move(idx));
  }
  for (double& v : report.q) v /= iters;
  double mean = 0.0;
  for (double r : report.random_rmse) mean += r;
  report.mean_random_rmse = mean / iters;

  // Greedy pass over Q with the endpoints pre-selected: attenuate around
  // them first, then take argmax picks with the same update rule.
  const double sigma = static_cast<double>(n) / (2.0 * budget);
  const int support = std::max(1, static_cast<int>(std::ceil(2.5 * sigma)));
  std::vector<double> w = report.q;
  std::vector<std::uint8_t> taken(n, 0);
  auto attenuate = [&](int center) {
    const int lo = std::max(0, center - support);
    const int hi = std::min(n - 1, center + support);
    for (int i = lo; i <= hi; ++i) w[i] *= kernel_1d(sigma, i - center);
  };
  report.adaptive_pattern = {0, n - 1};
  taken[0] = taken[n - 1] = 1;
  attenuate(0);
  attenuate(n - 1);
  for (int pick = 2; pick < budget; ++pick) {
    int best = -1;
    for (int i = 0; i < n; ++i) {
      if (taken[i]) continue;
      if (best < 0 || w[i] > w[best]) best = i;
    }
    taken[best] = 1;
    report.adaptive_pattern.push_back(best);
    attenuate(best);
  }

  std::vector<double> yhat = interpolate_linear_1d(signal, report.adaptive_pattern);
  report.adaptive_rmse = rmse_1d(signal.values, yhat);
  return report;
}

void write_toy_csv(const Signal1D& signal, const ToyReport& report,
                   const std::filesystem::path& path) {
  signal.validate();
  std::string body = "series,index,t,value\n";
  char row[160];
  auto emit_series = [&](const std::string& name, const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(row, sizeof(row), "%s,%zu,%.12g,%.12g\n", name.c_str(), i,
                    signal.positions[i], values[i]);
      body += row;
    }
  };
  auto emit_pattern = [&](const std::string& name, const std::vector<int>& idx) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
      std::snprintf(row, sizeof(row), "%s,%zu,%.12g,%.12g\n", name.c_str(), i,
                    signal.positions[idx[i]], signal.values[idx[i]]);
      body += row;
    }
  };

  emit_series("signal", signal.values);
  emit_series("q", report.q);
  for (std::size_t j = 0; j < report.random_patterns.size(); ++j) {
    const std::string tag = std::to_string(j + 1);
    emit_series("recon_" + tag, interpolate_linear_1d(signal, report.random_patterns[j]));
    emit_pattern("pattern_" + tag, report.random_patterns[j]);
  }
  emit_series("adaptive_recon", interpolate_linear_1d(signal, report.adaptive_pattern));
  emit_pattern("adaptive_pattern", report.adaptive_pattern);

  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw DataError("cannot open for writing: " + path.string());
  const std::size_t written = std::fwrite(body.data(), 1, body.size(), f);
  const bool ok = written == body.size() && std::fclose(f) == 0;
  if (!ok) throw DataError("failed writing: " + path.string());
}

}  // namespace dsamp
