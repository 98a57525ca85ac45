#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace dsamp {

// Discretized 1D signal on strictly increasing positions in [0, 1].
struct Signal1D {
  std::vector<double> positions;
  std::vector<double> values;

  static Signal1D from_sinusoids(int n, const std::vector<double>& amplitudes,
                                 const std::vector<double>& frequencies,
                                 const std::vector<double>& phases);

  int size() const { return static_cast<int>(positions.size()); }
  void validate() const;
};

// Fixed multi-extremum sum of three sinusoids used by the demo and its
// regression checks.
Signal1D canonical_toy_signal();

// Piecewise-linear reconstruction from the given sample indices, evaluated
// at every grid point; constant beyond the outermost samples.
std::vector<double> interpolate_linear_1d(const Signal1D& signal,
                                          const std::vector<int>& sample_indices);

double rmse_1d(const std::vector<double>& y, const std::vector<double>& yhat);

struct ToyReport {
  std::vector<std::vector<int>> random_patterns;  // endpoints first, then draws
  std::vector<double> random_rmse;
  double mean_random_rmse = 0.0;
  std::vector<double> q;             // expected squared error per grid point
  std::vector<int> adaptive_pattern; // endpoints first, then greedy picks
  double adaptive_rmse = 0.0;
};

// Random-vs-guided comparison: J random B-subsets build the expected-error
// profile Q, then a 1D greedy pass with kernel width sigma = N/(2B) places
// the adaptive pattern. Both endpoints are always sampled and count toward
// the budget.
ToyReport toy_run(const Signal1D& signal, int budget, int iters, std::uint64_t seed);

// Long-format CSV: series,index,t,value. Series: signal, q, recon_<j>,
// adaptive_recon, pattern_<j>, adaptive_pattern.
void write_toy_csv(const Signal1D& signal, const ToyReport& report,
                   const std::filesystem::path& path);

}  // namespace dsamp
