#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "dsamp/errors.hpp"
#include "dsamp/toy1d.hpp"

using namespace dsamp;

namespace {

Signal1D grid_signal(std::vector<double> values) {
  Signal1D s;
  const int n = static_cast<int>(values.size());
  for (int i = 0; i < n; ++i) s.positions.push_back(static_cast<double>(i) / (n - 1));
  s.values = std::move(values);
  return s;
}

std::vector<int> local_extrema(const std::vector<double>& y) {
  std::vector<int> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    const double left = y[i] - y[i - 1];
    const double right = y[i + 1] - y[i];
    if (left * right < 0.0) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("signal construction and validation") {
  Signal1D s = canonical_toy_signal();
  CHECK(s.size() == 200);
  s.validate();
  CHECK(s.positions.front() == 0.0);
  CHECK(s.positions.back() == 1.0);

  CHECK_THROWS_AS(Signal1D::from_sinusoids(1, {1.0}, {1.0}, {0.0}), DataError);
  CHECK_THROWS_AS(Signal1D::from_sinusoids(8, {1.0}, {1.0, 2.0}, {0.0}), DataError);
  Signal1D bad = grid_signal({1.0, 2.0, 3.0});
  bad.positions[2] = bad.positions[1];
  CHECK_THROWS_AS(bad.validate(), DataError);
}

TEST_CASE("piecewise-linear reconstruction with constant tails") {
  Signal1D s = grid_signal({0.0, 1.0, 4.0, 5.0, 8.0});
  CHECK(interpolate_linear_1d(s, {0, 2, 4}) ==
        std::vector<double>{0.0, 2.0, 4.0, 6.0, 8.0});
  CHECK(interpolate_linear_1d(s, {2}) == std::vector<double>(5, 4.0));
  std::vector<double> inner = interpolate_linear_1d(s, {1, 3});
  CHECK(inner[0] == 1.0);  // constant to the left of the first sample
  CHECK(inner[4] == 5.0);
  CHECK(inner[2] == 3.0);
  CHECK_THROWS_AS(interpolate_linear_1d(s, {}), DataError);
  CHECK_THROWS_AS(interpolate_linear_1d(s, {7}), DataError);
}

TEST_CASE("rmse over series") {
  CHECK(rmse_1d({0.0, 0.0}, {1.0, 1.0}) == doctest::Approx(1.0));
  CHECK(rmse_1d({1.0, 2.0}, {1.0, 2.0}) == 0.0);
  CHECK_THROWS_AS(rmse_1d({1.0}, {1.0, 2.0}), DataError);
}

TEST_CASE("affine signals reconstruct exactly once the endpoints are pinned") {
  Signal1D s = grid_signal({0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75});
  ToyReport r = toy_run(s, 4, 3, 11);
  for (double e : r.random_rmse) CHECK(e <= 1e-12);
  CHECK(r.adaptive_rmse <= 1e-12);
  for (double q : r.q) CHECK(q <= 1e-24);
}

TEST_CASE("constant signals have zero expected error") {
  Signal1D s = grid_signal(std::vector<double>(32, 3.0));
  ToyReport r = toy_run(s, 6, 5, 2);
  CHECK(r.mean_random_rmse == 0.0);
  CHECK(r.adaptive_rmse == 0.0);
  for (double q : r.q) CHECK(q == 0.0);
}

TEST_CASE("patterns include the endpoints and stay distinct") {
  ToyReport r = toy_run(canonical_toy_signal(), 15, 7, 3);
  REQUIRE(r.random_patterns.size() == 7);
  for (const auto& p : r.random_patterns) {
    CHECK(p.size() == 15);
    CHECK(std::set<int>(p.begin(), p.end()).size() == 15);
    CHECK(p[0] == 0);
    CHECK(p[1] == 199);
  }
  CHECK(r.adaptive_pattern.size() == 15);
  CHECK(std::set<int>(r.adaptive_pattern.begin(), r.adaptive_pattern.end()).size() == 15);
  CHECK(r.adaptive_pattern[0] == 0);
  CHECK(r.adaptive_pattern[1] == 199);
}

TEST_CASE("toy runs are deterministic in the seed") {
  ToyReport a = toy_run(canonical_toy_signal(), 15, 7, 42);
  ToyReport b = toy_run(canonical_toy_signal(), 15, 7, 42);
  CHECK(a.adaptive_pattern == b.adaptive_pattern);
  CHECK(a.random_rmse == b.random_rmse);
  CHECK(a.q == b.q);
  CHECK(a.adaptive_rmse == b.adaptive_rmse);
  ToyReport c = toy_run(canonical_toy_signal(), 15, 7, 43);
  CHECK(a.random_patterns != c.random_patterns);
}

TEST_CASE("guided sampling beats the random average two to one") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    ToyReport r = toy_run(canonical_toy_signal(), 15, 7, seed);
    CHECK(r.adaptive_rmse < r.mean_random_rmse / 2.0);
    CHECK(r.adaptive_rmse <= *std::min_element(r.random_rmse.begin(), r.random_rmse.end()));
  }
}

TEST_CASE("expected error peaks track the signal extrema") {
  Signal1D s = canonical_toy_signal();
  // Enough iterations that the Monte Carlo profile is smooth; the fast
  // default is too noisy for a local-maximum scan.
  ToyReport r = toy_run(s, 15, 800, 1);
  const int n = s.size();
  std::vector<int> extrema = local_extrema(s.values);
  REQUIRE(extrema.size() >= 5);  // multi-extremum by construction
  std::vector<int> peaks;
  for (int i = 1; i + 1 < n; ++i) {
    if (r.q[i] >= r.q[i - 1] && r.q[i] >= r.q[i + 1]) peaks.push_back(i);
  }
  // Each extremum has a nearby error peak. The peak is displaced from the
  // extremum by the width of a typical sample gap, so the window is wider
  // than the gradient step; extrema hard against the always-sampled
  // endpoints are washed out and skipped.
  for (int e : extrema) {
    if (e < 6 || e >= n - 6) continue;
    bool found = false;
    for (int p : peaks) found = found || std::abs(p - e) <= 4;
    CHECK(found);
  }
  // And conversely, every substantial error peak sits near some extremum.
  const double floor = 0.25 * *std::max_element(r.q.begin(), r.q.end());
  for (int p : peaks) {
    if (r.q[p] < floor) continue;
    bool found = false;
    for (int e : extrema) found = found || std::abs(p - e) <= 4;
    CHECK(found);
  }
}

TEST_CASE("degenerate toy budgets are rejected") {
  Signal1D s = grid_signal({0.0, 1.0, 2.0, 3.0});
  CHECK_THROWS_AS(toy_run(s, 1, 3, 0), DataError);
  CHECK_THROWS_AS(toy_run(s, 4, 3, 0), DataError);
  CHECK_THROWS_AS(toy_run(s, 3, 0, 0), DataError);
}

TEST_CASE("the toy report serializes as a long-format CSV") {
  Signal1D s = grid_signal({0.0, 1.0, 0.5, 2.0, 1.5, 3.0, 2.5, 4.0});
  ToyReport r = toy_run(s, 3, 2, 9);
  const auto path = std::filesystem::temp_directory_path() / "dsamp_toy.csv";
  write_toy_csv(s, r, path);
  const std::string text = slurp(path);
  CHECK(text.rfind("series,index,t,value\n", 0) == 0);
  CHECK(text.substr(text.find('\n') + 1).rfind("signal,0,0,0\n", 0) == 0);  // first data row
  CHECK(text.find("adaptive_pattern,0,0,0\n") != std::string::npos);
  const std::size_t lines = std::count(text.begin(), text.end(), '\n');
  // header + signal + q + J*(recon + pattern) + adaptive recon + pattern
  CHECK(lines == 1 + 8 + 8 + 2 * (8 + 3) + 8 + 3);
}
