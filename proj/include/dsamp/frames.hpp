#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace dsamp {

// Raster convention used throughout: x is the column, y is the row, the
// origin is the top-left pixel, and the linear index of (x, y) is
// y * width + x. Every container below stores row-major data.

struct PixelCoord {
  int x = 0;
  int y = 0;
  friend bool operator==(PixelCoord a, PixelCoord b) { return a.x == b.x && a.y == b.y; }
};

inline std::size_t linear_index(int x, int y, int width) {
  return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
         static_cast<std::size_t>(x);
}

struct PixelMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  static PixelMask filled(int width, int height, bool value);

  bool at(int x, int y) const { return data[linear_index(x, y, width)] != 0; }
  void set(int x, int y, bool v) { data[linear_index(x, y, width)] = v ? 1 : 0; }
  std::size_t count() const;
  void validate() const;
};

// Ground-truth depth in meters with an explicit validity mask. Data slots of
// invalid pixels are pinned to zero so a stray read cannot pass for a
// plausible measurement; sentinel encodings exist only inside files.
struct DepthFrame {
  int width = 0;
  int height = 0;
  std::vector<float> data;
  PixelMask valid;

  // All pixels valid; every value must be positive and finite.
  static DepthFrame dense(int width, int height, std::vector<float> depths);
  // Masked variant; values at masked-off pixels are forced to zero.
  static DepthFrame with_mask(int width, int height, std::vector<float> depths, PixelMask mask);

  float at(int x, int y) const { return data[linear_index(x, y, width)]; }
  bool is_valid(int x, int y) const { return valid.at(x, y); }
  std::size_t pixel_count() const { return data.size(); }
  // Linear indices of valid pixels in raster order.
  std::vector<std::uint32_t> valid_indices() const;
  void validate() const;
};

// Intensity image aligned with a DepthFrame; 1 or 3 channels, values in
// [0, 1], stored interleaved.
struct GuideImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;

  static GuideImage gray(int width, int height, std::vector<float> values);

  float channel_at(int x, int y, int c) const {
    return data[linear_index(x, y, width) * channels + c];
  }
  // Mean over channels; the single channel itself for grayscale.
  float intensity(int x, int y) const;
  void validate() const;
};

// Per-pixel nonnegative importance raster. Stored as float32 so that a map
// round-tripped through its file format compares equal to the in-memory one.
struct QMap {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  static QMap zeros(int width, int height);

  float at(int x, int y) const { return data[linear_index(x, y, width)]; }
  void validate() const;
};

// Dense prediction raster in meters (double precision working type).
struct DenseDepth {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  static DenseDepth zeros(int width, int height);

  double at(int x, int y) const { return data[linear_index(x, y, width)]; }
};

// Ordered list of sampled pixels. Order is meaningful: it is the selection
// rank assigned by the pattern generator. The budget is the coordinate count.
struct SamplePattern {
  std::vector<PixelCoord> coords;

  int budget() const { return static_cast<int>(coords.size()); }
};

// Bounds and distinctness.
void validate_pattern(const SamplePattern& pattern, int width, int height);
// Additionally requires every coordinate to sit on a valid pixel.
void validate_pattern(const SamplePattern& pattern, const PixelMask& valid);

enum class Metric { RMSE, REL, MAD };

Metric metric_from_string(const std::string& name);
const char* metric_name(Metric metric);

struct FrameworkConfig {
  int budget = 1;
  double depth_threshold = 100.0;
  Metric metric = Metric::RMSE;
  int mc_iterations = 100;
  double grid_fraction = 0.05;
  // Unset means: derive from the importance budget at sampling time.
  std::optional<double> sigma;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// ---------------------------------------------------------------------------
// File formats.
//
// Depth PFM: "Pf" magic (one channel), little-endian float32, values in
// meters, rows stored bottom-up, scale line -1.0. Non-positive or non-finite
// payload values load as invalid pixels; invalid pixels save as NaN. A
// save/load round trip reproduces data and mask bit-exactly.
//
// Depth PGM16: "P5" magic, maxval 65535, big-endian 16-bit, value is
// millimeters, 0 is the invalid sentinel. Saving clamps to 65.535 m and
// rounds to the nearest millimeter; with strict=true a frame containing
// depths beyond the representable range is rejected instead.
//
// Pattern CSV: header "x,y", one coordinate pair per row, file order is
// pattern order. Duplicate rows are a load error; bounds are checked at the
// time of use, not load.
// ---------------------------------------------------------------------------

enum class DepthFormat { PFM, PGM16 };

DepthFrame load_depth(const std::filesystem::path& path, DepthFormat format);
void save_depth(const DepthFrame& frame, const std::filesystem::path& path, DepthFormat format,
                bool strict = false);

// Guesses from the extension: .pfm / .pgm. Anything else is a DataError.
DepthFormat depth_format_for_path(const std::filesystem::path& path);

// Importance maps persist as PFM (negative values are rejected on load).
QMap load_qmap(const std::filesystem::path& path);
void save_qmap(const QMap& map, const std::filesystem::path& path);

// Guide images persist as PGM16 with intensity = value / 65535.
GuideImage load_guide(const std::filesystem::path& path);
void save_guide(const GuideImage& guide, const std::filesystem::path& path);

// Binary masks persist as PGM16, 0 or 65535.
PixelMask load_mask(const std::filesystem::path& path);
void save_mask(const PixelMask& mask, const std::filesystem::path& path);

SamplePattern load_pattern(const std::filesystem::path& path);
void save_pattern(const SamplePattern& pattern, const std::filesystem::path& path);

}  // namespace dsamp
