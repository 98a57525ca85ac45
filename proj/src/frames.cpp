#include "dsamp/frames.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_set>

#include "dsamp/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "raw float raster IO assumes a little-endian host");
static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

namespace dsamp {

namespace {

std::string path_str(const std::filesystem::path& p) { return p.string(); }

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t offset,
                       const std::string& what) {
  throw DataError(path_str(path) + ": " + what + " (byte " + std::to_string(offset) + ")");
}

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path_str(path));
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError("read failure on " + path_str(path));
  return bytes;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path_str(path) + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw DataError("write failure on " + path_str(path));
}

// Cursor over a loaded file that keeps the byte offset for error messages.
struct ByteReader {
  const std::filesystem::path& path;
  const std::vector<char>& bytes;
  std::size_t pos = 0;

  bool eof() const { return pos >= bytes.size(); }
  char peek() const { return bytes[pos]; }

  void skip_header_space(bool allow_comments) {
    while (!eof()) {
      char c = peek();
      if (c == '#' && allow_comments) {
        while (!eof() && peek() != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
        ++pos;
      } else {
        break;
      }
    }
  }

  std::string token(bool allow_comments, const char* what) {
    skip_header_space(allow_comments);
    if (eof()) fail(path, pos, std::string("missing ") + what);
    std::size_t start = pos;
    while (!eof() && !std::isspace(static_cast<unsigned char>(peek()))) ++pos;
    return std::string(bytes.begin() + start, bytes.begin() + pos);
  }

  int int_token(bool allow_comments, const char* what) {
    skip_header_space(allow_comments);
    std::size_t at = pos;
    std::string t = token(allow_comments, what);
    try {
      std::size_t used = 0;
      int v = std::stoi(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      fail(path, at, std::string("malformed ") + what + " '" + t + "'");
    }
  }

  double float_token(bool allow_comments, const char* what) {
    skip_header_space(allow_comments);
    std::size_t at = pos;
    std::string t = token(allow_comments, what);
    try {
      std::size_t used = 0;
      double v = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      fail(path, at, std::string("malformed ") + what + " '" + t + "'");
    }
  }

  // The single whitespace byte that separates the header from the payload.
  void expect_payload_separator() {
    if (eof() || !std::isspace(static_cast<unsigned char>(peek())))
      fail(path, pos, "expected whitespace before payload");
    ++pos;
  }

  void need(std::size_t n, const char* what) {
    if (bytes.size() - pos < n) fail(path, bytes.size(), std::string("truncated ") + what);
  }
};

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0)
    throw DataError("raster dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
}

// Shared P5 header parse; returns dimensions, leaves the reader at the payload.
void parse_pgm16_header(ByteReader& r, int& width, int& height) {
  std::string magic = r.token(true, "magic");
  if (magic != "P5") fail(r.path, 0, "unsupported magic '" + magic + "', expected P5");
  width = r.int_token(true, "width");
  height = r.int_token(true, "height");
  if (width <= 0 || height <= 0) fail(r.path, r.pos, "non-positive dimensions");
  std::size_t maxval_at = r.pos;
  int maxval = r.int_token(true, "maxval");
  if (maxval != 65535) fail(r.path, maxval_at, "unsupported maxval " + std::to_string(maxval));
  r.expect_payload_separator();
}

std::vector<std::uint16_t> read_pgm16_payload(ByteReader& r, int width, int height) {
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  r.need(n * 2, "payload");
  std::vector<std::uint16_t> out(n);
  const unsigned char* p = reinterpret_cast<const unsigned char*>(r.bytes.data() + r.pos);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
  }
  r.pos += n * 2;
  return out;
}

std::string pgm16_header(int width, int height) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "P5\n%d %d\n65535\n", width, height);
  return buf;
}

void append_pgm16_payload(std::string& out, const std::vector<std::uint16_t>& values) {
  out.reserve(out.size() + values.size() * 2);
  for (std::uint16_t v : values) {
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xff));
  }
}

struct PfmData {
  int width = 0;
  int height = 0;
  std::vector<float> values;  // top-down row-major
};

PfmData load_pfm(const std::filesystem::path& path) {
  std::vector<char> bytes = read_file(path);
  ByteReader r{path, bytes};
  std::string magic = r.token(false, "magic");
  if (magic == "PF") fail(path, 0, "3-channel PFM not supported, expected grayscale Pf");
  if (magic != "Pf") fail(path, 0, "unsupported magic '" + magic + "', expected Pf");
  PfmData d;
  d.width = r.int_token(false, "width");
  d.height = r.int_token(false, "height");
  if (d.width <= 0 || d.height <= 0) fail(path, r.pos, "non-positive dimensions");
  std::size_t scale_at = r.pos;
  double scale = r.float_token(false, "scale");
  if (scale >= 0) fail(path, scale_at, "big-endian PFM not supported (scale must be negative)");
  r.expect_payload_separator();
  const std::size_t n = static_cast<std::size_t>(d.width) * static_cast<std::size_t>(d.height);
  r.need(n * 4, "payload");
  d.values.resize(n);
  for (int y = 0; y < d.height; ++y) {
    const char* src =
        bytes.data() + r.pos + static_cast<std::size_t>(d.height - 1 - y) * d.width * 4;
    std::memcpy(d.values.data() + static_cast<std::size_t>(y) * d.width, src,
                static_cast<std::size_t>(d.width) * 4);
  }
  return d;
}

void save_pfm(const std::filesystem::path& path, int width, int height,
              const std::vector<float>& values) {
  char header[64];
  std::snprintf(header, sizeof(header), "Pf\n%d %d\n-1.0\n", width, height);
  std::string out = header;
  out.reserve(out.size() + values.size() * 4);
  for (int y = height - 1; y >= 0; --y) {
    const char* row = reinterpret_cast<const char*>(values.data() + linear_index(0, y, width));
    out.append(row, static_cast<std::size_t>(width) * 4);
  }
  write_file(path, out);
}

}  // namespace

PixelMask PixelMask::filled(int width, int height, bool value) {
  check_dims(width, height);
  PixelMask m;
  m.width = width;
  m.height = height;
  m.data.assign(static_cast<std::size_t>(width) * height, value ? 1 : 0);
  return m;
}

std::size_t PixelMask::count() const {
  std::size_t n = 0;
  for (std::uint8_t v : data) n += (v != 0);
  return n;
}

void PixelMask::validate() const {
  check_dims(width, height);
  if (data.size() != static_cast<std::size_t>(width) * height)
    throw DataError("mask data size does not match dimensions");
}

DepthFrame DepthFrame::dense(int width, int height, std::vector<float> depths) {
  return with_mask(width, height, std::move(depths), PixelMask::filled(width, height, true));
}

DepthFrame DepthFrame::with_mask(int width, int height, std::vector<float> depths,
                                 PixelMask mask) {
  check_dims(width, height);
  DepthFrame f;
  f.width = width;
  f.height = height;
  f.data = std::move(depths);
  f.valid = std::move(mask);
  for (std::size_t i = 0; i < f.data.size() && i < f.valid.data.size(); ++i) {
    if (!f.valid.data[i]) f.data[i] = 0.0f;
  }
  f.validate();
  return f;
}

std::vector<std::uint32_t> DepthFrame::valid_indices() const {
  std::vector<std::uint32_t> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (valid.data[i]) out.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

void DepthFrame::validate() const {
  check_dims(width, height);
  if (data.size() != static_cast<std::size_t>(width) * height)
    throw DataError("depth data size does not match dimensions");
  valid.validate();
  if (valid.width != width || valid.height != height)
    throw DataError("validity mask dimensions do not match frame");
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (valid.data[i]) {
      if (!std::isfinite(data[i]) || data[i] <= 0.0f)
        throw DataError("valid pixel " + std::to_string(i) + " holds non-positive depth");
    } else if (data[i] != 0.0f) {
      throw DataError("invalid pixel " + std::to_string(i) + " holds a nonzero data slot");
    }
  }
}

GuideImage GuideImage::gray(int width, int height, std::vector<float> values) {
  GuideImage g;
  g.width = width;
  g.height = height;
  g.channels = 1;
  g.data = std::move(values);
  g.validate();
  return g;
}

float GuideImage::intensity(int x, int y) const {
  if (channels == 1) return data[linear_index(x, y, width)];
  const std::size_t base = linear_index(x, y, width) * channels;
  float sum = 0.0f;
  for (int c = 0; c < channels; ++c) sum += data[base + c];
  return sum / static_cast<float>(channels);
}

void GuideImage::validate() const {
  check_dims(width, height);
  if (channels != 1 && channels != 3)
    throw DataError("guide images must have 1 or 3 channels, got " + std::to_string(channels));
  if (data.size() != static_cast<std::size_t>(width) * height * channels)
    throw DataError("guide data size does not match dimensions");
  for (float v : data) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
      throw DataError("guide intensities must lie in [0, 1]");
  }
}

QMap QMap::zeros(int width, int height) {
  check_dims(width, height);
  QMap q;
  q.width = width;
  q.height = height;
  q.data.assign(static_cast<std::size_t>(width) * height, 0.0f);
  return q;
}

void QMap::validate() const {
  check_dims(width, height);
  if (data.size() != static_cast<std::size_t>(width) * height)
    throw DataError("importance map size does not match dimensions");
  for (float v : data) {
    if (!std::isfinite(v) || v < 0.0f) throw DataError("importance values must be finite and >= 0");
  }
}

DenseDepth DenseDepth::zeros(int width, int height) {
  check_dims(width, height);
  DenseDepth d;
  d.width = width;
  d.height = height;
  d.data.assign(static_cast<std::size_t>(width) * height, 0.0);
  return d;
}

void validate_pattern(const SamplePattern& pattern, int width, int height) {
  check_dims(width, height);
  std::unordered_set<std::size_t> seen;
  seen.reserve(pattern.coords.size() * 2);
  for (const PixelCoord& c : pattern.coords) {
    if (c.x < 0 || c.x >= width || c.y < 0 || c.y >= height)
      throw DataError("pattern coordinate (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                      ") out of bounds for " + std::to_string(width) + "x" +
                      std::to_string(height));
    if (!seen.insert(linear_index(c.x, c.y, width)).second)
      throw DataError("pattern contains duplicate coordinate (" + std::to_string(c.x) + "," +
                      std::to_string(c.y) + ")");
  }
}

void validate_pattern(const SamplePattern& pattern, const PixelMask& valid) {
  validate_pattern(pattern, valid.width, valid.height);
  for (const PixelCoord& c : pattern.coords) {
    if (!valid.at(c.x, c.y))
      throw DataError("pattern coordinate (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                      ") lies on an invalid pixel");
  }
}

Metric metric_from_string(const std::string& name) {
  if (name == "rmse" || name == "RMSE") return Metric::RMSE;
  if (name == "rel" || name == "REL") return Metric::REL;
  if (name == "mad" || name == "MAD") return Metric::MAD;
  throw DataError("unknown metric '" + name + "' (expected rmse, rel, or mad)");
}

const char* metric_name(Metric metric) {
  switch (metric) {
    case Metric::RMSE: return "RMSE";
    case Metric::REL: return "REL";
    case Metric::MAD: return "MAD";
  }
  throw InternalError("unhandled metric enum value");
}

void FrameworkConfig::validate() const {
  if (budget < 1) throw DataError("budget must be >= 1");
  if (!(depth_threshold > 0)) throw DataError("depth threshold must be positive");
  if (mc_iterations < 1) throw DataError("iteration count must be >= 1");
  if (grid_fraction < 0.0 || grid_fraction > 1.0)
    throw DataError("grid fraction must lie in [0, 1]");
  if (sigma && !(*sigma > 0)) throw DataError("sigma must be positive");
}

DepthFormat depth_format_for_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".pfm") return DepthFormat::PFM;
  if (ext == ".pgm") return DepthFormat::PGM16;
  throw DataError("cannot infer depth format from '" + path.string() +
                  "' (expected .pfm or .pgm, or pass --format)");
}

DepthFrame load_depth(const std::filesystem::path& path, DepthFormat format) {
  if (format == DepthFormat::PFM) {
    PfmData d = load_pfm(path);
    PixelMask mask = PixelMask::filled(d.width, d.height, true);
    for (std::size_t i = 0; i < d.values.size(); ++i) {
      if (!std::isfinite(d.values[i]) || d.values[i] <= 0.0f) {
        mask.data[i] = 0;
        d.values[i] = 0.0f;
      }
    }
    return DepthFrame::with_mask(d.width, d.height, std::move(d.values), std::move(mask));
  }
  std::vector<char> bytes = read_file(path);
  ByteReader r{path, bytes};
  int width = 0, height = 0;
  parse_pgm16_header(r, width, height);
  std::vector<std::uint16_t> mm = read_pgm16_payload(r, width, height);
  std::vector<float> depths(mm.size());
  PixelMask mask = PixelMask::filled(width, height, true);
  for (std::size_t i = 0; i < mm.size(); ++i) {
    if (mm[i] == 0) {
      mask.data[i] = 0;
      depths[i] = 0.0f;
    } else {
      depths[i] = static_cast<float>(mm[i]) / 1000.0f;
    }
  }
  return DepthFrame::with_mask(width, height, std::move(depths), std::move(mask));
}

void save_depth(const DepthFrame& frame, const std::filesystem::path& path, DepthFormat format,
                bool strict) {
  frame.validate();
  if (format == DepthFormat::PFM) {
    std::vector<float> values = frame.data;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!frame.valid.data[i]) values[i] = std::numeric_limits<float>::quiet_NaN();
    }
    save_pfm(path, frame.width, frame.height, values);
    return;
  }
  std::vector<std::uint16_t> mm(frame.data.size(), 0);
  for (std::size_t i = 0; i < frame.data.size(); ++i) {
    if (!frame.valid.data[i]) continue;
    const long long rounded = std::llround(static_cast<double>(frame.data[i]) * 1000.0);
    if (rounded > 65535) {
      if (strict)
        throw DataError("depth " + std::to_string(frame.data[i]) +
                        " m exceeds the 65.535 m PGM16 range");
      mm[i] = 65535;
    } else if (rounded < 1) {
      // A valid depth that rounds to the sentinel is clamped to the smallest
      // representable measurement rather than silently invalidated.
      mm[i] = 1;
    } else {
      mm[i] = static_cast<std::uint16_t>(rounded);
    }
  }
  std::string out = pgm16_header(frame.width, frame.height);
  append_pgm16_payload(out, mm);
  write_file(path, out);
}

QMap load_qmap(const std::filesystem::path& path) {
  PfmData d = load_pfm(path);
  QMap q;
  q.width = d.width;
  q.height = d.height;
  q.data = std::move(d.values);
  q.validate();
  return q;
}

void save_qmap(const QMap& map, const std::filesystem::path& path) {
  map.validate();
  save_pfm(path, map.width, map.height, map.data);
}

GuideImage load_guide(const std::filesystem::path& path) {
  std::vector<char> bytes = read_file(path);
  ByteReader r{path, bytes};
  int width = 0, height = 0;
  parse_pgm16_header(r, width, height);
  std::vector<std::uint16_t> raw = read_pgm16_payload(r, width, height);
  std::vector<float> values(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    values[i] = static_cast<float>(raw[i]) / 65535.0f;
  return GuideImage::gray(width, height, std::move(values));
}

void save_guide(const GuideImage& guide, const std::filesystem::path& path) {
  guide.validate();
  if (guide.channels != 1)
    throw DataError("only single-channel guide images can be saved as PGM");
  std::vector<std::uint16_t> raw(guide.data.size());
  for (std::size_t i = 0; i < guide.data.size(); ++i)
    raw[i] = static_cast<std::uint16_t>(std::lround(guide.data[i] * 65535.0f));
  std::string out = pgm16_header(guide.width, guide.height);
  append_pgm16_payload(out, raw);
  write_file(path, out);
}

PixelMask load_mask(const std::filesystem::path& path) {
  std::vector<char> bytes = read_file(path);
  ByteReader r{path, bytes};
  int width = 0, height = 0;
  parse_pgm16_header(r, width, height);
  std::vector<std::uint16_t> raw = read_pgm16_payload(r, width, height);
  PixelMask m = PixelMask::filled(width, height, false);
  for (std::size_t i = 0; i < raw.size(); ++i) m.data[i] = raw[i] != 0 ? 1 : 0;
  return m;
}

void save_mask(const PixelMask& mask, const std::filesystem::path& path) {
  mask.validate();
  std::vector<std::uint16_t> raw(mask.data.size());
  for (std::size_t i = 0; i < mask.data.size(); ++i) raw[i] = mask.data[i] ? 65535 : 0;
  std::string out = pgm16_header(mask.width, mask.height);
  append_pgm16_payload(out, raw);
  write_file(path, out);
}

SamplePattern load_pattern(const std::filesystem::path& path) {
  std::vector<char> bytes = read_file(path);
  std::string text(bytes.begin(), bytes.end());
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path_str(path) + ": empty pattern file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y")
    throw DataError(path_str(path) + ": expected header 'x,y', got '" + line + "'");
  SamplePattern pattern;
  std::unordered_set<long long> seen;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    int x = 0, y = 0;
    char trailing = 0;
    if (std::sscanf(line.c_str(), "%d,%d%c", &x, &y, &trailing) != 2)
      throw DataError(path_str(path) + ": malformed row " + std::to_string(row) + " '" + line +
                      "'");
    const long long key = static_cast<long long>(y) * 0x40000000LL + x;
    if (!seen.insert(key).second)
      throw DataError(path_str(path) + ": duplicate coordinate (" + std::to_string(x) + "," +
                      std::to_string(y) + ") at row " + std::to_string(row));
    pattern.coords.push_back({x, y});
  }
  return pattern;
}

void save_pattern(const SamplePattern& pattern, const std::filesystem::path& path) {
  std::string out = "x,y\n";
  for (const PixelCoord& c : pattern.coords) {
    out += std::to_string(c.x);
    out += ',';
    out += std::to_string(c.y);
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace dsamp
