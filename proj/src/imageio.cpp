#include "cvp/imageio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cvp/errors.hpp"

namespace cvp {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view b) : b_(b) {}

  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      const char c = b_[pos_];
      if (c == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long number() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) ++pos_;
    if (start == pos_) throw InputError("malformed PNM header");
    long v = 0;
    auto [p, ec] = std::from_chars(b_.data() + start, b_.data() + pos_, v);
    if (ec != std::errc()) throw InputError("malformed PNM header");
    return v;
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t raster_start() {
    if (pos_ >= b_.size() || !std::isspace(static_cast<unsigned char>(b_[pos_]))) {
      throw InputError("malformed PNM header");
    }
    return pos_ + 1;
  }

 private:
  std::string_view b_;
  std::size_t pos_ = 2;
};

std::vector<int> gray_values(const Pnm& pnm) {
  if (pnm.channels != 1) throw InputError("expected a graymap (P5)");
  return {pnm.samples.begin(), pnm.samples.end()};
}

}  // namespace

Pnm parse_pnm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw InputError("not a binary PGM/PPM (P5/P6) file");
  }
  HeaderReader h(bytes);
  const long w = h.number();
  const long ht = h.number();
  const long maxval = h.number();
  if (w < 1 || ht < 1 || w > 65535 || ht > 65535) throw InputError("PNM dimensions out of range");
  if (maxval < 1 || maxval > 65535) throw InputError("PNM maxval out of range");
  const std::size_t start = h.raster_start();

  Pnm out;
  out.channels = bytes[1] == '6' ? 3 : 1;
  out.maxval = static_cast<int>(maxval);
  const std::size_t count = static_cast<std::size_t>(w) * ht * out.channels;
  const std::size_t width = maxval > 255 ? 2 : 1;
  if (bytes.size() - start < count * width) throw InputError("PNM raster is truncated");
  if (w < 8 || ht < 8) throw ValidationError("image must be at least 8x8");
  out.grid = Grid2D(static_cast<int>(ht), static_cast<int>(w));
  out.samples.resize(count);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + start);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint16_t v = width == 2 ? static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]) : p[i];
    if (v > maxval) throw InputError("PNM sample exceeds maxval");
    out.samples[i] = v;
  }
  return out;
}

Pnm read_pnm(const std::filesystem::path& path) { return parse_pnm(read_file(path)); }

Image to_image(const Pnm& pnm) {
  std::vector<double> v(pnm.samples.size());
  const double m = pnm.maxval;
  std::transform(pnm.samples.begin(), pnm.samples.end(), v.begin(), [m](std::uint16_t s) { return s / m; });
  return Image(pnm.grid, pnm.channels, std::move(v));
}

ScribbleSet to_scribbles(const Pnm& pnm, int classes) {
  const std::vector<int> labels = gray_values(pnm);
  const int top = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
  if (classes <= 0) classes = top;
  if (classes < 2) throw ValidationError("scribble image must mark at least 2 classes");
  if (top > classes) throw ValidationError("scribble value " + std::to_string(top) + " exceeds class count");
  return ScribbleSet::from_label_image(pnm.grid, labels, classes);
}

std::string encode_pgm(const Grid2D& grid, const std::vector<std::uint8_t>& samples) {
  std::string out = "P5\n" + std::to_string(grid.width()) + " " + std::to_string(grid.height()) + "\n255\n";
  out.append(samples.begin(), samples.end());
  return out;
}

std::string encode_mask(const RegionMask& mask) {
  std::vector<std::uint8_t> s(mask.bits().size());
  std::transform(mask.bits().begin(), mask.bits().end(), s.begin(), [](std::uint8_t b) { return b ? 255 : 0; });
  return encode_pgm(mask.grid(), s);
}

std::string encode_labels(const Grid2D& grid, const std::vector<int>& labels) {
  std::vector<std::uint8_t> s(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) s[i] = static_cast<std::uint8_t>(std::clamp(labels[i], 0, 255));
  return encode_pgm(grid, s);
}

RegionMask to_mask(const Pnm& pnm) {
  const std::vector<int> v = gray_values(pnm);
  RegionMask m(pnm.grid);
  for (std::size_t i = 0; i < v.size(); ++i) m.bits()[i] = v[i] != 0;
  return m;
}

RegionMask read_mask(const std::filesystem::path& path) { return to_mask(read_pnm(path)); }

PointSet parse_points_csv(std::string_view text) {
  PointSet out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double x = 0.0, y = 0.0;
    std::string rest;
    if (!(fields >> x >> y) || (fields >> rest)) {
      if (!seen_data && out.points.empty() && line_no == 1) continue;
      throw InputError("bad point on line " + std::to_string(line_no));
    }
    if (!std::isfinite(x) || !std::isfinite(y)) throw InputError("non-finite point on line " + std::to_string(line_no));
    seen_data = true;
    out.points.push_back({x, y});
  }
  if (out.points.empty()) throw InputError("point file is empty");
  return out;
}

PointSet read_points_csv(const std::filesystem::path& path) { return parse_points_csv(read_file(path)); }

std::string encode_polygon_csv(const Polygon& poly) {
  std::string out = "x,y\n";
  char buf[64];
  for (const auto& p : poly.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.x, p.y);
    out += buf;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open " + path.string());
  std::string s((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (f.bad()) throw InputError("cannot read " + path.string());
  return s;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw InputError("cannot write " + path.string());
}

namespace {
constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}
}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) | (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                       static_cast<unsigned char>(bytes[i + 2]);
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += kB64[v & 63];
  }
  const std::size_t rem = bytes.size() - i;
  if (rem > 0) {
    unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
    if (rem == 2) v |= static_cast<unsigned char>(bytes[i + 1]) << 8;
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += rem == 2 ? kB64[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  std::string out;
  unsigned acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    const int v = b64_value(c);
    if (v < 0) throw InputError("invalid base64");
    acc = (acc << 6) | static_cast<unsigned>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out += static_cast<char>((acc >> bits) & 0xFF);
    }
  }
  return out;
}

}  // namespace cvp
