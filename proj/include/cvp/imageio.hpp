#pragma once

// Binary portable graymap/pixmap (P5/P6) and point-set CSV I/O.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cvp/dataterm.hpp"
#include "cvp/field.hpp"
#include "cvp/geometry.hpp"

namespace cvp {

/// Raw samples of a P5/P6 file before scaling.
struct Pnm {
  Grid2D grid;
  int channels = 1;
  int maxval = 255;
  std::vector<std::uint16_t> samples;  ///< interleaved per pixel
};

/// Parses P5 or P6 with maxval 1..65535 (16-bit samples are big-endian).
/// Throws InputError on anything else, including truncated data.
Pnm parse_pnm(std::string_view bytes);
Pnm read_pnm(const std::filesystem::path& path);

/// Samples divided by maxval.
Image to_image(const Pnm& pnm);

/// Scribble image: gray sample n in 1..P+1 is class n-1, 0 is unlabeled.
/// `classes` <= 0 takes the largest value present.
ScribbleSet to_scribbles(const Pnm& pnm, int classes = 0);

std::string encode_pgm(const Grid2D& grid, const std::vector<std::uint8_t>& samples);
/// Mask as P5 with values 0 and 255.
std::string encode_mask(const RegionMask& mask);
/// Label map as P5 with the label index as the sample value.
std::string encode_labels(const Grid2D& grid, const std::vector<int>& labels);

RegionMask read_mask(const std::filesystem::path& path);
/// Any nonzero sample is set.
RegionMask to_mask(const Pnm& pnm);

/// Two real columns x,y per line. Blank lines and lines starting with '#'
/// are skipped, and a first line that does not parse as numbers is taken as
/// a header.
PointSet parse_points_csv(std::string_view text);
PointSet read_points_csv(const std::filesystem::path& path);
std::string encode_polygon_csv(const Polygon& poly);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

}  // namespace cvp
