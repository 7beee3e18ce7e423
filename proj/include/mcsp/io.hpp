#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mcsp/adaptive.hpp"
#include "mcsp/aggregation.hpp"
#include "mcsp/color.hpp"
#include "mcsp/features.hpp"
#include "mcsp/labeling.hpp"
#include "mcsp/raster.hpp"

namespace mcsp {

using Bytes = std::vector<std::uint8_t>;

/// Malformed or truncated file content; offset is the byte where decoding
/// failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset);
  std::size_t offset;
};

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Binary PPM (P6, maxval 255) and PGM (P5, maxval up to 65535).

Image decode_ppm(std::span<const std::uint8_t> bytes);
Bytes encode_ppm(const Image& img);
Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& img);

struct GrayImage {
  Raster<std::uint16_t> values;
  int maxval = 255;
};
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);
Bytes encode_pgm(const Raster<std::uint8_t>& values);

// SPL1 label maps: "SPL1", height, width (u32 LE), then H*W u32 LE labels in
// raster order; kUncertain marks uncertain pixels.

LabelRaster decode_spl1(std::span<const std::uint8_t> bytes);
Bytes encode_spl1(const LabelRaster& labels);
LabelRaster read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const LabelRaster& labels);

// SPM1 mask stacks: "SPM1", n, height, width (u32 LE), then n rasters of H*W
// bytes, nonzero = member.

MaskStack decode_spm1(std::span<const std::uint8_t> bytes);
Bytes encode_spm1(const MaskStack& stack);
/// SPM1 file, or a directory of P5 PGM masks read in lexicographic order.
MaskStack read_masks(const std::filesystem::path& path);

// SPF1 feature stacks: "SPF1", height, width, depth (u32 LE), then H*W*D
// float32 LE, channel-major. Non-finite values are rejected.

FeatureStack decode_spf1(std::span<const std::uint8_t> bytes);
Bytes encode_spf1(const FeatureStack& features);
FeatureStack read_features(const std::filesystem::path& path);

/// P5 PGM scaled by 1 / maxval, or SPF1 with depth 1.
SaliencyMap read_saliency(const std::filesystem::path& path);

/// 8-bit RGB PNG (zlib-compressed, no filtering).
Bytes encode_png(const Image& img);

/// Source image with superpixel boundary pixels painted pure red.
Image render_overlay(const Image& img, const LabelRaster& labels);

/// Run-length pairs (label, run) in raster order.
std::vector<std::pair<std::uint32_t, std::uint32_t>> rle_encode(const LabelRaster& labels);
LabelRaster rle_decode(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& runs, Dims dims);

}  // namespace mcsp
