#include "mcsp/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "mcsp/metrics.hpp"

namespace mcsp {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

// Cursor over a byte buffer that reports failures with the current offset.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void expect_magic(std::string_view magic, const std::string& what) {
    if (remaining() < magic.size() || std::memcmp(bytes_.data(), magic.data(), magic.size()) != 0)
      throw FormatError(what, 0);
    pos_ += magic.size();
  }

  std::uint32_t u32(const char* field) {
    if (remaining() < 4) throw FormatError(std::string("unexpected end of header reading ") + field, pos_);
    const std::uint32_t v = std::uint32_t(bytes_[pos_]) | std::uint32_t(bytes_[pos_ + 1]) << 8 |
                            std::uint32_t(bytes_[pos_ + 2]) << 16 | std::uint32_t(bytes_[pos_ + 3]) << 24;
    pos_ += 4;
    return v;
  }

  // Exactly `n` payload bytes must remain.
  std::span<const std::uint8_t> payload(std::size_t n, const char* what) {
    if (remaining() < n) throw FormatError(std::string("unexpected end of ") + what, bytes_.size());
    if (remaining() > n) throw FormatError("trailing data after " + std::string(what), pos_ + n);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  // Netpbm header token: skips whitespace and comments, reads a decimal number.
  std::uint32_t netpbm_number(const char* field) {
    for (;;) {
      if (remaining() == 0) throw FormatError(std::string("unexpected end of header reading ") + field, pos_);
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (remaining() > 0 && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
    if (!std::isdigit(bytes_[pos_])) throw FormatError(std::string("malformed header field ") + field, pos_);
    std::uint64_t v = 0;
    while (remaining() > 0 && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 0xFFFFFFFFu) throw FormatError(std::string("header field out of range: ") + field, pos_);
    }
    return static_cast<std::uint32_t>(v);
  }

  void single_whitespace() {
    if (remaining() == 0 || !std::isspace(bytes_[pos_])) throw FormatError("missing whitespace after header", pos_);
    ++pos_;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_u32(Bytes& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_u32_be(Bytes& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

struct NetpbmHeader {
  std::uint32_t width;
  std::uint32_t height;
  std::uint32_t maxval;
};

NetpbmHeader netpbm_header(Reader& r, std::string_view magic) {
  r.expect_magic(magic, "not a " + std::string(magic) + " file");
  NetpbmHeader h{r.netpbm_number("width"), r.netpbm_number("height"), r.netpbm_number("maxval")};
  r.single_whitespace();
  if (h.width == 0 || h.height == 0) throw FormatError("image dimensions must be positive", r.offset());
  if (h.maxval == 0 || h.maxval > 65535) throw FormatError("maxval out of range", r.offset());
  return h;
}

Bytes netpbm_prefix(std::string_view magic, int width, int height, int maxval) {
  const std::string head = std::string(magic) + "\n" + std::to_string(width) + " " + std::to_string(height) + "\n" +
                           std::to_string(maxval) + "\n";
  return Bytes(head.begin(), head.end());
}

Dims checked_dims(std::uint32_t height, std::uint32_t width, std::size_t offset) {
  if (width == 0 || height == 0 || width > (1u << 20) || height > (1u << 20))
    throw FormatError("raster dimensions out of range", offset);
  return {static_cast<int>(width), static_cast<int>(height)};
}

void append_chunk(Bytes& png, const char* type, const Bytes& data) {
  put_u32_be(png, static_cast<std::uint32_t>(data.size()));
  const std::size_t start = png.size();
  png.insert(png.end(), type, type + 4);
  png.insert(png.end(), data.begin(), data.end());
  const uLong crc = crc32(0L, png.data() + start, static_cast<uInt>(png.size() - start));
  put_u32_be(png, static_cast<std::uint32_t>(crc));
}

}  // namespace

FormatError::FormatError(const std::string& what, std::size_t off)
    : std::runtime_error(what + " (byte offset " + std::to_string(off) + ")"), offset(off) {}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Image decode_ppm(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const NetpbmHeader h = netpbm_header(r, "P6");
  if (h.maxval != 255) throw FormatError("only maxval 255 is supported for P6", r.offset());
  const Dims d = checked_dims(h.height, h.width, r.offset());
  return Image(d.width, d.height, r.payload(d.size() * 3, "pixel data"));
}

Bytes encode_ppm(const Image& img) {
  Bytes out = netpbm_prefix("P6", img.width(), img.height(), 255);
  out.insert(out.end(), img.rgb().data(), img.rgb().data() + img.size() * 3);
  return out;
}

Image read_image(const std::filesystem::path& path) { return decode_ppm(read_file(path)); }
void write_image(const std::filesystem::path& path, const Image& img) { write_file(path, encode_ppm(img)); }

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const NetpbmHeader h = netpbm_header(r, "P5");
  const Dims d = checked_dims(h.height, h.width, r.offset());
  const std::size_t bpp = h.maxval > 255 ? 2 : 1;
  const auto data = r.payload(d.size() * bpp, "pixel data");
  GrayImage g{Raster<std::uint16_t>(d.height, d.width), static_cast<int>(h.maxval)};
  for (std::size_t i = 0; i < d.size(); ++i)
    g.values.data()[i] = bpp == 1 ? data[i] : static_cast<std::uint16_t>(data[2 * i] << 8 | data[2 * i + 1]);
  return g;
}

Bytes encode_pgm(const Raster<std::uint8_t>& values) {
  Bytes out = netpbm_prefix("P5", static_cast<int>(values.cols()), static_cast<int>(values.rows()), 255);
  out.insert(out.end(), values.data(), values.data() + values.size());
  return out;
}

LabelRaster decode_spl1(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.expect_magic("SPL1", "not an SPL1 file");
  const std::uint32_t h = r.u32("height");
  const std::uint32_t w = r.u32("width");
  const Dims d = checked_dims(h, w, r.offset());
  const auto data = r.payload(d.size() * 4, "label data");
  LabelRaster out(d.height, d.width);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::uint8_t* p = data.data() + 4 * i;
    out.data()[i] = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
  }
  return out;
}

Bytes encode_spl1(const LabelRaster& labels) {
  Bytes out{'S', 'P', 'L', '1'};
  out.reserve(12 + 4 * static_cast<std::size_t>(labels.size()));
  put_u32(out, static_cast<std::uint32_t>(labels.rows()));
  put_u32(out, static_cast<std::uint32_t>(labels.cols()));
  for (Eigen::Index i = 0; i < labels.size(); ++i) put_u32(out, labels.data()[i]);
  return out;
}

LabelRaster read_labels(const std::filesystem::path& path) { return decode_spl1(read_file(path)); }
void write_labels(const std::filesystem::path& path, const LabelRaster& labels) { write_file(path, encode_spl1(labels)); }

MaskStack decode_spm1(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.expect_magic("SPM1", "not an SPM1 file");
  const std::uint32_t n = r.u32("mask count");
  const std::uint32_t h = r.u32("height");
  const std::uint32_t w = r.u32("width");
  const Dims d = checked_dims(h, w, r.offset());
  if (n > 0 && d.size() > r.remaining() / n) throw FormatError("unexpected end of mask data", bytes.size());
  const auto data = r.payload(d.size() * n, "mask data");
  MaskStack out{d, {}};
  for (std::uint32_t k = 0; k < n; ++k) {
    BinaryRaster m(d.height, d.width);
    for (std::size_t i = 0; i < d.size(); ++i) m.data()[i] = data[k * d.size() + i] != 0;
    out.masks.push_back(std::move(m));
  }
  return out;
}

Bytes encode_spm1(const MaskStack& stack) {
  Bytes out{'S', 'P', 'M', '1'};
  put_u32(out, static_cast<std::uint32_t>(stack.size()));
  put_u32(out, static_cast<std::uint32_t>(stack.dims.height));
  put_u32(out, static_cast<std::uint32_t>(stack.dims.width));
  for (const auto& m : stack.masks)
    for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data()[i] != 0 ? 1 : 0);
  return out;
}

MaskStack read_masks(const std::filesystem::path& path) {
  if (!std::filesystem::is_directory(path)) return decode_spm1(read_file(path));
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(path))
    if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  MaskStack out;
  for (const auto& f : files) {
    const GrayImage g = decode_pgm(read_file(f));
    const Dims d = dims_of(g.values);
    if (out.masks.empty())
      out.dims = d;
    else if (d != out.dims)
      throw std::runtime_error("mask " + f.string() + " has different dimensions");
    out.masks.push_back((g.values != 0).cast<std::uint8_t>());
  }
  return out;
}

FeatureStack decode_spf1(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.expect_magic("SPF1", "not an SPF1 file");
  const std::uint32_t h = r.u32("height");
  const std::uint32_t w = r.u32("width");
  const std::uint32_t depth = r.u32("depth");
  const Dims d = checked_dims(h, w, r.offset());
  if (depth > 4096) throw FormatError("feature depth out of range", r.offset());
  const std::size_t header = r.offset();
  const auto data = r.payload(d.size() * depth * 4, "feature data");
  FeatureStack out{d, Eigen::MatrixXd(static_cast<Eigen::Index>(d.size()), depth)};
  for (std::size_t i = 0; i < d.size() * depth; ++i) {
    const std::uint8_t* p = data.data() + 4 * i;
    const std::uint32_t bits = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
    const float v = std::bit_cast<float>(bits);
    if (!std::isfinite(v)) throw FormatError("non-finite feature", header + 4 * i);
    out.data.data()[i] = v;
  }
  return out;
}

Bytes encode_spf1(const FeatureStack& features) {
  Bytes out{'S', 'P', 'F', '1'};
  put_u32(out, static_cast<std::uint32_t>(features.dims.height));
  put_u32(out, static_cast<std::uint32_t>(features.dims.width));
  put_u32(out, static_cast<std::uint32_t>(features.depth()));
  for (Eigen::Index i = 0; i < features.data.size(); ++i)
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(features.data.data()[i])));
  return out;
}

FeatureStack read_features(const std::filesystem::path& path) { return decode_spf1(read_file(path)); }

SaliencyMap read_saliency(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "SPF1", 4) == 0) {
    const FeatureStack f = decode_spf1(bytes);
    if (f.depth() != 1) throw std::runtime_error("saliency SPF1 must have depth 1");
    SaliencyMap s(f.dims.height, f.dims.width);
    for (std::size_t i = 0; i < f.dims.size(); ++i) s.data()[i] = f.data(static_cast<Eigen::Index>(i), 0);
    return s;
  }
  const GrayImage g = decode_pgm(bytes);
  return g.values.cast<double>() / double(g.maxval);
}

Bytes encode_png(const Image& img) {
  const std::size_t stride = static_cast<std::size_t>(img.width()) * 3 + 1;
  Bytes raw(stride * img.height());
  for (int y = 0; y < img.height(); ++y) {
    raw[y * stride] = 0;
    std::memcpy(&raw[y * stride + 1], img.rgb().data() + static_cast<std::size_t>(y) * img.width() * 3, stride - 1);
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  Bytes packed(packed_size);
  if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw std::runtime_error("png compression failed");
  packed.resize(packed_size);

  Bytes png{0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  Bytes ihdr;
  put_u32_be(ihdr, static_cast<std::uint32_t>(img.width()));
  put_u32_be(ihdr, static_cast<std::uint32_t>(img.height()));
  ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});
  append_chunk(png, "IHDR", ihdr);
  append_chunk(png, "IDAT", packed);
  append_chunk(png, "IEND", {});
  return png;
}

Image render_overlay(const Image& img, const LabelRaster& labels) {
  if (dims_of(labels) != img.dims()) throw std::invalid_argument("labels do not match image");
  const BinaryRaster edges = boundary_map(labels);
  Image::Rgb rgb = img.rgb();
  for (std::size_t i = 0; i < img.size(); ++i)
    if (edges.data()[i]) rgb.row(static_cast<Eigen::Index>(i)) << 255, 0, 0;
  return Image(img.width(), img.height(), std::move(rgb));
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> rle_encode(const LabelRaster& labels) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> runs;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const std::uint32_t v = labels.data()[i];
    if (!runs.empty() && runs.back().first == v)
      ++runs.back().second;
    else
      runs.emplace_back(v, 1);
  }
  return runs;
}

LabelRaster rle_decode(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& runs, Dims dims) {
  LabelRaster out(dims.height, dims.width);
  std::size_t pos = 0;
  for (const auto& [v, len] : runs) {
    if (pos + len > dims.size()) throw std::invalid_argument("run lengths exceed the raster size");
    std::fill_n(out.data() + pos, len, v);
    pos += len;
  }
  if (pos != dims.size()) throw std::invalid_argument("run lengths do not cover the raster");
  return out;
}

}  // namespace mcsp
