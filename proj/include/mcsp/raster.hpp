#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace mcsp {

/// Row-major 2D raster: rows = height, cols = width, so data()[y * width + x]
/// is raster order.
template <typename T>
using Raster = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using LabelRaster = Raster<std::uint32_t>;
using BinaryRaster = Raster<std::uint8_t>;

/// Label reserved for pixels that belong to no prior object.
inline constexpr std::uint32_t kUncertain = 0xFFFFFFFFu;

struct Dims {
  int width = 0;
  int height = 0;

  std::size_t size() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  bool operator==(const Dims&) const = default;
};

template <typename Derived>
Dims dims_of(const Eigen::DenseBase<Derived>& r) {
  return {static_cast<int>(r.cols()), static_cast<int>(r.rows())};
}

/// Calls fn(neighbor_index) for each in-image 4-neighbor of pixel (x, y).
template <typename Fn>
inline void for_each_4neighbor(int x, int y, const Dims& d, Fn&& fn) {
  const std::size_t i = static_cast<std::size_t>(y) * d.width + x;
  if (x > 0) fn(i - 1);
  if (x + 1 < d.width) fn(i + 1);
  if (y > 0) fn(i - d.width);
  if (y + 1 < d.height) fn(i + d.width);
}

/// 4-connected components of equal-valued pixels, numbered in raster order of
/// their first pixel.
struct Components {
  LabelRaster ids;
  std::vector<std::size_t> areas;
  std::vector<std::size_t> first_pixel;

  std::size_t count() const { return areas.size(); }
};

Components connected_components(const LabelRaster& labels);
/// Same, but pixels labeled `ignore` belong to no component (id kUncertain).
Components connected_components(const LabelRaster& labels, std::uint32_t ignore);

/// 4-connected components of the nonzero pixels of a binary raster.
Components connected_components(const BinaryRaster& mask);

}  // namespace mcsp
