#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "mcsp/raster.hpp"

namespace mcsp {

/// Per-pixel object ids plus kUncertain for pixels that belong to no object.
class PriorPartition {
 public:
  PriorPartition() = default;
  explicit PriorPartition(LabelRaster labels);

  /// A single object (id 0) covering the whole image.
  static PriorPartition whole(Dims d);

  const LabelRaster& labels() const { return labels_; }
  Dims dims() const { return dims_of(labels_); }
  std::size_t size() const { return dims().size(); }

  /// Object id -> pixel count; never contains kUncertain.
  const std::map<std::uint32_t, std::size_t>& areas() const { return areas_; }
  std::size_t object_count() const { return areas_.size(); }
  std::size_t uncertain_count() const { return uncertain_; }

  std::uint32_t at(std::size_t i) const { return labels_.data()[i]; }
  bool uncertain(std::size_t i) const { return at(i) == kUncertain; }

  /// Pixel indices of every object, in raster order.
  std::map<std::uint32_t, std::vector<std::size_t>> object_pixels() const;

 private:
  LabelRaster labels_;
  std::map<std::uint32_t, std::size_t> areas_;
  std::size_t uncertain_ = 0;
};

}  // namespace mcsp
