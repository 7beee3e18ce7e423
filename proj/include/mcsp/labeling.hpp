#pragma once

#include <cstdint>
#include <vector>

#include "mcsp/raster.hpp"

namespace mcsp {

/// Hard superpixel map: per-pixel superpixel ids plus the prior object owning
/// each superpixel.
struct SuperpixelLabeling {
  LabelRaster labels;
  std::vector<std::uint32_t> owner;

  std::size_t count() const { return owner.size(); }
  Dims dims() const { return dims_of(labels); }
};

}  // namespace mcsp
