#pragma once

#include "mcsp/raster.hpp"

namespace mcsp {

// Square structuring element of side 2 * radius + 1. Pixels outside the
// image are ignored: they neither erode nor dilate anything.

BinaryRaster erode(const BinaryRaster& mask, int radius);
BinaryRaster dilate(const BinaryRaster& mask, int radius);

/// Erosion followed by dilation; radius 0 is the identity.
BinaryRaster morphological_open(const BinaryRaster& mask, int radius);

/// Nonzero where the (2r+1)^2 window around a pixel holds more than one label.
BinaryRaster label_gradient(const LabelRaster& labels, int radius);

}  // namespace mcsp
