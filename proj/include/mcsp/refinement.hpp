#pragma once

#include "mcsp/features.hpp"
#include "mcsp/partition.hpp"
#include "mcsp/pipeline.hpp"
#include "mcsp/raster.hpp"

namespace mcsp {

inline constexpr int kDefaultBorderKernel = 5;
inline constexpr int kDefaultRefineK = 500;

/// Pixels whose kernel x kernel window (clipped to the image) holds more than
/// one class become uncertain; every other pixel keeps its class as object
/// id. A straight border with kernel 5 yields a band two pixels wide on each
/// side; kernel 1 marks nothing.
PriorPartition dilate_borders(const LabelRaster& semantic, int kernel = kDefaultBorderKernel);

struct RefineConfig {
  int k = kDefaultRefineK;
  int kernel = kDefaultBorderKernel;
  ClusterConfig cluster;  // k is taken from the field above
  SeedingConfig seeding;
};

/// Re-segments with the border band left free and gives every pixel the class
/// owning its superpixel. Pixels outside the band keep their class.
LabelRaster refine(const Image& img, const LabelRaster& semantic, const RefineConfig& cfg = {});

}  // namespace mcsp
