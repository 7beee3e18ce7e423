#pragma once

#include <cstddef>
#include <vector>

#include "mcsp/partition.hpp"
#include "mcsp/raster.hpp"

namespace mcsp {

/// Binary object proposals sharing the image dimensions (nonzero = member).
struct MaskStack {
  Dims dims;
  std::vector<BinaryRaster> masks;

  std::size_t size() const { return masks.size(); }
};

struct AggregationConfig {
  std::size_t min_area = 64;
  int opening_radius = 1;

  /// max(64, |I| / 1000), radius 1.
  static AggregationConfig defaults_for(Dims d);
};

std::size_t mask_area(const BinaryRaster& mask);

/// Drops masks with fewer than min_area pixels; order is preserved.
MaskStack filter_min_area(const MaskStack& stack, const AggregationConfig& cfg);

/// Makes masks pairwise disjoint: each pixel stays only in the smallest mask
/// that originally contained it (lower index wins at equal area). Equivalent
/// to subtracting masks from every larger one, smallest first.
MaskStack remove_overlaps(const MaskStack& stack);

/// Turns proposals into a partition: min-area filter, overlap removal, a
/// second area check, then opening of the unlabeled set whose large
/// components become background objects. The rest is kUncertain.
///
/// Object ids follow decreasing area; at equal area proposals come first (in
/// stack order), then background components (in raster order).
/// If nothing survives, the whole image becomes object 0.
PriorPartition aggregate(const MaskStack& stack, Dims dims, const AggregationConfig& cfg);

/// One mask per object of `partition`, in increasing id order.
MaskStack to_masks(const PriorPartition& partition);

}  // namespace mcsp
