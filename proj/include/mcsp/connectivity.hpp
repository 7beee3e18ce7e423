#pragma once

#include <cstddef>

#include "mcsp/labeling.hpp"
#include "mcsp/partition.hpp"

namespace mcsp {

/// (|I| / K) / 4, at least 1.
std::size_t default_min_fragment(std::size_t pixels, int k);

/// Splits every superpixel into 4-connected components. The largest component
/// of each superpixel keeps its id (first in raster order on ties). Other
/// components below min_fragment pixels merge into the adjacent kept region
/// sharing the longest boundary, restricted to regions of the same owner
/// unless the fragment is made only of uncertain pixels; ties go to the lower
/// id. Components that are large enough, or have no eligible neighbor, become
/// new superpixels. Output ids are dense: surviving ids in increasing order,
/// then new ones in raster order.
SuperpixelLabeling enforce_connectivity(const SuperpixelLabeling& labeling, const PriorPartition& partition,
                                        std::size_t min_fragment);

}  // namespace mcsp
