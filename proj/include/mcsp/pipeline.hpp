#pragma once

#include <cstddef>
#include <map>
#include <variant>

#include "mcsp/adaptive.hpp"
#include "mcsp/clustering.hpp"
#include "mcsp/color.hpp"
#include "mcsp/features.hpp"
#include "mcsp/partition.hpp"
#include "mcsp/seeding.hpp"

namespace mcsp {

/// Seeds proportional to object area.
struct ProportionalAllocation {};

/// Salient objects get r times their proportional density.
struct AttentionAllocation {
  SaliencyMap saliency;
  double ratio = 2.0;
  double threshold = kDefaultSaliencyThreshold;
};

/// Explicit per-object density factors.
struct FactorAllocation {
  FactorMap factors;
};

using Allocation = std::variant<ProportionalAllocation, AttentionAllocation, FactorAllocation>;

struct SegmentOptions {
  ClusterConfig cluster;
  SeedingConfig seeding;
  std::size_t min_fragment = 0;  // 0 = (|I| / K) / 4
  Allocation allocation;
};

struct Segmentation {
  ClusterResult<double> result;
  SeedSet seeds;
  SeedCounts allocated;  // seed budget per object after adaptive allocation
  int k_effective = 0;   // requested k, raised to the object count when smaller

  const SuperpixelLabeling& labeling() const { return result.labeling; }
  std::size_t k_realized() const { return result.labeling.count(); }
  /// Final superpixel count per owning object.
  std::map<std::uint32_t, std::size_t> realized_per_object() const;
};

/// Allocation for `k` under the chosen mode.
SeedCounts allocate(const PriorPartition& partition, const Allocation& allocation, int k);

/// Allocation, seeding, clustering and connectivity repair. A prior without
/// any object is treated as one whole-image object.
Segmentation segment(const Image& img, const FeatureStack& deep, const PriorPartition& prior, const SegmentOptions& opt);

}  // namespace mcsp
