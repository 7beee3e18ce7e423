#pragma once

#include <cstdint>
#include <map>

#include "mcsp/partition.hpp"
#include "mcsp/raster.hpp"
#include "mcsp/seeding.hpp"

namespace mcsp {

/// Per-pixel saliency scores in [0, 1].
using SaliencyMap = Raster<double>;

/// Object id -> positive density factor; objects not listed use 1.
using FactorMap = std::map<std::uint32_t, double>;

enum class Salience { background, foreground };
using SalienceClasses = std::map<std::uint32_t, Salience>;

inline constexpr double kDefaultSaliencyThreshold = 0.1;

/// Foreground iff the mean saliency over the object's pixels exceeds threshold.
SalienceClasses classify_salient(const PriorPartition& partition, const SaliencyMap& saliency,
                                 double threshold = kDefaultSaliencyThreshold);

// Areas are measured over object pixels only: uncertain pixels carry no
// budget, so |I| below means the total object area.

/// Foreground K_i = |O_i| / |I| * K * r; background shares what is left,
/// K_j = |O_j| / sum_b |O_b| * (K - sum_f K_f). When sum_f K_f >= K, every
/// background object gets exactly 1 and foreground splits the rest by area.
/// Requires r >= 1.
Quotas va_quotas(const PriorPartition& partition, const SalienceClasses& classes, int k, double r);

/// raw_i = |O_i| / |I| * K * r_i, rescaled so the quotas sum to K.
Quotas user_quotas(const PriorPartition& partition, const FactorMap& factors, int k);

SeedCounts va_allocate(const PriorPartition& partition, const SalienceClasses& classes, int k, double r);
SeedCounts user_allocate(const PriorPartition& partition, const FactorMap& factors, int k);

}  // namespace mcsp
