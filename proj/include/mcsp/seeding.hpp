#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "mcsp/partition.hpp"

namespace mcsp {

using SeedCounts = std::map<std::uint32_t, int>;
using Quotas = std::map<std::uint32_t, double>;

/// Thrown when the superpixel budget cannot give every object one seed.
class InsufficientBudget : public std::runtime_error {
 public:
  InsufficientBudget(int k, std::size_t objects);
  int k;
  std::size_t objects;
};

/// Largest-remainder rounding of real quotas to integers summing to k, with
/// at least one per id. Fractional ties go to the lower id. A zero count is
/// raised by taking from the most over-allocated id holding two or more.
SeedCounts round_quotas(const Quotas& quotas, int k);

/// k * |O_i| / sum |O_j| for every object (kUncertain carries no budget).
Quotas proportional_quotas(const PriorPartition& partition, int k);

/// round_quotas(proportional_quotas(partition, k), k).
SeedCounts allocate_seed_counts(const PriorPartition& partition, int k);

/// Lowers counts that exceed an object's area and hands the surplus, one seed
/// at a time, to the object furthest below its proportional quota that still
/// has room.
SeedCounts clamp_to_area(const SeedCounts& counts, const PriorPartition& partition);

struct Seed {
  Eigen::Vector2d position;  // pixel coordinates (x, y) of an object pixel
  std::uint32_t object_id = 0;
  std::size_t pixel = 0;  // raster index of position
};

struct SeedSet {
  std::vector<Seed> seeds;
  SeedCounts per_object_counts;

  std::size_t size() const { return seeds.size(); }
};

struct SeedingConfig {
  int lloyd_iterations = 5;
  std::size_t subsample_threshold = 65536;  // objects above this many pixels are subsampled
  std::size_t subsample_size = 4096;        // raised to 4 * count when an object needs more seeds
};

/// Random seeds per object refined by spatial Lloyd iterations and snapped to
/// distinct pixels of the object. Objects are visited in increasing id order;
/// each draws from its own stream seeded with rng_seed ^ id.
SeedSet place_seeds(const PriorPartition& partition, const SeedCounts& counts, std::uint64_t rng_seed,
                    const SeedingConfig& cfg = {});

}  // namespace mcsp
