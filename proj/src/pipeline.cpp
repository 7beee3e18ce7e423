#include "mcsp/pipeline.hpp"

#include <algorithm>

namespace mcsp {

std::map<std::uint32_t, std::size_t> Segmentation::realized_per_object() const {
  std::map<std::uint32_t, std::size_t> out;
  for (const std::uint32_t o : result.labeling.owner) ++out[o];
  return out;
}

SeedCounts allocate(const PriorPartition& partition, const Allocation& allocation, int k) {
  return std::visit(
      [&](const auto& a) -> SeedCounts {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, ProportionalAllocation>) {
          return allocate_seed_counts(partition, k);
        } else if constexpr (std::is_same_v<T, AttentionAllocation>) {
          return va_allocate(partition, classify_salient(partition, a.saliency, a.threshold), k, a.ratio);
        } else {
          return user_allocate(partition, a.factors, k);
        }
      },
      allocation);
}

Segmentation segment(const Image& img, const FeatureStack& deep, const PriorPartition& prior_in, const SegmentOptions& opt) {
  opt.cluster.validate();
  if (prior_in.dims() != img.dims()) throw std::invalid_argument("prior dimensions do not match image");
  const PriorPartition prior = prior_in.object_count() == 0 ? PriorPartition::whole(img.dims()) : prior_in;

  Segmentation out;
  out.k_effective = std::max(opt.cluster.k, static_cast<int>(prior.object_count()));
  ClusterConfig cfg = opt.cluster;
  cfg.k = out.k_effective;

  out.allocated = allocate(prior, opt.allocation, cfg.k);
  out.seeds = place_seeds(prior, out.allocated, cfg.rng_seed, opt.seeding);
  out.result = cluster(img, deep, prior, out.seeds, cfg, opt.min_fragment);
  return out;
}

}  // namespace mcsp
