#include "mcsp/clustering.hpp"

#include <cassert>
#include <map>

namespace mcsp {
namespace {

// Seeds bucketed on a square grid of cell side `cell`.
class SeedGrid {
 public:
  SeedGrid(const SeedSet& seeds, Dims d, double cell) : cell_(std::max(cell, 1.0)) {
    cols_ = static_cast<int>(std::ceil(d.width / cell_)) + 1;
    rows_ = static_cast<int>(std::ceil(d.height / cell_)) + 1;
    buckets_.resize(static_cast<std::size_t>(cols_) * rows_);
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      const auto& p = seeds.seeds[k].position;
      buckets_[bucket(cell_of(p.x()), cell_of(p.y()))].push_back(static_cast<std::int32_t>(k));
    }
  }

  template <typename Fn>
  void for_each_near(double x, double y, Fn&& fn) const {
    const int cx = cell_of(x);
    const int cy = cell_of(y);
    for (int gy = std::max(0, cy - 1); gy <= std::min(rows_ - 1, cy + 1); ++gy)
      for (int gx = std::max(0, cx - 1); gx <= std::min(cols_ - 1, cx + 1); ++gx)
        for (const std::int32_t k : buckets_[bucket(gx, gy)]) fn(k);
  }

 private:
  int cell_of(double v) const { return static_cast<int>(std::floor(v / cell_)); }
  std::size_t bucket(int gx, int gy) const { return static_cast<std::size_t>(gy) * cols_ + gx; }

  double cell_;
  int cols_ = 0;
  int rows_ = 0;
  std::vector<std::vector<std::int32_t>> buckets_;
};

// Keeps the best kMaxCandidates (distance, index) pairs in ascending order.
struct NearestList {
  std::array<double, CandidateMap::kMaxCandidates> d;
  std::array<std::int32_t, CandidateMap::kMaxCandidates> k;
  int size = 0;

  void offer(double dist, std::int32_t idx) {
    const int cap = CandidateMap::kMaxCandidates;
    if (size == cap && !(dist < d[cap - 1] || (dist == d[cap - 1] && idx < k[cap - 1]))) return;
    int pos = size < cap ? size++ : cap - 1;
    while (pos > 0 && (dist < d[pos - 1] || (dist == d[pos - 1] && idx < k[pos - 1]))) {
      d[pos] = d[pos - 1];
      k[pos] = k[pos - 1];
      --pos;
    }
    d[pos] = dist;
    k[pos] = idx;
  }
};

}  // namespace

CandidateMap build_candidates(const PriorPartition& partition, const SeedSet& seeds, const ClusterConfig& cfg) {
  if (seeds.size() == 0) throw std::invalid_argument("no seeds");
  const Dims d = partition.dims();
  const std::size_t n = d.size();
  const double radius = cfg.candidate_radius_factor * superpixel_scale(n, cfg.k);
  const double r2 = radius * radius;

  std::map<std::uint32_t, std::vector<std::int32_t>> by_object;
  std::vector<std::int32_t> all(seeds.size());
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    by_object[seeds.seeds[k].object_id].push_back(static_cast<std::int32_t>(k));
    all[k] = static_cast<std::int32_t>(k);
  }

  const SeedGrid grid(seeds, d, radius);
  CandidateMap out;
  out.seeds = seeds.size();
  out.index.setConstant(CandidateMap::kMaxCandidates, static_cast<Eigen::Index>(n), -1);
  out.count.assign(n, 0);

  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * d.width + x;
      const std::uint32_t obj = partition.at(p);
      const auto dist2 = [&](std::int32_t k) { return (seeds.seeds[k].position - Eigen::Vector2d(x, y)).squaredNorm(); };

      NearestList near;
      grid.for_each_near(x, y, [&](std::int32_t k) {
        if (obj != kUncertain && seeds.seeds[k].object_id != obj) return;
        const double dd = dist2(k);
        if (dd <= r2) near.offer(dd, k);
      });
      if (near.size == 0) {
        const auto it = by_object.find(obj);
        assert(obj == kUncertain || it != by_object.end());
        if (obj != kUncertain && it == by_object.end()) throw std::logic_error("object pixel without any seed");
        double best_d = std::numeric_limits<double>::infinity();
        std::int32_t best = -1;
        for (const std::int32_t k : obj == kUncertain ? all : it->second) {
          const double dd = dist2(k);
          if (dd < best_d) {
            best_d = dd;
            best = k;
          }
        }
        near.offer(best_d, best);
      }
      const auto pi = static_cast<Eigen::Index>(p);
      for (int j = 0; j < near.size; ++j) out.index(j, pi) = near.k[j];
      out.count[p] = static_cast<std::uint8_t>(near.size);
    }
  }
  return out;
}

}  // namespace mcsp
