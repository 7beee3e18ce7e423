#include "mcsp/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace mcsp {
namespace {

constexpr double kTieTolerance = 1e-9;

using Points = Eigen::Matrix<double, 2, Eigen::Dynamic>;

Points coordinates(const std::vector<std::size_t>& pixels, int width) {
  Points p(2, static_cast<Eigen::Index>(pixels.size()));
  for (std::size_t i = 0; i < pixels.size(); ++i)
    p.col(static_cast<Eigen::Index>(i)) << double(pixels[i] % width), double(pixels[i] / width);
  return p;
}

// Spatial Lloyd iterations. An empty cluster takes the point of the largest
// cluster farthest from that cluster's center (first such point on ties).
Points lloyd(const Points& pts, Points centers, int iterations) {
  const Eigen::Index n = pts.cols();
  const Eigen::Index k = centers.cols();
  std::vector<Eigen::Index> assign(static_cast<std::size_t>(n));
  for (int it = 0; it < iterations; ++it) {
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      (centers.colwise() - pts.col(i)).colwise().squaredNorm().minCoeff(&best);
      assign[i] = best;
      ++counts[best];
    }
    for (Eigen::Index j = 0; j < k; ++j) {
      if (counts[j] > 0) continue;
      const auto largest = std::max_element(counts.begin(), counts.end()) - counts.begin();
      Eigen::Index far = -1;
      double far_d = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (assign[i] != largest) continue;
        const double d = (pts.col(i) - centers.col(largest)).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far < 0 || counts[largest] < 2) break;
      assign[far] = j;
      --counts[largest];
      ++counts[j];
      centers.col(j) = pts.col(far);
    }
    Points sums = Points::Zero(2, k);
    for (Eigen::Index i = 0; i < n; ++i) sums.col(assign[i]) += pts.col(i);
    for (Eigen::Index j = 0; j < k; ++j)
      if (counts[j] > 0) centers.col(j) = sums.col(j) / double(counts[j]);
  }
  return centers;
}

// Nearest pixel of `object` to `c` that is not yet taken; ties go to the lower
// raster index. Searches square rings around the center.
std::size_t snap(const Eigen::Vector2d& c, std::uint32_t object, const LabelRaster& labels,
                 const std::vector<std::uint8_t>& taken) {
  const int w = static_cast<int>(labels.cols());
  const int h = static_cast<int>(labels.rows());
  const int cx = std::clamp(static_cast<int>(std::floor(c.x())), 0, w - 1);
  const int cy = std::clamp(static_cast<int>(std::floor(c.y())), 0, h - 1);
  double best_d = std::numeric_limits<double>::infinity();
  std::size_t best = std::numeric_limits<std::size_t>::max();
  const int max_r = std::max(w, h);
  for (int r = 0; r <= max_r; ++r) {
    if (best != std::numeric_limits<std::size_t>::max() && double(r - 1) > std::sqrt(best_d)) break;
    for (int y = cy - r; y <= cy + r; ++y) {
      if (y < 0 || y >= h) continue;
      const bool edge_row = (y == cy - r || y == cy + r);
      for (int x = cx - r; x <= cx + r; x += (edge_row ? 1 : 2 * r)) {
        if (x >= 0 && x < w) {
          const std::size_t i = static_cast<std::size_t>(y) * w + x;
          if (labels.data()[i] == object && !taken[i]) {
            const double d = (Eigen::Vector2d(x, y) - c).squaredNorm();
            if (d < best_d || (d == best_d && i < best)) {
              best_d = d;
              best = i;
            }
          }
        }
        if (r == 0) break;
      }
    }
  }
  return best;
}

}  // namespace

InsufficientBudget::InsufficientBudget(int k_, std::size_t objects_)
    : std::runtime_error("insufficient budget: k=" + std::to_string(k_) + " is below the object count " +
                         std::to_string(objects_)),
      k(k_),
      objects(objects_) {}

SeedCounts round_quotas(const Quotas& quotas, int k) {
  if (k < 0 || static_cast<std::size_t>(k) < quotas.size()) throw InsufficientBudget(k, quotas.size());
  SeedCounts out;
  if (quotas.empty()) return out;

  struct Entry {
    std::uint32_t id;
    double quota;
    double frac;
    int count;
  };
  std::vector<Entry> e;
  long assigned = 0;
  for (const auto& [id, q] : quotas) {
    const double fl = std::floor(q + kTieTolerance);
    e.push_back({id, q, std::max(0.0, q - fl), static_cast<int>(fl)});
    assigned += static_cast<long>(fl);
  }

  std::vector<std::size_t> order(e.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (std::abs(e[a].frac - e[b].frac) > kTieTolerance) return e[a].frac > e[b].frac;
    return e[a].id < e[b].id;
  });
  long remaining = k - assigned;
  for (std::size_t r = 0; remaining > 0; r = (r + 1) % order.size(), --remaining) ++e[order[r]].count;
  for (std::size_t r = order.size(); remaining < 0;) {
    r = (r == 0 ? order.size() : r) - 1;
    if (e[order[r]].count > 0) {
      --e[order[r]].count;
      ++remaining;
    }
  }

  for (auto& z : e) {
    if (z.count > 0) continue;
    Entry* donor = nullptr;
    for (auto& d : e) {
      if (d.count < 2) continue;
      if (!donor || d.count - d.quota > donor->count - donor->quota + kTieTolerance) donor = &d;
    }
    --donor->count;  // exists since k >= number of ids
    z.count = 1;
  }
  for (const auto& z : e) out[z.id] = z.count;
  return out;
}

Quotas proportional_quotas(const PriorPartition& partition, int k) {
  std::size_t total = 0;
  for (const auto& [id, area] : partition.areas()) total += area;
  Quotas q;
  for (const auto& [id, area] : partition.areas()) q[id] = double(k) * double(area) / double(total);
  return q;
}

SeedCounts allocate_seed_counts(const PriorPartition& partition, int k) {
  return round_quotas(proportional_quotas(partition, k), k);
}

SeedCounts clamp_to_area(const SeedCounts& counts, const PriorPartition& partition) {
  SeedCounts out = counts;
  int surplus = 0;
  int k = 0;
  for (auto& [id, c] : out) {
    k += c;
    const auto it = partition.areas().find(id);
    const int area = it == partition.areas().end() ? 0 : static_cast<int>(std::min<std::size_t>(it->second, 1u << 30));
    if (c > area) {
      surplus += c - area;
      c = area;
    }
  }
  if (surplus == 0) return out;
  const Quotas quota = proportional_quotas(partition, k);
  for (; surplus > 0; --surplus) {
    std::uint32_t best = kUncertain;
    double best_need = -std::numeric_limits<double>::infinity();
    for (const auto& [id, c] : out) {
      if (static_cast<std::size_t>(c) >= partition.areas().at(id)) continue;
      const double need = quota.at(id) - c;
      if (need > best_need + kTieTolerance) {
        best_need = need;
        best = id;
      }
    }
    if (best == kUncertain) break;  // every object is full
    ++out[best];
  }
  return out;
}

SeedSet place_seeds(const PriorPartition& partition, const SeedCounts& requested, std::uint64_t rng_seed,
                    const SeedingConfig& cfg) {
  for (const auto& [id, area] : partition.areas()) {
    const auto it = requested.find(id);
    if (it == requested.end() || it->second < 1) throw std::invalid_argument("every object needs at least one seed");
  }
  const SeedCounts counts = clamp_to_area(requested, partition);
  const int width = partition.dims().width;
  std::vector<std::uint8_t> taken(partition.size(), 0);

  SeedSet out;
  for (const auto& [id, pixels] : partition.object_pixels()) {
    const int count = counts.at(id);
    std::mt19937_64 rng(rng_seed ^ id);

    std::vector<std::size_t> pool;
    const std::size_t want = std::max(cfg.subsample_size, std::size_t(4) * static_cast<std::size_t>(count));
    if (pixels.size() > cfg.subsample_threshold && want < pixels.size()) {
      pool.reserve(want);
      std::sample(pixels.begin(), pixels.end(), std::back_inserter(pool), want, rng);
    } else {
      pool = pixels;
    }
    std::vector<std::size_t> initial;
    initial.reserve(static_cast<std::size_t>(count));
    std::sample(pool.begin(), pool.end(), std::back_inserter(initial), count, rng);

    const Points centers = lloyd(coordinates(pool, width), coordinates(initial, width), cfg.lloyd_iterations);
    for (Eigen::Index j = 0; j < centers.cols(); ++j) {
      const std::size_t p = snap(centers.col(j), id, partition.labels(), taken);
      taken[p] = 1;
      out.seeds.push_back({Eigen::Vector2d(double(p % width), double(p / width)), id, p});
    }
    out.per_object_counts[id] = count;
  }
  return out;
}

}  // namespace mcsp
