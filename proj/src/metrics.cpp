#include "mcsp/metrics.hpp"

#include <cstdlib>
#include <unordered_map>

#include <json.hpp>

namespace mcsp {
namespace {

void require_same_dims(const LabelRaster& a, const LabelRaster& b) {
  if (dims_of(a) != dims_of(b)) throw std::invalid_argument("label rasters have different dimensions");
}

struct Offset {
  int dx;
  int dy;
};

std::vector<Offset> disk_offsets(double eps) {
  std::vector<Offset> out;
  const int r = static_cast<int>(std::ceil(eps));
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      if (double(dx * dx + dy * dy) < eps * eps) out.push_back({dx, dy});
  return out;
}

// Share of `reference` pixels with a `candidate` pixel at any of `offsets`.
double coverage(const BinaryRaster& reference, const BinaryRaster& candidate, const std::vector<Offset>& offsets) {
  const int h = static_cast<int>(reference.rows());
  const int w = static_cast<int>(reference.cols());
  std::size_t total = 0;
  std::size_t hit = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!reference(y, x)) continue;
      ++total;
      for (const auto& o : offsets) {
        const int xx = x + o.dx;
        const int yy = y + o.dy;
        if (xx >= 0 && xx < w && yy >= 0 && yy < h && candidate(yy, xx)) {
          ++hit;
          break;
        }
      }
    }
  }
  return total == 0 ? 1.0 : double(hit) / double(total);
}

// Perimeter of the convex hull of integer points.
double hull_perimeter(std::vector<Eigen::Vector2i> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y(); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 2) return 0;
  const auto cross = [](const Eigen::Vector2i& o, const Eigen::Vector2i& a, const Eigen::Vector2i& b) {
    return static_cast<long long>(a.x() - o.x()) * (b.y() - o.y()) - static_cast<long long>(a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2i> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  double perimeter = 0;
  for (std::size_t i = 0; i < hull.size(); ++i) perimeter += (hull[(i + 1) % hull.size()] - hull[i]).cast<double>().norm();
  return perimeter;
}

}  // namespace

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["asa"] = asa;
  j["gr"] = gr;
  j["recall"] = recall;
  j["precision"] = precision;
  j["f"] = f;
  j["ev"] = ev;
  j["delta_k"] = delta_k;
  j["k_realized"] = k_realized;
  return j.dump();
}

double asa(const LabelRaster& seg, const GroundTruth& gt) {
  require_same_dims(seg, gt);
  const std::size_t n = static_cast<std::size_t>(seg.size());
  std::unordered_map<std::uint64_t, std::size_t> overlap;
  for (std::size_t i = 0; i < n; ++i) ++overlap[(std::uint64_t(seg.data()[i]) << 32) | gt.data()[i]];
  std::unordered_map<std::uint32_t, std::size_t> best;
  for (const auto& [key, count] : overlap) {
    auto& b = best[static_cast<std::uint32_t>(key >> 32)];
    b = std::max(b, count);
  }
  std::size_t total = 0;
  for (const auto& [k, b] : best) total += b;
  return double(total) / double(n);
}

BinaryRaster boundary_map(const LabelRaster& labels) {
  const Dims d = dims_of(labels);
  BinaryRaster out = BinaryRaster::Zero(d.height, d.width);
  const std::uint32_t* v = labels.data();
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * d.width + x;
      for_each_4neighbor(x, y, d, [&](std::size_t j) {
        if (v[j] != v[i]) out.data()[i] = 1;
      });
    }
  return out;
}

BoundaryScore match_boundaries(const BinaryRaster& detected, const BinaryRaster& truth, double eps) {
  if (dims_of(detected) != dims_of(truth)) throw std::invalid_argument("boundary maps have different dimensions");
  if (!(eps >= 0)) throw std::invalid_argument("eps must be non-negative");
  const auto offsets = disk_offsets(eps);
  return {coverage(truth, detected, offsets), coverage(detected, truth, offsets)};
}

BoundaryScore boundary_recall_precision(const LabelRaster& seg, const GroundTruth& gt, double eps) {
  require_same_dims(seg, gt);
  return match_boundaries(boundary_map(seg), boundary_map(gt), eps);
}

double f_measure_protocol(std::span<const LabelRaster> segs_by_scale, const GroundTruth& gt, double eps) {
  if (segs_by_scale.empty()) throw std::invalid_argument("at least one scale is required");
  const Dims d = dims_of(gt);
  // Contour map kept as integer votes; level v / S for v = 1..S.
  Raster<int> votes = Raster<int>::Zero(d.height, d.width);
  for (const auto& seg : segs_by_scale) {
    require_same_dims(seg, gt);
    votes += boundary_map(seg).cast<int>();
  }
  const BinaryRaster truth = boundary_map(gt);
  std::vector<bool> present(segs_by_scale.size() + 1, false);
  for (Eigen::Index i = 0; i < votes.size(); ++i) present[votes.data()[i]] = true;

  double best = 0;
  for (std::size_t level = 1; level < present.size(); ++level) {
    if (!present[level]) continue;
    const BinaryRaster detected = (votes >= static_cast<int>(level)).cast<std::uint8_t>();
    best = std::max(best, match_boundaries(detected, truth, eps).f());
  }
  return best;
}

double delta_k(int k_requested, std::size_t k_realized) {
  if (k_requested < 1) throw std::invalid_argument("requested superpixel count must be at least 1");
  return std::abs(double(k_realized) - double(k_requested)) / double(k_requested);
}

std::size_t count_labels(const LabelRaster& labels) {
  std::vector<std::uint32_t> ids(labels.data(), labels.data() + labels.size());
  std::sort(ids.begin(), ids.end());
  return static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

std::size_t class_count(const GroundTruth& gt) { return gt.size() == 0 ? 0 : std::size_t(gt.maxCoeff()) + 1; }

RegularityTerms regularity_terms(const LabelRaster& seg) {
  const Dims d = dims_of(seg);
  const std::size_t n = d.size();
  const std::uint32_t* v = seg.data();

  RegularityTerms t;
  t.label.assign(v, v + n);
  std::sort(t.label.begin(), t.label.end());
  t.label.erase(std::unique(t.label.begin(), t.label.end()), t.label.end());
  const std::size_t m = t.label.size();
  std::vector<std::size_t> slot(n);
  for (std::size_t i = 0; i < n; ++i) slot[i] = std::lower_bound(t.label.begin(), t.label.end(), v[i]) - t.label.begin();

  t.area.assign(m, 0);
  std::vector<std::size_t> perimeter(m, 0);
  std::vector<Eigen::Vector2d> sum(m, Eigen::Vector2d::Zero());
  std::vector<Eigen::Vector2d> sum_sq(m, Eigen::Vector2d::Zero());
  // Row extents per superpixel: first/last column seen in each row.
  std::vector<std::unordered_map<int, std::pair<int, int>>> rows(m);
  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * d.width + x;
      const std::size_t s = slot[i];
      ++t.area[s];
      sum[s] += Eigen::Vector2d(x, y);
      sum_sq[s] += Eigen::Vector2d(double(x) * x, double(y) * y);
      int inside = 0;
      for_each_4neighbor(x, y, d, [&](std::size_t j) { inside += v[j] == v[i]; });
      perimeter[s] += 4 - inside;
      auto [it, fresh] = rows[s].try_emplace(y, x, x);
      if (!fresh) it->second.second = x;
    }
  }

  t.convexity.resize(m);
  t.balance.resize(m);
  t.src.resize(m);
  std::vector<Eigen::Vector2i> anchor(m);
  for (std::size_t s = 0; s < m; ++s) {
    std::vector<Eigen::Vector2i> corners;
    corners.reserve(rows[s].size() * 4);
    for (const auto& [y, ext] : rows[s]) {
      corners.emplace_back(ext.first, y);
      corners.emplace_back(ext.first, y + 1);
      corners.emplace_back(ext.second + 1, y);
      corners.emplace_back(ext.second + 1, y + 1);
    }
    t.convexity[s] = std::clamp(hull_perimeter(std::move(corners)) / double(perimeter[s]), 0.0, 1.0);

    const double a = double(t.area[s]);
    const Eigen::Vector2d mean = sum[s] / a;
    const Eigen::Vector2d var = (sum_sq[s] / a - mean.cwiseProduct(mean)).cwiseMax(0.0);
    const double sx = std::sqrt(var.x());
    const double sy = std::sqrt(var.y());
    const double hi = std::max(sx, sy);
    t.balance[s] = hi <= 1e-12 ? 1.0 : std::sqrt(std::min(sx, sy) / hi);
    t.src[s] = t.convexity[s] * t.balance[s];
    anchor[s] = Eigen::Vector2i(static_cast<int>(std::floor(mean.x() + 0.5)), static_cast<int>(std::floor(mean.y() + 0.5)));
  }

  // Mean registered shape: sum of centroid-aligned masks over total area.
  const auto key = [&](int x, int y, std::size_t s) {
    const std::int64_t dx = x - anchor[s].x() + d.width;
    const std::int64_t dy = y - anchor[s].y() + d.height;
    return static_cast<std::uint64_t>(dy * (2 * std::int64_t(d.width) + 1) + dx);
  };
  std::unordered_map<std::uint64_t, double> mean_shape;
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x) {
      const std::size_t s = slot[static_cast<std::size_t>(y) * d.width + x];
      mean_shape[key(x, y, s)] += 1.0;
    }
  for (auto& [k, val] : mean_shape) val /= double(n);

  std::vector<double> l1_inside(m, 0.0);
  std::vector<double> mass_inside(m, 0.0);
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x) {
      const std::size_t s = slot[static_cast<std::size_t>(y) * d.width + x];
      const double mhat = mean_shape.at(key(x, y, s));
      l1_inside[s] += std::abs(1.0 / double(t.area[s]) - mhat);
      mass_inside[s] += mhat;
    }
  t.smf.resize(m);
  for (std::size_t s = 0; s < m; ++s)
    t.smf[s] = std::clamp(1.0 - 0.5 * (l1_inside[s] + std::max(0.0, 1.0 - mass_inside[s])), 0.0, 1.0);
  return t;
}

double global_regularity(const LabelRaster& seg) {
  if (seg.size() == 0) throw std::invalid_argument("empty segmentation");
  const RegularityTerms t = regularity_terms(seg);
  double num = 0;
  double den = 0;
  for (std::size_t s = 0; s < t.label.size(); ++s) {
    num += double(t.area[s]) * t.src[s] * t.smf[s];
    den += double(t.area[s]);
  }
  return num / den;
}

}  // namespace mcsp
