#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mcsp/clustering.hpp"
#include "mcsp/color.hpp"
#include "mcsp/raster.hpp"

namespace mcsp {

/// Ground-truth regions G_j, ids dense in [0, L).
using GroundTruth = LabelRaster;

struct MetricsReport {
  double asa = 0;
  double gr = 0;
  double recall = 0;
  double precision = 0;
  double f = 0;
  double ev = 0;
  double delta_k = 0;
  std::size_t k_realized = 0;

  /// Flat JSON object with exactly the keys above.
  std::string to_json() const;
};

/// (1/|I|) sum_k max_j |S_k ∩ G_j|.
double asa(const LabelRaster& seg, const GroundTruth& gt);

/// Pixels with a 4-neighbor of a different label. The image frame itself is
/// never a boundary.
BinaryRaster boundary_map(const LabelRaster& labels);

struct BoundaryScore {
  double recall = 0;
  double precision = 0;

  double f() const { return recall + precision > 0 ? 2 * precision * recall / (precision + recall) : 0.0; }
};

/// Recall: share of truth pixels with a detected pixel at Euclidean distance
/// strictly below eps; precision: the same with roles swapped. An empty
/// reference set scores 1.
BoundaryScore match_boundaries(const BinaryRaster& detected, const BinaryRaster& truth, double eps);

BoundaryScore boundary_recall_precision(const LabelRaster& seg, const GroundTruth& gt, double eps = 2.0);

/// Boundary maps of all scales averaged into a contour map, thresholded at
/// each distinct nonzero level; returns the best 2PR / (P + R). An all-zero
/// contour map scores 0.
double f_measure_protocol(std::span<const LabelRaster> segs_by_scale, const GroundTruth& gt, double eps = 2.0);

/// |K_realized - K| / K.
double delta_k(int k_requested, std::size_t k_realized);

/// Number of distinct labels.
std::size_t count_labels(const LabelRaster& labels);

/// Per-superpixel regularity terms, indexed by dense position of the sorted
/// distinct labels.
struct RegularityTerms {
  std::vector<std::uint32_t> label;
  std::vector<std::size_t> area;
  std::vector<double> convexity;  // perimeter(convex hull) / perimeter, clamped to [0, 1]
  std::vector<double> balance;    // sqrt(min(sx, sy) / max(sx, sy)); 1 when both are 0
  std::vector<double> src;        // convexity * balance
  std::vector<double> smf;        // 1 - 0.5 * L1(shape, mean shape), centroid-registered, unit mass
};

RegularityTerms regularity_terms(const LabelRaster& seg);

/// sum_k |S_k| SRC(S_k) SMF(S_k) / sum_k |S_k|.
double global_regularity(const LabelRaster& seg);

/// Fraction of Lab variance explained by superpixel means, per channel and
/// averaged. A channel with no variance counts as fully explained.
template <typename Scalar>
double explained_variation(const LabelRaster& seg, const BasicImage<Scalar>& img) {
  if (dims_of(seg) != img.dims()) throw std::invalid_argument("segmentation and image dimensions differ");
  const std::size_t n = img.size();
  const std::uint32_t* lab = seg.data();
  std::vector<std::uint32_t> ids(lab, lab + n);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<std::size_t> slot(n);
  for (std::size_t i = 0; i < n; ++i) slot[i] = std::lower_bound(ids.begin(), ids.end(), lab[i]) - ids.begin();

  double ev = 0;
  for (int c = 0; c < 3; ++c) {
    const Eigen::VectorXd channel = img.lab().col(c).template cast<double>();
    const double mean = channel.mean();
    const double total = (channel.array() - mean).square().sum();
    if (total <= 1e-12 * double(n)) {
      ev += 1.0;
      continue;
    }
    std::vector<double> sum(ids.size(), 0.0);
    std::vector<double> cnt(ids.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[slot[i]] += channel(static_cast<Eigen::Index>(i));
      cnt[slot[i]] += 1.0;
    }
    double between = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const double mu = sum[k] / cnt[k];
      between += cnt[k] * (mu - mean) * (mu - mean);
    }
    ev += std::clamp(between / total, 0.0, 1.0);
  }
  return ev / 3.0;
}

/// Number of classes L = max id + 1.
std::size_t class_count(const GroundTruth& gt);

/// Soft projection of the ground truth through the superpixels: the product
/// of the row-normalized assignment, the transposed column-normalized
/// assignment and the one-hot ground truth, evaluated sparsely. N x L.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> project_groundtruth(
    const SoftAssignment<Scalar>& soft, const GroundTruth& gt) {
  const CandidateMap& cand = soft.candidates;
  const std::size_t n = cand.pixels();
  if (static_cast<std::size_t>(gt.size()) != n) throw std::invalid_argument("ground truth size does not match assignment");
  const auto classes = static_cast<Eigen::Index>(class_count(gt));
  const auto k = static_cast<Eigen::Index>(cand.seeds);

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> col_mass = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(k);
  for (std::size_t p = 0; p < n; ++p)
    for (int j = 0; j < cand.count[p]; ++j) col_mass(cand.index(j, static_cast<Eigen::Index>(p))) += soft.weight(j, static_cast<Eigen::Index>(p));

  // Superpixel-level class distribution: column-normalized assignment^T * G.
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> sp_class =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(k, classes);
  for (std::size_t p = 0; p < n; ++p) {
    const auto pi = static_cast<Eigen::Index>(p);
    for (int j = 0; j < cand.count[p]; ++j) {
      const std::int32_t s = cand.index(j, pi);
      sp_class(s, gt.data()[p]) += soft.weight(j, pi);
    }
  }
  for (Eigen::Index s = 0; s < k; ++s)
    if (col_mass(s) > Scalar(0)) sp_class.row(s) /= col_mass(s);

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(static_cast<Eigen::Index>(n), classes);
  for (std::size_t p = 0; p < n; ++p) {
    const auto pi = static_cast<Eigen::Index>(p);
    Scalar row_mass = 0;
    for (int j = 0; j < cand.count[p]; ++j) row_mass += soft.weight(j, pi);
    if (row_mass <= Scalar(0)) continue;
    for (int j = 0; j < cand.count[p]; ++j) out.row(pi) += soft.weight(j, pi) * sp_class.row(cand.index(j, pi));
    out.row(pi) /= row_mass;
  }
  return out;
}

inline constexpr double kLogClamp = 1e-12;
inline constexpr double kCompactnessWeight = 1e-5;

/// -(1/N) sum_i log G_hat(i, gt(i)), log argument clamped at 1e-12.
template <typename Derived>
typename Derived::Scalar seg_loss(const Eigen::MatrixBase<Derived>& projected, const GroundTruth& gt) {
  using Scalar = typename Derived::Scalar;
  const auto n = projected.rows();
  if (static_cast<Eigen::Index>(gt.size()) != n) throw std::invalid_argument("ground truth size does not match projection");
  Scalar total = 0;
  for (Eigen::Index i = 0; i < n; ++i) total -= std::log(std::max(projected(i, gt.data()[i]), Scalar(kLogClamp)));
  return total / Scalar(n);
}

/// Spatial centers sum_p q_hat_pk F_s(p) with column-normalized weights.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, Eigen::Dynamic> soft_spatial_centers(const Eigen::Matrix<Scalar, 2, Eigen::Dynamic>& spatial,
                                                            const SoftAssignment<Scalar>& soft) {
  const CandidateMap& cand = soft.candidates;
  const auto k = static_cast<Eigen::Index>(cand.seeds);
  Eigen::Matrix<Scalar, 2, Eigen::Dynamic> sum = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>::Zero(2, k);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mass = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(k);
  for (std::size_t p = 0; p < cand.pixels(); ++p) {
    const auto pi = static_cast<Eigen::Index>(p);
    for (int j = 0; j < cand.count[p]; ++j) {
      sum.col(cand.index(j, pi)) += soft.weight(j, pi) * spatial.col(pi);
      mass(cand.index(j, pi)) += soft.weight(j, pi);
    }
  }
  for (Eigen::Index s = 0; s < k; ++s)
    if (mass(s) > Scalar(0)) sum.col(s) /= mass(s);
  return sum;
}

/// sum_i |F_s(i) - center(hard(i))|_2 with soft_spatial_centers.
template <typename Scalar>
Scalar compactness_loss(const Eigen::Matrix<Scalar, 2, Eigen::Dynamic>& spatial, const SoftAssignment<Scalar>& soft,
                        std::span<const std::uint32_t> hard) {
  if (static_cast<std::size_t>(spatial.cols()) != soft.pixels() || hard.size() != soft.pixels())
    throw std::invalid_argument("compactness inputs disagree on the pixel count");
  const Eigen::Matrix<Scalar, 2, Eigen::Dynamic> centers = soft_spatial_centers(spatial, soft);
  Scalar total = 0;
  for (std::size_t i = 0; i < hard.size(); ++i)
    total += (spatial.col(static_cast<Eigen::Index>(i)) - centers.col(hard[i])).norm();
  return total;
}

/// seg_loss + weight * compactness_loss.
template <typename Scalar>
Scalar total_loss(const SoftAssignment<Scalar>& soft, const GroundTruth& gt,
                  const Eigen::Matrix<Scalar, 2, Eigen::Dynamic>& spatial, std::span<const std::uint32_t> hard,
                  Scalar weight = Scalar(kCompactnessWeight)) {
  return seg_loss(project_groundtruth(soft, gt), gt) + weight * compactness_loss(spatial, soft, hard);
}

/// All single-scale metrics of one segmentation against one ground truth;
/// f is the boundary F-measure at this scale.
template <typename Scalar>
MetricsReport evaluate(const LabelRaster& seg, const GroundTruth& gt, const BasicImage<Scalar>& img, int k_requested,
                       double eps = 2.0) {
  MetricsReport r;
  r.asa = asa(seg, gt);
  r.gr = global_regularity(seg);
  const BoundaryScore b = boundary_recall_precision(seg, gt, eps);
  r.recall = b.recall;
  r.precision = b.precision;
  r.f = b.f();
  r.ev = explained_variation(seg, img);
  r.k_realized = count_labels(seg);
  r.delta_k = delta_k(k_requested, r.k_realized);
  return r;
}

}  // namespace mcsp
