#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "mcsp/connectivity.hpp"
#include "mcsp/features.hpp"
#include "mcsp/labeling.hpp"
#include "mcsp/parallel.hpp"
#include "mcsp/partition.hpp"
#include "mcsp/seeding.hpp"

namespace mcsp {

/// Up to kMaxCandidates seed indices per pixel, nearest first. Unused slots
/// hold -1.
struct CandidateMap {
  static constexpr int kMaxCandidates = 9;

  Eigen::Array<std::int32_t, kMaxCandidates, Eigen::Dynamic> index;
  std::vector<std::uint8_t> count;
  std::size_t seeds = 0;

  std::size_t pixels() const { return count.size(); }
};

/// Candidates restricted to seeds of the pixel's own object (any object for
/// uncertain pixels) within candidate_radius_factor * sqrt(|I| / K); the
/// single nearest eligible seed when none is in range. Distance ties go to the
/// lower seed index.
CandidateMap build_candidates(const PriorPartition& partition, const SeedSet& seeds, const ClusterConfig& cfg);

/// Per-pixel weights over the candidates of a CandidateMap; each column sums
/// to one over its first count[p] entries.
template <typename Scalar>
struct SoftAssignment {
  CandidateMap candidates;
  Eigen::Array<Scalar, CandidateMap::kMaxCandidates, Eigen::Dynamic> weight;

  std::size_t pixels() const { return candidates.pixels(); }
  std::size_t superpixels() const { return candidates.seeds; }
};

template <typename Scalar>
using CenterMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Feature columns at the seed pixels.
template <typename Scalar>
CenterMatrix<Scalar> initial_centers(const FeatureMatrix<Scalar>& features, const SeedSet& seeds) {
  CenterMatrix<Scalar> c(features.rows(), static_cast<Eigen::Index>(seeds.size()));
  for (std::size_t k = 0; k < seeds.size(); ++k)
    c.col(static_cast<Eigen::Index>(k)) = features.col(static_cast<Eigen::Index>(seeds.seeds[k].pixel));
  return c;
}

/// q_pk = exp(-|f_p - c_k|^2) / sum over candidates, with the smallest
/// distance subtracted before exponentiation.
template <typename Scalar>
SoftAssignment<Scalar> soft_assign(const FeatureMatrix<Scalar>& features, const CenterMatrix<Scalar>& centers,
                                   CandidateMap candidates, int workers = 1) {
  if (static_cast<std::size_t>(features.cols()) != candidates.pixels())
    throw std::invalid_argument("feature and candidate pixel counts differ");
  if (!centers.allFinite()) throw std::invalid_argument("centers must be finite");
  SoftAssignment<Scalar> soft{std::move(candidates), {}};
  const CandidateMap& cand = soft.candidates;
  soft.weight.setZero(CandidateMap::kMaxCandidates, features.cols());

  for_each_chunk(cand.pixels(), kPixelChunk, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::array<Scalar, CandidateMap::kMaxCandidates> dist;
    for (std::size_t p = begin; p < end; ++p) {
      const auto pi = static_cast<Eigen::Index>(p);
      const int m = cand.count[p];
      Scalar dmin = std::numeric_limits<Scalar>::infinity();
      for (int j = 0; j < m; ++j) {
        dist[j] = (features.col(pi) - centers.col(cand.index(j, pi))).squaredNorm();
        dmin = std::min(dmin, dist[j]);
      }
      Scalar total = 0;
      for (int j = 0; j < m; ++j) {
        dist[j] = std::exp(dmin - dist[j]);
        total += dist[j];
      }
      for (int j = 0; j < m; ++j) soft.weight(j, pi) = dist[j] / total;
    }
  });
  return soft;
}

/// c_k = sum_p q_pk f_p / sum_p q_pk. Seeds with no weight keep `previous`.
/// Partial sums are reduced in fixed chunk order, so the result does not
/// depend on the worker count.
template <typename Scalar>
CenterMatrix<Scalar> update_centers(const FeatureMatrix<Scalar>& features, const SoftAssignment<Scalar>& soft,
                                    const CenterMatrix<Scalar>& previous, int workers = 1) {
  const CandidateMap& cand = soft.candidates;
  const Eigen::Index dim = features.rows();
  const auto k = static_cast<Eigen::Index>(cand.seeds);
  const std::size_t chunks = (cand.pixels() + kPixelChunk - 1) / kPixelChunk;
  std::vector<CenterMatrix<Scalar>> sums(chunks);
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> mass(chunks);

  for_each_chunk(cand.pixels(), kPixelChunk, workers, [&](std::size_t c, std::size_t begin, std::size_t end) {
    sums[c].setZero(dim, k);
    mass[c].setZero(k);
    for (std::size_t p = begin; p < end; ++p) {
      const auto pi = static_cast<Eigen::Index>(p);
      for (int j = 0; j < cand.count[p]; ++j) {
        const Scalar q = soft.weight(j, pi);
        const std::int32_t s = cand.index(j, pi);
        sums[c].col(s) += q * features.col(pi);
        mass[c](s) += q;
      }
    }
  });

  CenterMatrix<Scalar> total = CenterMatrix<Scalar>::Zero(dim, k);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weight = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(k);
  for (std::size_t c = 0; c < chunks; ++c) {
    total += sums[c];
    weight += mass[c];
  }
  CenterMatrix<Scalar> out = previous;
  for (Eigen::Index s = 0; s < k; ++s)
    if (weight(s) > Scalar(0)) out.col(s) = total.col(s) / weight(s);
  return out;
}

/// Argmax over candidates; ties go to the lower seed index.
template <typename Scalar>
std::vector<std::uint32_t> harden(const SoftAssignment<Scalar>& soft) {
  const CandidateMap& cand = soft.candidates;
  std::vector<std::uint32_t> hard(cand.pixels());
  for (std::size_t p = 0; p < cand.pixels(); ++p) {
    const auto pi = static_cast<Eigen::Index>(p);
    int best = 0;
    for (int j = 1; j < cand.count[p]; ++j) {
      const Scalar q = soft.weight(j, pi);
      const Scalar qb = soft.weight(best, pi);
      if (q > qb || (q == qb && cand.index(j, pi) < cand.index(best, pi))) best = j;
    }
    hard[p] = static_cast<std::uint32_t>(cand.index(best, pi));
  }
  return hard;
}

template <typename Scalar>
struct ClusterResult {
  SoftAssignment<Scalar> soft;
  CenterMatrix<Scalar> centers;
  std::vector<std::uint32_t> hard;  // per-pixel seed index before connectivity repair
  SuperpixelLabeling labeling;      // connected, dense ids
};

/// Iterated soft assignment and center updates from the seed features, then
/// argmax hardening and connectivity repair. min_fragment = 0 selects the
/// default.
template <typename Scalar>
ClusterResult<Scalar> cluster(const BasicImage<Scalar>& img, const BasicFeatureStack<Scalar>& deep,
                              const PriorPartition& partition, const SeedSet& seeds, const ClusterConfig& cfg,
                              std::size_t min_fragment = 0) {
  cfg.validate();
  if (partition.dims() != img.dims()) throw std::invalid_argument("partition dimensions do not match image");
  if (seeds.size() == 0) throw std::invalid_argument("no seeds");

  const FeatureMatrix<Scalar> features = assemble_features(img, deep, cfg);
  const CandidateMap cand = build_candidates(partition, seeds, cfg);
  CenterMatrix<Scalar> centers = initial_centers(features, seeds);

  SoftAssignment<Scalar> soft;
  for (int it = 0; it < cfg.iterations; ++it) {
    soft = soft_assign(features, centers, cand, cfg.workers);
    centers = update_centers(features, soft, centers, cfg.workers);
  }

  ClusterResult<Scalar> out{std::move(soft), std::move(centers), {}, {}};
  out.hard = harden(out.soft);
  SuperpixelLabeling raw;
  raw.labels.resize(img.height(), img.width());
  std::copy(out.hard.begin(), out.hard.end(), raw.labels.data());
  raw.owner.reserve(seeds.size());
  for (const auto& s : seeds.seeds) raw.owner.push_back(s.object_id);

  if (min_fragment == 0) min_fragment = default_min_fragment(img.size(), cfg.k);
  out.labeling = enforce_connectivity(raw, partition, min_fragment);
  return out;
}

}  // namespace mcsp
