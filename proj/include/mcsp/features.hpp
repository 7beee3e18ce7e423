#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

#include "mcsp/color.hpp"
#include "mcsp/raster.hpp"

namespace mcsp {

/// Optional per-pixel deep features, channel-major: an N x D matrix whose
/// column c holds channel c for every pixel in raster order. D = 0 means none.
template <typename Scalar>
struct BasicFeatureStack {
  Dims dims;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> data;

  int depth() const { return static_cast<int>(data.cols()); }
  bool empty() const { return data.cols() == 0; }

  static BasicFeatureStack none(Dims d) {
    return {d, Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>(static_cast<Eigen::Index>(d.size()), 0)};
  }
};

using FeatureStack = BasicFeatureStack<double>;

struct ClusterConfig {
  int k = 400;
  double lambda_c = 0.26;
  double lambda_s = 7.5;
  int iterations = 10;
  double candidate_radius_factor = 3.0;
  std::uint64_t rng_seed = 0;
  int workers = 1;

  void validate() const {
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    if (!(lambda_c > 0) || !(lambda_s > 0)) throw std::invalid_argument("lambda_c and lambda_s must be positive");
    if (iterations < 1) throw std::invalid_argument("iterations must be at least 1");
    if (!(candidate_radius_factor > 0)) throw std::invalid_argument("candidate_radius_factor must be positive");
  }
};

/// Expected superpixel side length sqrt(|I| / K); the unit of the spatial
/// feature channels.
inline double superpixel_scale(std::size_t pixels, int k) {
  return std::sqrt(static_cast<double>(pixels) / static_cast<double>(k));
}

/// Per-pixel feature vectors, one column per pixel in raster order:
/// rows 0-2 lambda_c * Lab, rows 3-4 lambda_s * (x, y) / sigma, rows 5.. deep.
template <typename Scalar>
using FeatureMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
FeatureMatrix<Scalar> assemble_features(const BasicImage<Scalar>& img, const BasicFeatureStack<Scalar>& deep,
                                        const ClusterConfig& cfg) {
  cfg.validate();
  const std::size_t n = img.size();
  if (!deep.empty() && (deep.dims != img.dims() || static_cast<std::size_t>(deep.data.rows()) != n))
    throw std::invalid_argument("feature stack dimensions do not match image");

  const Eigen::Index depth = deep.empty() ? 0 : deep.data.cols();
  const Scalar lc = static_cast<Scalar>(cfg.lambda_c);
  const Scalar ls = static_cast<Scalar>(cfg.lambda_s / superpixel_scale(n, cfg.k));

  FeatureMatrix<Scalar> f(5 + depth, static_cast<Eigen::Index>(n));
  f.topRows(3).noalias() = lc * img.lab().transpose();
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const Eigen::Index i = static_cast<Eigen::Index>(y) * img.width() + x;
      f(3, i) = ls * Scalar(x);
      f(4, i) = ls * Scalar(y);
    }
  }
  if (depth > 0) f.bottomRows(depth) = deep.data.transpose();
  return f;
}

/// Unscaled spatial features (x / sigma, y / sigma), 2 x N.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, Eigen::Dynamic> normalized_coordinates(Dims d, int k) {
  const Scalar inv = Scalar(1) / static_cast<Scalar>(superpixel_scale(d.size(), k));
  Eigen::Matrix<Scalar, 2, Eigen::Dynamic> s(2, static_cast<Eigen::Index>(d.size()));
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x) s.col(static_cast<Eigen::Index>(y) * d.width + x) << Scalar(x) * inv, Scalar(y) * inv;
  return s;
}

}  // namespace mcsp
