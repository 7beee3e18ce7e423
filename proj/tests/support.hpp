#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "mcsp/clustering.hpp"
#include "mcsp/color.hpp"
#include "mcsp/partition.hpp"
#include "mcsp/raster.hpp"

namespace mcsp::test {

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline double uniform_real(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline Image noise_image(int w, int h, Rng& rng) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  for (auto& v : px) v = static_cast<std::uint8_t>(uniform_int(rng, 0, 255));
  return Image(w, h, px);
}

inline Image constant_image(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  std::vector<std::uint8_t> px;
  px.reserve(static_cast<std::size_t>(w) * h * 3);
  for (int i = 0; i < w * h; ++i) px.insert(px.end(), {r, g, b});
  return Image(w, h, px);
}

/// Discrete Voronoi labels of `n` random sites; ties go to the lower site.
inline LabelRaster voronoi_labels(int w, int h, int n, Rng& rng) {
  std::vector<Eigen::Vector2d> sites(n);
  for (auto& s : sites) s = {uniform_real(rng, 0, w), uniform_real(rng, 0, h)};
  LabelRaster out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int best = 0;
      for (int s = 1; s < n; ++s)
        if ((sites[s] - Eigen::Vector2d(x, y)).squaredNorm() < (sites[best] - Eigen::Vector2d(x, y)).squaredNorm()) best = s;
      out(y, x) = static_cast<std::uint32_t>(best);
    }
  return out;
}

/// Piecewise-constant image: each region of `regions` gets a random color,
/// plus per-pixel noise of the given amplitude.
inline Image region_image(const LabelRaster& regions, int noise, Rng& rng) {
  std::vector<std::array<int, 3>> colors(regions.maxCoeff() + 1);
  for (auto& c : colors) c = {uniform_int(rng, 0, 255), uniform_int(rng, 0, 255), uniform_int(rng, 0, 255)};
  std::vector<std::uint8_t> px;
  px.reserve(static_cast<std::size_t>(regions.size()) * 3);
  for (Eigen::Index i = 0; i < regions.size(); ++i)
    for (int c = 0; c < 3; ++c)
      px.push_back(static_cast<std::uint8_t>(std::clamp(colors[regions.data()[i]][c] + uniform_int(rng, -noise, noise), 0, 255)));
  return Image(static_cast<int>(regions.cols()), static_cast<int>(regions.rows()), px);
}

/// Random prior: Voronoi objects with a few rectangles cut out as uncertain.
inline PriorPartition random_prior(int w, int h, int objects, int holes, Rng& rng) {
  LabelRaster labels = voronoi_labels(w, h, objects, rng);
  for (int k = 0; k < holes; ++k) {
    const int x0 = uniform_int(rng, 0, w - 1);
    const int y0 = uniform_int(rng, 0, h - 1);
    const int x1 = std::min(w, x0 + uniform_int(rng, 1, std::max(1, w / 6)));
    const int y1 = std::min(h, y0 + uniform_int(rng, 1, std::max(1, h / 6)));
    labels.block(y0, x0, y1 - y0, x1 - x0).setConstant(kUncertain);
  }
  return PriorPartition(std::move(labels));
}

inline LabelRaster random_labels(int w, int h, int classes, Rng& rng) {
  LabelRaster out(h, w);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = static_cast<std::uint32_t>(uniform_int(rng, 0, classes - 1));
  return out;
}

/// Random sparse soft assignment over `k` superpixels: every pixel gets 1..9
/// distinct candidates with positive weights summing to one.
inline SoftAssignment<double> random_soft(std::size_t pixels, int k, Rng& rng) {
  SoftAssignment<double> soft;
  CandidateMap& c = soft.candidates;
  c.seeds = static_cast<std::size_t>(k);
  c.index.setConstant(CandidateMap::kMaxCandidates, static_cast<Eigen::Index>(pixels), -1);
  c.count.resize(pixels);
  soft.weight.setZero(CandidateMap::kMaxCandidates, static_cast<Eigen::Index>(pixels));
  std::vector<int> ids(k);
  for (std::size_t p = 0; p < pixels; ++p) {
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    const int m = uniform_int(rng, 1, std::min(k, CandidateMap::kMaxCandidates));
    c.count[p] = static_cast<std::uint8_t>(m);
    double total = 0;
    for (int j = 0; j < m; ++j) {
      c.index(j, p) = ids[j];
      soft.weight(j, p) = uniform_real(rng, 0.01, 1.0);
      total += soft.weight(j, p);
    }
    soft.weight.col(p).head(m) /= total;
  }
  return soft;
}

}  // namespace mcsp::test
