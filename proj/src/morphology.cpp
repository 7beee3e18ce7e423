#include "mcsp/morphology.hpp"

#include <algorithm>
#include <vector>

namespace mcsp {
namespace {

// Separable box filter over the clipped window. `keep(count, window)` decides
// the output from the number of set pixels in the window.
template <typename Keep>
BinaryRaster box_filter(const BinaryRaster& in, int radius, Keep&& keep) {
  const int h = static_cast<int>(in.rows());
  const int w = static_cast<int>(in.cols());
  BinaryRaster tmp(h, w);
  BinaryRaster out(h, w);
  std::vector<int> prefix(static_cast<std::size_t>(std::max(w, h)) + 1);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) prefix[x + 1] = prefix[x] + (in(y, x) != 0);
    for (int x = 0; x < w; ++x) {
      const int lo = std::max(0, x - radius);
      const int hi = std::min(w - 1, x + radius);
      tmp(y, x) = keep(prefix[hi + 1] - prefix[lo], hi - lo + 1) ? 1 : 0;
    }
  }
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) prefix[y + 1] = prefix[y] + (tmp(y, x) != 0);
    for (int y = 0; y < h; ++y) {
      const int lo = std::max(0, y - radius);
      const int hi = std::min(h - 1, y + radius);
      out(y, x) = keep(prefix[hi + 1] - prefix[lo], hi - lo + 1) ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

BinaryRaster erode(const BinaryRaster& mask, int radius) {
  if (radius <= 0) return (mask != 0).cast<std::uint8_t>();
  return box_filter(mask, radius, [](int count, int window) { return count == window; });
}

BinaryRaster dilate(const BinaryRaster& mask, int radius) {
  if (radius <= 0) return (mask != 0).cast<std::uint8_t>();
  return box_filter(mask, radius, [](int count, int) { return count > 0; });
}

BinaryRaster morphological_open(const BinaryRaster& mask, int radius) { return dilate(erode(mask, radius), radius); }

BinaryRaster label_gradient(const LabelRaster& labels, int radius) {
  const int h = static_cast<int>(labels.rows());
  const int w = static_cast<int>(labels.cols());
  BinaryRaster out = BinaryRaster::Zero(h, w);
  if (radius <= 0) return out;

  LabelRaster lo(h, w);
  LabelRaster hi(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int a = std::max(0, x - radius);
      const int b = std::min(w - 1, x + radius);
      lo(y, x) = labels.row(y).segment(a, b - a + 1).minCoeff();
      hi(y, x) = labels.row(y).segment(a, b - a + 1).maxCoeff();
    }
  }
  for (int y = 0; y < h; ++y) {
    const int a = std::max(0, y - radius);
    const int b = std::min(h - 1, y + radius);
    for (int x = 0; x < w; ++x) {
      const std::uint32_t mn = lo.col(x).segment(a, b - a + 1).minCoeff();
      const std::uint32_t mx = hi.col(x).segment(a, b - a + 1).maxCoeff();
      out(y, x) = mn != mx ? 1 : 0;
    }
  }
  return out;
}

}  // namespace mcsp
