#include "mcsp/raster.hpp"

#include <vector>

namespace mcsp {
namespace {

// Iterative flood fill; `same(i, j)` says whether neighbor j joins i's component
// and `eligible(i)` whether pixel i takes part at all.
template <typename Eligible, typename Same>
Components label_components(Dims d, Eligible&& eligible, Same&& same) {
  Components out;
  out.ids = LabelRaster::Constant(d.height, d.width, kUncertain);
  std::uint32_t* ids = out.ids.data();
  std::vector<std::size_t> stack;
  const std::size_t n = d.size();
  for (std::size_t start = 0; start < n; ++start) {
    if (ids[start] != kUncertain || !eligible(start)) continue;
    const auto id = static_cast<std::uint32_t>(out.areas.size());
    std::size_t area = 0;
    ids[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      ++area;
      const int x = static_cast<int>(i % d.width);
      const int y = static_cast<int>(i / d.width);
      for_each_4neighbor(x, y, d, [&](std::size_t j) {
        if (ids[j] == kUncertain && eligible(j) && same(i, j)) {
          ids[j] = id;
          stack.push_back(j);
        }
      });
    }
    out.areas.push_back(area);
    out.first_pixel.push_back(start);
  }
  return out;
}

}  // namespace

Components connected_components(const LabelRaster& labels) {
  const std::uint32_t* v = labels.data();
  return label_components(
      dims_of(labels), [](std::size_t) { return true; }, [v](std::size_t i, std::size_t j) { return v[i] == v[j]; });
}

Components connected_components(const LabelRaster& labels, std::uint32_t ignore) {
  const std::uint32_t* v = labels.data();
  return label_components(
      dims_of(labels), [v, ignore](std::size_t i) { return v[i] != ignore; },
      [v](std::size_t i, std::size_t j) { return v[i] == v[j]; });
}

Components connected_components(const BinaryRaster& mask) {
  const std::uint8_t* v = mask.data();
  return label_components(
      dims_of(mask), [v](std::size_t i) { return v[i] != 0; }, [](std::size_t, std::size_t) { return true; });
}

}  // namespace mcsp
