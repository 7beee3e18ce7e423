#include "mcsp/partition.hpp"

#include <utility>

namespace mcsp {

PriorPartition::PriorPartition(LabelRaster labels) : labels_(std::move(labels)) {
  const std::uint32_t* v = labels_.data();
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] == kUncertain)
      ++uncertain_;
    else
      ++areas_[v[i]];
  }
}

PriorPartition PriorPartition::whole(Dims d) { return PriorPartition(LabelRaster::Zero(d.height, d.width)); }

std::map<std::uint32_t, std::vector<std::size_t>> PriorPartition::object_pixels() const {
  std::map<std::uint32_t, std::vector<std::size_t>> out;
  for (const auto& [id, area] : areas_) out[id].reserve(area);
  const std::uint32_t* v = labels_.data();
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i)
    if (v[i] != kUncertain) out[v[i]].push_back(i);
  return out;
}

}  // namespace mcsp
