#include "mcsp/aggregation.hpp"

#include <algorithm>
#include <stdexcept>

#include "mcsp/morphology.hpp"

namespace mcsp {

AggregationConfig AggregationConfig::defaults_for(Dims d) {
  return {std::max<std::size_t>(64, d.size() / 1000), 1};
}

std::size_t mask_area(const BinaryRaster& mask) { return static_cast<std::size_t>((mask != 0).count()); }

MaskStack filter_min_area(const MaskStack& stack, const AggregationConfig& cfg) {
  MaskStack out{stack.dims, {}};
  for (const auto& m : stack.masks)
    if (mask_area(m) >= cfg.min_area) out.masks.push_back(m);
  return out;
}

MaskStack remove_overlaps(const MaskStack& stack) {
  const std::size_t n = stack.dims.size();
  std::vector<std::size_t> areas;
  areas.reserve(stack.size());
  for (const auto& m : stack.masks) {
    if (dims_of(m) != stack.dims) throw std::invalid_argument("mask dimensions do not match the stack");
    areas.push_back(mask_area(m));
  }

  MaskStack out{stack.dims, {}};
  for (std::size_t k = 0; k < stack.size(); ++k) out.masks.push_back(BinaryRaster::Zero(stack.dims.height, stack.dims.width));

  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = stack.size();
    for (std::size_t k = 0; k < stack.size(); ++k) {
      if (stack.masks[k].data()[i] == 0) continue;
      if (best == stack.size() || areas[k] < areas[best]) best = k;
    }
    if (best != stack.size()) out.masks[best].data()[i] = 1;
  }
  return out;
}

PriorPartition aggregate(const MaskStack& stack, Dims dims, const AggregationConfig& cfg) {
  if (cfg.min_area < 1) throw std::invalid_argument("min_area must be at least 1");
  if (cfg.opening_radius < 0) throw std::invalid_argument("opening_radius must be non-negative");
  if (!stack.masks.empty() && stack.dims != dims) throw std::invalid_argument("mask stack dimensions do not match image");

  const MaskStack disjoint = remove_overlaps(filter_min_area(stack, cfg));

  // Objects that still meet the area threshold after overlap removal.
  std::vector<std::pair<std::size_t, std::size_t>> kept;  // (area, stack index)
  for (std::size_t k = 0; k < disjoint.size(); ++k) {
    const std::size_t area = mask_area(disjoint.masks[k]);
    if (area >= cfg.min_area) kept.emplace_back(area, k);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  LabelRaster labels = LabelRaster::Constant(dims.height, dims.width, kUncertain);
  const std::size_t n = dims.size();
  for (std::size_t id = 0; id < kept.size(); ++id) {
    const std::uint8_t* m = disjoint.masks[kept[id].second].data();
    for (std::size_t i = 0; i < n; ++i)
      if (m[i]) labels.data()[i] = static_cast<std::uint32_t>(id);
  }

  const BinaryRaster unlabeled = (labels == kUncertain).cast<std::uint8_t>();
  const Components comps = connected_components(morphological_open(unlabeled, cfg.opening_radius));
  std::vector<std::pair<std::size_t, std::uint32_t>> background;  // (area, component)
  for (std::uint32_t c = 0; c < comps.count(); ++c)
    if (comps.areas[c] >= cfg.min_area) background.emplace_back(comps.areas[c], c);

  // Final ids: all objects by decreasing area, proposals before background
  // components at equal area.
  std::vector<std::uint32_t> proposal_id(kept.size());
  std::vector<std::uint32_t> comp_to_id(comps.count(), kUncertain);
  {
    std::size_t a = 0;
    std::size_t b = 0;
    std::stable_sort(background.begin(), background.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    for (std::uint32_t id = 0; a < kept.size() || b < background.size(); ++id) {
      if (b == background.size() || (a < kept.size() && kept[a].first >= background[b].first))
        proposal_id[a++] = id;
      else
        comp_to_id[background[b++].second] = id;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t l = labels.data()[i];
    const std::uint32_t c = comps.ids.data()[i];
    if (l != kUncertain)
      labels.data()[i] = proposal_id[l];
    else if (c != kUncertain && comp_to_id[c] != kUncertain)
      labels.data()[i] = comp_to_id[c];
  }

  if (kept.empty() && background.empty()) return PriorPartition::whole(dims);
  return PriorPartition(std::move(labels));
}

MaskStack to_masks(const PriorPartition& partition) {
  const Dims d = partition.dims();
  MaskStack out{d, {}};
  for (const auto& [id, area] : partition.areas()) out.masks.push_back((partition.labels() == id).cast<std::uint8_t>());
  return out;
}

}  // namespace mcsp
