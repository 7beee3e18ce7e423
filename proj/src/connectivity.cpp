#include "mcsp/connectivity.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

namespace mcsp {

std::size_t default_min_fragment(std::size_t pixels, int k) {
  return std::max<std::size_t>(1, pixels / static_cast<std::size_t>(std::max(k, 1)) / 4);
}

SuperpixelLabeling enforce_connectivity(const SuperpixelLabeling& labeling, const PriorPartition& partition,
                                        std::size_t min_fragment) {
  const Dims d = labeling.dims();
  if (partition.dims() != d) throw std::invalid_argument("labeling and partition dimensions differ");
  const std::size_t n = d.size();
  const std::uint32_t* labels = labeling.labels.data();
  for (std::size_t i = 0; i < n; ++i)
    if (labels[i] >= labeling.owner.size()) throw std::invalid_argument("superpixel id without an owner");

  const Components comps = connected_components(labeling.labels);
  const std::size_t nc = comps.count();
  const std::uint32_t* comp_of = comps.ids.data();

  // Pixels grouped by component (CSR layout).
  std::vector<std::size_t> start(nc + 1, 0);
  for (std::size_t i = 0; i < n; ++i) ++start[comp_of[i] + 1];
  for (std::size_t c = 0; c < nc; ++c) start[c + 1] += start[c];
  std::vector<std::size_t> pixels(n);
  {
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < n; ++i) pixels[fill[comp_of[i]]++] = i;
  }

  std::vector<std::uint32_t> comp_label(nc);
  std::vector<bool> uncertain_only(nc, true);
  for (std::size_t c = 0; c < nc; ++c) {
    comp_label[c] = labels[comps.first_pixel[c]];
    for (std::size_t k = start[c]; k < start[c + 1]; ++k)
      if (!partition.uncertain(pixels[k])) {
        uncertain_only[c] = false;
        break;
      }
  }

  // Largest component per superpixel, first in raster order on ties.
  std::map<std::uint32_t, std::size_t> primary;
  for (std::size_t c = 0; c < nc; ++c) {
    auto [it, inserted] = primary.emplace(comp_label[c], c);
    if (!inserted && comps.areas[c] > comps.areas[it->second]) it->second = c;
  }

  // Provisional ids order exactly like final ids: original ids first, then
  // new superpixels by component index.
  const std::uint64_t fresh_base = labeling.owner.size();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> region(nc, kNone);
  std::vector<std::uint64_t> provisional(nc, 0);
  std::vector<std::size_t> pending;
  for (std::size_t c = 0; c < nc; ++c) {
    if (primary.at(comp_label[c]) == c) {
      region[c] = c;
      provisional[c] = comp_label[c];
    } else if (comps.areas[c] >= min_fragment) {
      region[c] = c;
      provisional[c] = fresh_base + c;
    } else {
      pending.push_back(c);
    }
  }

  const auto owner_of_region = [&](std::size_t r) { return labeling.owner[comp_label[r]]; };

  while (!pending.empty()) {
    bool progress = false;
    std::vector<std::size_t> still;
    for (const std::size_t c : pending) {
      std::map<std::size_t, std::size_t> shared;  // region -> boundary length
      for (std::size_t k = start[c]; k < start[c + 1]; ++k) {
        const std::size_t i = pixels[k];
        for_each_4neighbor(static_cast<int>(i % d.width), static_cast<int>(i / d.width), d, [&](std::size_t j) {
          const std::size_t r = region[comp_of[j]];
          if (comp_of[j] == c || r == kNone) return;
          if (!uncertain_only[c] && owner_of_region(r) != labeling.owner[comp_label[c]]) return;
          ++shared[r];
        });
      }
      std::size_t best = kNone;
      for (const auto& [r, len] : shared) {
        if (best == kNone || len > shared[best] || (len == shared[best] && provisional[r] < provisional[best])) best = r;
      }
      if (best == kNone) {
        still.push_back(c);
      } else {
        region[c] = best;
        progress = true;
      }
    }
    pending.swap(still);
    if (!progress && !pending.empty()) {
      const std::size_t c = pending.front();
      region[c] = c;
      provisional[c] = fresh_base + c;
      pending.erase(pending.begin());
    }
  }

  std::vector<std::uint64_t> used;
  for (std::size_t c = 0; c < nc; ++c)
    if (region[c] == c) used.push_back(provisional[c]);
  std::sort(used.begin(), used.end());

  std::vector<std::uint32_t> final_id(nc);
  SuperpixelLabeling out;
  out.owner.resize(used.size());
  for (std::size_t c = 0; c < nc; ++c) {
    if (region[c] != c) continue;
    const auto id = static_cast<std::uint32_t>(std::lower_bound(used.begin(), used.end(), provisional[c]) - used.begin());
    final_id[c] = id;
    out.owner[id] = owner_of_region(c);
  }
  out.labels.resize(d.height, d.width);
  for (std::size_t i = 0; i < n; ++i) out.labels.data()[i] = final_id[region[comp_of[i]]];
  return out;
}

}  // namespace mcsp
