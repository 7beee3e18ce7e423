#include "mcsp/adaptive.hpp"

#include <stdexcept>
#include <vector>

namespace mcsp {

SalienceClasses classify_salient(const PriorPartition& partition, const SaliencyMap& saliency, double threshold) {
  if (dims_of(saliency) != partition.dims()) throw std::invalid_argument("saliency dimensions do not match the prior");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw std::invalid_argument("saliency threshold must lie in [0, 1]");
  std::map<std::uint32_t, double> sum;
  const std::size_t n = partition.size();
  for (std::size_t i = 0; i < n; ++i)
    if (!partition.uncertain(i)) sum[partition.at(i)] += saliency.data()[i];

  SalienceClasses out;
  for (const auto& [id, area] : partition.areas())
    out[id] = sum[id] / double(area) > threshold ? Salience::foreground : Salience::background;
  return out;
}

Quotas va_quotas(const PriorPartition& partition, const SalienceClasses& classes, int k, double r) {
  if (!(r >= 1.0)) throw std::invalid_argument("attention ratio r must be at least 1");
  double image = 0;
  double background = 0;
  std::size_t n_background = 0;
  for (const auto& [id, area] : partition.areas()) {
    image += double(area);
    const auto it = classes.find(id);
    if (it == classes.end() || it->second == Salience::background) {
      background += double(area);
      ++n_background;
    }
  }

  Quotas q;
  double fg_total = 0;
  for (const auto& [id, area] : partition.areas()) {
    const auto it = classes.find(id);
    if (it != classes.end() && it->second == Salience::foreground) {
      q[id] = double(area) / image * double(k) * r;
      fg_total += q[id];
    }
  }

  if (fg_total >= double(k)) {
    const double fg_area = image - background;
    const double share = double(k) - double(n_background);
    for (auto& [id, v] : q) v = double(partition.areas().at(id)) / fg_area * share;
    for (const auto& [id, area] : partition.areas())
      if (!q.contains(id)) q[id] = 1.0;
    return q;
  }
  for (const auto& [id, area] : partition.areas())
    if (!q.contains(id)) q[id] = double(area) / background * (double(k) - fg_total);
  return q;
}

Quotas user_quotas(const PriorPartition& partition, const FactorMap& factors, int k) {
  for (const auto& [id, f] : factors)
    if (!(f > 0.0)) throw std::invalid_argument("factor must be positive");
  double image = 0;
  for (const auto& [id, area] : partition.areas()) image += double(area);

  Quotas q;
  double total = 0;
  for (const auto& [id, area] : partition.areas()) {
    const auto it = factors.find(id);
    q[id] = double(area) / image * double(k) * (it == factors.end() ? 1.0 : it->second);
    total += q[id];
  }
  for (auto& [id, v] : q) v *= double(k) / total;
  return q;
}

SeedCounts va_allocate(const PriorPartition& partition, const SalienceClasses& classes, int k, double r) {
  if (static_cast<std::size_t>(std::max(k, 0)) < partition.object_count()) throw InsufficientBudget(k, partition.object_count());
  return round_quotas(va_quotas(partition, classes, k, r), k);
}

SeedCounts user_allocate(const PriorPartition& partition, const FactorMap& factors, int k) {
  return round_quotas(user_quotas(partition, factors, k), k);
}

}  // namespace mcsp
