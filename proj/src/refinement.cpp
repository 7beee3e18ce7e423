#include "mcsp/refinement.hpp"

#include <stdexcept>

#include "mcsp/morphology.hpp"

namespace mcsp {

PriorPartition dilate_borders(const LabelRaster& semantic, int kernel) {
  if (kernel < 1 || kernel % 2 == 0) throw std::invalid_argument("kernel must be odd and at least 1");
  // The window around p holds another class iff p lies within (kernel - 1) / 2
  // of the class change.
  const BinaryRaster band = label_gradient(semantic, (kernel - 1) / 2);
  LabelRaster labels = semantic;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (semantic.data()[i] == kUncertain) throw std::invalid_argument("semantic map uses the reserved uncertain label");
    if (band.data()[i]) labels.data()[i] = kUncertain;
  }
  return PriorPartition(std::move(labels));
}

LabelRaster refine(const Image& img, const LabelRaster& semantic, const RefineConfig& cfg) {
  if (dims_of(semantic) != img.dims()) throw std::invalid_argument("semantic map dimensions do not match image");
  const PriorPartition prior = dilate_borders(semantic, cfg.kernel);
  if (prior.object_count() == 0) return semantic;  // everything is border: nothing to anchor on

  SegmentOptions opt;
  opt.cluster = cfg.cluster;
  opt.cluster.k = cfg.k;
  opt.seeding = cfg.seeding;
  const Segmentation seg = segment(img, FeatureStack::none(img.dims()), prior, opt);

  LabelRaster out(semantic.rows(), semantic.cols());
  const auto& lab = seg.labeling();
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = lab.owner[lab.labels.data()[i]];
  return out;
}

}  // namespace mcsp
