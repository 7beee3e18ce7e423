#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

#include <Eigen/Core>

#include "mcsp/raster.hpp"

namespace mcsp {

template <typename Scalar>
using Lab = Eigen::Matrix<Scalar, 3, 1>;

namespace detail {

template <typename Scalar>
Scalar srgb_to_linear(Scalar c) {
  return c <= Scalar(0.04045) ? c / Scalar(12.92) : std::pow((c + Scalar(0.055)) / Scalar(1.055), Scalar(2.4));
}

template <typename Scalar>
Scalar lab_f(Scalar t) {
  constexpr double delta = 6.0 / 29.0;
  return t > Scalar(delta * delta * delta) ? std::cbrt(t) : t / Scalar(3.0 * delta * delta) + Scalar(4.0 / 29.0);
}

}  // namespace detail

/// sRGB (D65, standard gamma) to CIELAB.
template <typename Scalar = double>
Lab<Scalar> rgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  using detail::lab_f;
  using detail::srgb_to_linear;
  const Eigen::Matrix<Scalar, 3, 1> lin(srgb_to_linear(Scalar(r) / Scalar(255)),
                                        srgb_to_linear(Scalar(g) / Scalar(255)),
                                        srgb_to_linear(Scalar(b) / Scalar(255)));
  Eigen::Matrix<Scalar, 3, 3> m;
  m << Scalar(0.4124564), Scalar(0.3575761), Scalar(0.1804375),  //
      Scalar(0.2126729), Scalar(0.7151522), Scalar(0.0721750),   //
      Scalar(0.0193339), Scalar(0.1191920), Scalar(0.9503041);
  // White point is the row sums of m, so white maps to a = b = 0 exactly.
  const Eigen::Matrix<Scalar, 3, 1> white = m.rowwise().sum();
  const Eigen::Matrix<Scalar, 3, 1> xyz = (m * lin).cwiseQuotient(white);
  const Scalar fx = lab_f(xyz.x());
  const Scalar fy = lab_f(xyz.y());
  const Scalar fz = lab_f(xyz.z());
  const Scalar l = std::clamp(Scalar(116) * fy - Scalar(16), Scalar(0), Scalar(100));
  return {l, Scalar(500) * (fx - fy), Scalar(200) * (fy - fz)};
}

/// An RGB raster plus its Lab conversion. Lab is stored channel-major (one
/// contiguous column per channel, pixels in raster order).
template <typename Scalar>
class BasicImage {
 public:
  using Rgb = Eigen::Array<std::uint8_t, Eigen::Dynamic, 3, Eigen::RowMajor>;
  using LabMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, 3>;

  BasicImage() = default;

  /// `interleaved` holds width*height RGB triples in raster order.
  BasicImage(int width, int height, std::span<const std::uint8_t> interleaved) : dims_{width, height} {
    if (width <= 0 || height <= 0) throw std::invalid_argument("image dimensions must be positive");
    if (interleaved.size() != dims_.size() * 3) throw std::invalid_argument("rgb buffer size does not match dimensions");
    rgb_ = Eigen::Map<const Rgb>(interleaved.data(), static_cast<Eigen::Index>(dims_.size()), 3);
    convert();
  }

  BasicImage(int width, int height, Rgb rgb) : dims_{width, height}, rgb_(std::move(rgb)) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("image dimensions must be positive");
    if (static_cast<std::size_t>(rgb_.rows()) != dims_.size()) throw std::invalid_argument("rgb rows do not match dimensions");
    convert();
  }

  int width() const { return dims_.width; }
  int height() const { return dims_.height; }
  Dims dims() const { return dims_; }
  std::size_t size() const { return dims_.size(); }

  const Rgb& rgb() const { return rgb_; }
  const LabMatrix& lab() const { return lab_; }

 private:
  void convert() {
    lab_.resize(static_cast<Eigen::Index>(dims_.size()), 3);
    for (Eigen::Index i = 0; i < lab_.rows(); ++i) lab_.row(i) = rgb_to_lab<Scalar>(rgb_(i, 0), rgb_(i, 1), rgb_(i, 2)).transpose();
  }

  Dims dims_;
  Rgb rgb_;
  LabMatrix lab_;
};

using Image = BasicImage<double>;

}  // namespace mcsp
