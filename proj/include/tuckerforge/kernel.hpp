// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "tuckerforge/tensor.hpp"

namespace tuckerforge {

using Triple = std::array<std::size_t, 3>;

enum class LayerKind { conv3d, convtranspose3d, pointwise };

std::string_view to_string(LayerKind kind);
LayerKind parse_layer_kind(std::string_view text);

/// A 3-D convolution kernel with axes (O, I, K_H, K_W, K_D).
///
/// Transposed-convolution kernels are stored after normalizing their axes to
/// the same (O, I, spatial...) layout.
class ConvKernel {
 public:
  explicit ConvKernel(DenseTensor tensor, LayerKind kind = LayerKind::conv3d);

  const DenseTensor& tensor() const noexcept { return tensor_; }
  DenseTensor& tensor() noexcept { return tensor_; }
  LayerKind kind() const noexcept { return kind_; }

  std::size_t out_channels() const noexcept { return tensor_.dims()[0]; }
  std::size_t in_channels() const noexcept { return tensor_.dims()[1]; }
  Triple spatial() const noexcept { return {tensor_.dims()[2], tensor_.dims()[3], tensor_.dims()[4]}; }
  std::size_t spatial_volume() const noexcept;
  bool is_pointwise() const noexcept { return spatial_volume() == 1; }

  friend bool operator==(const ConvKernel& a, const ConvKernel& b) = default;

 private:
  DenseTensor tensor_;
  LayerKind kind_;
};

}  // namespace tuckerforge
