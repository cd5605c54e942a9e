// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "tuckerforge/kernel.hpp"

#include <string>
#include <utility>

#include "tuckerforge/errors.hpp"

namespace tuckerforge {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv3d:
      return "conv3d";
    case LayerKind::convtranspose3d:
      return "convtranspose3d";
    case LayerKind::pointwise:
      return "pointwise";
  }
  return "conv3d";
}

LayerKind parse_layer_kind(std::string_view text) {
  if (text == "conv3d") return LayerKind::conv3d;
  if (text == "convtranspose3d") return LayerKind::convtranspose3d;
  if (text == "pointwise") return LayerKind::pointwise;
  throw ValidationError("unknown layer kind '" + std::string(text) + "'");
}

ConvKernel::ConvKernel(DenseTensor tensor, LayerKind kind) : tensor_(std::move(tensor)), kind_(kind) {
  if (tensor_.rank() != 5) {
    throw ValidationError("convolution kernel must have 5 axes (O, I, K_H, K_W, K_D), got shape " +
                          shape_to_string(tensor_.dims()));
  }
}

std::size_t ConvKernel::spatial_volume() const noexcept {
  return tensor_.dims()[2] * tensor_.dims()[3] * tensor_.dims()[4];
}

}  // namespace tuckerforge
