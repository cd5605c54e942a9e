// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tuckerforge/container.hpp"
#include "tuckerforge/cost.hpp"
#include "tuckerforge/tucker.hpp"

namespace tuckerforge {

// A model container stores the JSON manifest
//
//   {"model": ..., "layers": [<layer>, ...]}
//
// where each layer carries the ArchDesc keys plus, once factorized, a
// "tucker" object {"t_o", "t_i", "df", "min_rank", "method",
// "explained_variance", "pointwise"}. Dense layers keep "<layer>.weight"
// (O, I, K_H, K_W, K_D); factorized layers keep "<layer>.u_in", ".core" and
// ".u_out" instead. Declared biases live in "<layer>.bias" (O).

struct DecompositionInfo {
  TuckerRanks ranks{1, 1};
  double df = 0.0;
  std::size_t min_rank = 8;
  std::string method = "hosvd";
  double explained_variance = 0.0;
  bool pointwise = false;
};

struct ModelManifest {
  ArchDesc arch;
  std::map<std::string, DecompositionInfo, std::less<>> decompositions;

  const DecompositionInfo* decomposition(std::string_view layer) const;
};

ModelManifest parse_manifest(std::string_view text);
std::string dump_manifest(const ModelManifest& manifest);

std::string weight_name(std::string_view layer);
std::string bias_name(std::string_view layer);

/// Dense kernel of `layer`, shape-checked against its description.
ConvKernel load_kernel(const Container& c, const LayerDesc& layer);

/// Random-weight model for an architecture (seeded, reproducible).
Container synthesize_model(const ArchDesc& arch, std::uint64_t seed, DType dtype = DType::f64);

struct CompressOptions {
  RankPolicy policy;
  Eligibility eligibility;
  bool hooi = false;
  HooiOptions hooi_options;
  std::size_t threads = 1;
};

struct CompressedLayer {
  std::string name;
  TuckerRanks ranks{1, 1};
  double explained_variance = 0.0;
  std::uint64_t params_original = 0;
  std::uint64_t params_tucker = 0;
  bool pointwise = false;
};

/// Factorizes every eligible dense layer. Tensor and manifest order follow
/// the input manifest whatever the thread count.
Container compress_model(const Container& original, const CompressOptions& options,
                         std::vector<CompressedLayer>* summary = nullptr);

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::size_t max_extent = 16;  ///< spatial input extents are capped at this (0 = no cap)
  double tolerance = 1e-9;
  std::size_t threads = 1;
};

struct VerifyLayer {
  std::string name;
  Triple input_dims{};
  double identity_error = 0.0;       ///< factorized vs direct on the reconstructed kernel
  double approximation_error = 0.0;  ///< factorized vs direct on the original kernel
};

struct VerifyReport {
  std::vector<VerifyLayer> layers;
  std::vector<std::string> skipped;  ///< factorized transposed layers (not executable)
  double max_identity_error = 0.0;
  double max_approximation_error = 0.0;
  bool passed = true;
};

/// max|a − b| / max|b|.
double max_relative_error(const FeatureMap& a, const FeatureMap& b);

VerifyReport verify_model(const Container& original, const Container& compressed, const VerifyOptions& options);

}  // namespace tuckerforge
