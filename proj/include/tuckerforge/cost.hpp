// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tuckerforge/conv.hpp"
#include "tuckerforge/kernel.hpp"
#include "tuckerforge/tucker.hpp"

namespace tuckerforge {

/// One convolution layer as far as cost accounting is concerned.
struct LayerDesc {
  std::string name;
  LayerKind kind = LayerKind::conv3d;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  Triple kernel{1, 1, 1};
  ConvSpec spec;
  Triple input_dims{1, 1, 1};
  bool bias = false;

  std::size_t kernel_volume() const noexcept { return kernel[0] * kernel[1] * kernel[2]; }

  /// Forward layers use the usual output-size formula; transposed layers use
  /// (H − 1)·S − 2P + K.
  Triple output_dims() const;

  bool is_pointwise() const noexcept { return kernel_volume() == 1; }
  void validate() const;
};

struct ArchDesc {
  std::string model;
  std::vector<LayerDesc> layers;

  void validate() const;
  const LayerDesc* find(std::string_view name) const;
};

/// Which layers get factorized.
struct Eligibility {
  bool include_pointwise = false;
  bool include_transposed = false;

  bool eligible(const LayerDesc& layer) const noexcept;
};

// Counts below are multiply-accumulates (one MAC = one FLOP unit); biases are
// not included.
std::uint64_t params_direct(const LayerDesc& layer);
std::uint64_t params_tucker(const LayerDesc& layer, TuckerRanks ranks);
std::uint64_t flops_direct(const LayerDesc& layer);

/// T_I·I·HWD + T_O·T_I·K³·H'W'D' + O·T_O·H'W'D'. For transposed layers the
/// first two terms run at the input resolution and only the final projection
/// at the (larger) output resolution; such figures are flagged approximate.
std::uint64_t flops_tucker(const LayerDesc& layer, TuckerRanks ranks);

double compression_ratio(std::uint64_t original_params, std::uint64_t compressed_params);

struct LayerCost {
  std::string name;
  LayerKind kind = LayerKind::conv3d;
  std::size_t out_channels = 0;
  std::size_t in_channels = 0;
  Triple kernel{1, 1, 1};
  bool decomposed = false;
  std::optional<TuckerRanks> ranks;
  std::uint64_t params_original = 0;
  std::uint64_t params_tucker = 0;
  std::uint64_t flops_original = 0;
  std::uint64_t flops_tucker = 0;
  std::uint64_t bias_params = 0;
  bool approximate = false;  ///< transposed-convolution FLOP estimate
  bool pointwise = false;    ///< factorizing triples the layer count for little gain
};

struct CostReport {
  std::string model;
  RankPolicy policy;
  std::vector<LayerCost> layers;
  std::uint64_t params_original = 0;
  std::uint64_t params_tucker = 0;
  std::uint64_t flops_original = 0;
  std::uint64_t flops_tucker = 0;
  std::uint64_t bias_params = 0;

  /// 1 − compressed/original, as a fraction.
  double param_reduction() const noexcept;
  double flop_reduction() const noexcept;
  double compression_ratio() const;
};

CostReport analyze_arch(const ArchDesc& arch, const RankPolicy& policy, const Eligibility& eligibility);

/// `flop_scale` is 1 for MACs, 2 when mul and add are counted separately.
nlohmann::json to_json(const CostReport& report, std::uint64_t flop_scale = 1);

/// Per-layer table followed by a summary in the M-param / Δ / CR / G-FLOPs / Δ layout.
std::string format_table(const CostReport& report, std::uint64_t flop_scale = 1);

/// One column per downsampling factor, rows M-param, Δ, CR, G-FLOPs, Δ.
std::string format_sweep_table(std::span<const CostReport> reports, std::uint64_t flop_scale = 1);

LayerDesc layer_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LayerDesc& layer);

/// Accepts either an array of layer objects or {"model": ..., "layers": [...]}.
ArchDesc arch_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ArchDesc& arch);
ArchDesc load_arch(const std::filesystem::path& path);

}  // namespace tuckerforge
