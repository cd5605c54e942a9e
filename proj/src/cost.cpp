// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "tuckerforge/cost.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "tuckerforge/errors.hpp"

namespace tuckerforge {

namespace {

std::uint64_t volume(const Triple& t) { return std::uint64_t{t[0]} * t[1] * t[2]; }

void check_ranks(const LayerDesc& layer, TuckerRanks ranks) {
  if (ranks.out < 1 || ranks.out > layer.out_channels || ranks.in < 1 || ranks.in > layer.in_channels) {
    throw ValidationError("Tucker ranks out of range for layer '" + layer.name + "'");
  }
}

Triple triple_from_json(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 3) throw ValidationError(std::string("'") + key + "' must be an array of 3");
  Triple t{};
  for (std::size_t a = 0; a < 3; ++a) {
    if (!v[a].is_number_integer() || v[a].get<long long>() < 0) {
      throw ValidationError(std::string("'") + key + "' entries must be non-negative integers");
    }
    t[a] = v[a].get<std::size_t>();
  }
  return t;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * fraction);
  return buf;
}

std::string fixed(double value, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

}  // namespace

Triple LayerDesc::output_dims() const {
  if (kind != LayerKind::convtranspose3d) return tuckerforge::output_dims(input_dims, kernel, spec);
  spec.validate();
  Triple out{};
  for (std::size_t a = 0; a < 3; ++a) {
    const long long extent = static_cast<long long>(input_dims[a] - 1) * static_cast<long long>(spec.stride[a]) -
                             2 * static_cast<long long>(spec.padding[a]) + static_cast<long long>(kernel[a]);
    if (extent < 1) throw ValidationError("transposed convolution '" + name + "' has a non-positive output extent");
    out[a] = static_cast<std::size_t>(extent);
  }
  return out;
}

void LayerDesc::validate() const {
  if (name.empty()) throw ValidationError("layer name must not be empty");
  if (in_channels < 1 || out_channels < 1) throw ValidationError("layer '" + name + "' needs positive channel counts");
  for (std::size_t a = 0; a < 3; ++a) {
    if (kernel[a] < 1) throw ValidationError("layer '" + name + "' needs positive kernel extents");
    if (input_dims[a] < 1) throw ValidationError("layer '" + name + "' needs positive input extents");
  }
  if (kind == LayerKind::pointwise && !is_pointwise()) {
    throw ValidationError("pointwise layer '" + name + "' must have a 1x1x1 kernel");
  }
  (void)output_dims();
}

void ArchDesc::validate() const {
  std::set<std::string> seen;
  for (const auto& layer : layers) {
    layer.validate();
    if (!seen.insert(layer.name).second) throw ValidationError("duplicate layer name '" + layer.name + "'");
  }
}

const LayerDesc* ArchDesc::find(std::string_view name) const {
  for (const auto& layer : layers) {
    if (layer.name == name) return &layer;
  }
  return nullptr;
}

bool Eligibility::eligible(const LayerDesc& layer) const noexcept {
  switch (layer.kind) {
    case LayerKind::convtranspose3d:
      return include_transposed;
    case LayerKind::pointwise:
      return include_pointwise;
    case LayerKind::conv3d:
      return !layer.is_pointwise() || include_pointwise;
  }
  return false;
}

std::uint64_t params_direct(const LayerDesc& layer) {
  return std::uint64_t{layer.out_channels} * layer.in_channels * layer.kernel_volume();
}

std::uint64_t params_tucker(const LayerDesc& layer, TuckerRanks ranks) {
  check_ranks(layer, ranks);
  return std::uint64_t{ranks.in} * layer.in_channels + std::uint64_t{ranks.out} * ranks.in * layer.kernel_volume() +
         std::uint64_t{layer.out_channels} * ranks.out;
}

std::uint64_t flops_direct(const LayerDesc& layer) {
  const std::uint64_t voxels =
      layer.kind == LayerKind::convtranspose3d ? volume(layer.input_dims) : volume(layer.output_dims());
  return params_direct(layer) * voxels;
}

std::uint64_t flops_tucker(const LayerDesc& layer, TuckerRanks ranks) {
  check_ranks(layer, ranks);
  const std::uint64_t in_voxels = volume(layer.input_dims);
  const std::uint64_t out_voxels = volume(layer.output_dims());
  const std::uint64_t core_voxels = layer.kind == LayerKind::convtranspose3d ? in_voxels : out_voxels;
  return std::uint64_t{ranks.in} * layer.in_channels * in_voxels +
         std::uint64_t{ranks.out} * ranks.in * layer.kernel_volume() * core_voxels +
         std::uint64_t{layer.out_channels} * ranks.out * out_voxels;
}

double compression_ratio(std::uint64_t original_params, std::uint64_t compressed_params) {
  if (compressed_params == 0) throw ValidationError("compression ratio undefined for a zero-size compressed model");
  return static_cast<double>(original_params) / static_cast<double>(compressed_params);
}

double CostReport::param_reduction() const noexcept {
  return params_original == 0 ? 0.0
                              : 1.0 - static_cast<double>(params_tucker) / static_cast<double>(params_original);
}

double CostReport::flop_reduction() const noexcept {
  return flops_original == 0 ? 0.0 : 1.0 - static_cast<double>(flops_tucker) / static_cast<double>(flops_original);
}

double CostReport::compression_ratio() const { return tuckerforge::compression_ratio(params_original, params_tucker); }

CostReport analyze_arch(const ArchDesc& arch, const RankPolicy& policy, const Eligibility& eligibility) {
  arch.validate();
  policy.validate();
  CostReport report;
  report.model = arch.model;
  report.policy = policy;
  for (const auto& layer : arch.layers) {
    LayerCost cost;
    cost.name = layer.name;
    cost.kind = layer.kind;
    cost.out_channels = layer.out_channels;
    cost.in_channels = layer.in_channels;
    cost.kernel = layer.kernel;
    cost.pointwise = layer.is_pointwise();
    cost.approximate = layer.kind == LayerKind::convtranspose3d;
    cost.params_original = params_direct(layer);
    cost.flops_original = flops_direct(layer);
    cost.bias_params = layer.bias ? layer.out_channels : 0;
    if (eligibility.eligible(layer)) {
      const TuckerRanks ranks = select_ranks(policy, layer.out_channels, layer.in_channels);
      cost.decomposed = true;
      cost.ranks = ranks;
      cost.params_tucker = params_tucker(layer, ranks);
      cost.flops_tucker = flops_tucker(layer, ranks);
    } else {
      cost.params_tucker = cost.params_original;
      cost.flops_tucker = cost.flops_original;
    }
    report.params_original += cost.params_original;
    report.params_tucker += cost.params_tucker;
    report.flops_original += cost.flops_original;
    report.flops_tucker += cost.flops_tucker;
    report.bias_params += cost.bias_params;
    report.layers.push_back(std::move(cost));
  }
  return report;
}

nlohmann::json to_json(const CostReport& report, std::uint64_t flop_scale) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : report.layers) {
    nlohmann::json j{{"name", l.name},
                     {"kind", std::string(to_string(l.kind))},
                     {"decomposed", l.decomposed},
                     {"params_original", l.params_original},
                     {"params_tucker", l.params_tucker},
                     {"flops_original", l.flops_original * flop_scale},
                     {"flops_tucker", l.flops_tucker * flop_scale},
                     {"bias_params", l.bias_params},
                     {"approximate_flops", l.approximate},
                     {"pointwise", l.pointwise}};
    if (l.ranks) {
      j["t_o"] = l.ranks->out;
      j["t_i"] = l.ranks->in;
    }
    layers.push_back(std::move(j));
  }
  return {{"model", report.model},
          {"df", report.policy.df},
          {"min_rank", report.policy.min_rank},
          {"flop_unit", flop_scale == 1 ? "mac" : "flop"},
          {"layers", std::move(layers)},
          {"total",
           {{"params_original", report.params_original},
            {"params_tucker", report.params_tucker},
            {"param_reduction", report.param_reduction()},
            {"compression_ratio", report.compression_ratio()},
            {"flops_original", report.flops_original * flop_scale},
            {"flops_tucker", report.flops_tucker * flop_scale},
            {"flop_reduction", report.flop_reduction()},
            {"bias_params", report.bias_params}}}};
}

std::string format_table(const CostReport& report, std::uint64_t flop_scale) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %-15s %5s %5s %7s %5s %5s %12s %12s %8s %10s %10s %8s %s\n", "layer", "kind",
                "O", "I", "kernel", "T_O", "T_I", "params", "params_tk", "dparams", "GFLOPs", "GFLOPs_tk", "dflops",
                "flags");
  os << line;
  for (const auto& l : report.layers) {
    const double dp = l.params_original ? 1.0 - double(l.params_tucker) / double(l.params_original) : 0.0;
    const double df = l.flops_original ? 1.0 - double(l.flops_tucker) / double(l.flops_original) : 0.0;
    std::string flags;
    if (l.approximate) flags += "approx-flops ";
    if (l.pointwise && l.decomposed) flags += "pointwise ";
    const std::string kernel =
        std::to_string(l.kernel[0]) + "x" + std::to_string(l.kernel[1]) + "x" + std::to_string(l.kernel[2]);
    std::snprintf(line, sizeof line, "%-20s %-15s %5zu %5zu %7s %5s %5s %12llu %12llu %8s %10.3f %10.3f %8s %s\n",
                  l.name.c_str(), std::string(to_string(l.kind)).c_str(), l.out_channels, l.in_channels,
                  kernel.c_str(),
                  l.ranks ? std::to_string(l.ranks->out).c_str() : "-",
                  l.ranks ? std::to_string(l.ranks->in).c_str() : "-",
                  static_cast<unsigned long long>(l.params_original), static_cast<unsigned long long>(l.params_tucker),
                  percent(dp).c_str(), double(l.flops_original * flop_scale) / 1e9,
                  double(l.flops_tucker * flop_scale) / 1e9, percent(df).c_str(), flags.c_str());
    os << line;
  }
  os << '\n';
  const CostReport single[] = {report};
  os << format_sweep_table(single, flop_scale);
  if (report.bias_params > 0) os << "bias parameters (not factorized): " << report.bias_params << '\n';
  return os.str();
}

std::string format_sweep_table(std::span<const CostReport> reports, std::uint64_t flop_scale) {
  if (reports.empty()) return {};
  std::ostringstream os;
  char cell[64];
  auto row = [&](const char* label, auto&& original, auto&& per_report) {
    std::snprintf(cell, sizeof cell, "%-10s %10s", label, original.c_str());
    os << cell;
    for (const auto& r : reports) {
      std::snprintf(cell, sizeof cell, " %10s", per_report(r).c_str());
      os << cell;
    }
    os << '\n';
  };
  const CostReport& first = reports.front();
  row("", std::string("original"), [](const CostReport& r) { return "DF " + fixed(r.policy.df, 2); });
  row("M-param.", fixed(double(first.params_original) / 1e6, 2),
      [](const CostReport& r) { return fixed(double(r.params_tucker) / 1e6, 2); });
  row("delta", std::string("-"), [](const CostReport& r) { return percent(r.param_reduction()); });
  row("CR", std::string("-"), [](const CostReport& r) { return fixed(r.compression_ratio(), 1); });
  row("G-FLOPs", fixed(double(first.flops_original * flop_scale) / 1e9, 2),
      [&](const CostReport& r) { return fixed(double(r.flops_tucker * flop_scale) / 1e9, 2); });
  row("delta", std::string("-"), [](const CostReport& r) { return percent(r.flop_reduction()); });
  return os.str();
}

LayerDesc layer_from_json(const nlohmann::json& j) {
  try {
    LayerDesc l;
    l.name = j.at("name").get<std::string>();
    l.kind = parse_layer_kind(j.at("kind").get<std::string>());
    l.in_channels = j.at("in_channels").get<std::size_t>();
    l.out_channels = j.at("out_channels").get<std::size_t>();
    l.kernel = triple_from_json(j, "kernel");
    l.spec.stride = triple_from_json(j, "stride");
    l.spec.padding = triple_from_json(j, "padding");
    l.input_dims = triple_from_json(j, "input_dims");
    if (j.contains("bias")) l.bias = j.at("bias").get<bool>();
    if (j.contains("padding_mode") && j.at("padding_mode").get<std::string>() != "zeros") {
      throw ValidationError("layer '" + l.name + "': only zero padding is supported, got '" +
                            j.at("padding_mode").get<std::string>() + "'");
    }
    l.validate();
    return l;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed layer description: ") + e.what());
  }
}

nlohmann::json to_json(const LayerDesc& l) {
  nlohmann::json j{{"name", l.name},
                   {"kind", std::string(to_string(l.kind))},
                   {"in_channels", l.in_channels},
                   {"out_channels", l.out_channels},
                   {"kernel", l.kernel},
                   {"stride", l.spec.stride},
                   {"padding", l.spec.padding},
                   {"input_dims", l.input_dims}};
  if (l.bias) j["bias"] = true;
  return j;
}

ArchDesc arch_from_json(const nlohmann::json& j) {
  ArchDesc arch;
  const nlohmann::json* layers = &j;
  if (j.is_object()) {
    if (j.contains("model")) arch.model = j.at("model").get<std::string>();
    if (!j.contains("layers")) throw ValidationError("architecture object has no 'layers' array");
    layers = &j.at("layers");
  }
  if (!layers->is_array()) throw ValidationError("architecture layers must be a JSON array");
  for (const auto& entry : *layers) arch.layers.push_back(layer_from_json(entry));
  arch.validate();
  return arch;
}

nlohmann::json to_json(const ArchDesc& arch) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : arch.layers) layers.push_back(to_json(l));
  return {{"model", arch.model}, {"layers", std::move(layers)}};
}

ArchDesc load_arch(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open architecture file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("architecture file " + path.string() + " is not valid JSON: " + e.what());
  }
  ArchDesc arch = arch_from_json(j);
  if (arch.model.empty()) arch.model = path.stem().string();
  return arch;
}

}  // namespace tuckerforge
