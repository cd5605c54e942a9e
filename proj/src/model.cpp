// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "tuckerforge/model.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <nlohmann/json.hpp>
#include <optional>

#include "tuckerforge/conv.hpp"
#include "tuckerforge/errors.hpp"
#include "tuckerforge/rng.hpp"

namespace tuckerforge {

namespace {

nlohmann::json to_json(const DecompositionInfo& d) {
  return {{"t_o", d.ranks.out},  {"t_i", d.ranks.in},     {"df", d.df},
          {"min_rank", d.min_rank}, {"method", d.method}, {"explained_variance", d.explained_variance},
          {"pointwise", d.pointwise}};
}

DecompositionInfo decomposition_from_json(const nlohmann::json& j) {
  DecompositionInfo d;
  d.ranks = {j.at("t_o").get<std::size_t>(), j.at("t_i").get<std::size_t>()};
  d.df = j.value("df", 0.0);
  d.min_rank = j.value("min_rank", std::size_t{8});
  d.method = j.value("method", std::string("hosvd"));
  d.explained_variance = j.value("explained_variance", 0.0);
  d.pointwise = j.value("pointwise", false);
  return d;
}

struct LayerOutcome {
  std::optional<TuckerFactors> factors;
  CompressedLayer summary;
};

}  // namespace

const DecompositionInfo* ModelManifest::decomposition(std::string_view layer) const {
  const auto it = decompositions.find(layer);
  return it == decompositions.end() ? nullptr : &it->second;
}

ModelManifest parse_manifest(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("manifest is not valid JSON: ") + e.what());
  }
  ModelManifest m;
  m.arch = arch_from_json(j);
  try {
    for (const auto& layer : j.at("layers")) {
      if (layer.contains("tucker")) {
        DecompositionInfo d = decomposition_from_json(layer.at("tucker"));
        const std::string name = layer.at("name").get<std::string>();
        const LayerDesc* desc = m.arch.find(name);
        if (d.ranks.out < 1 || d.ranks.out > desc->out_channels || d.ranks.in < 1 ||
            d.ranks.in > desc->in_channels) {
          throw ValidationError("manifest ranks out of range for layer '" + name + "'");
        }
        m.decompositions.emplace(name, std::move(d));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

std::string dump_manifest(const ModelManifest& manifest) {
  nlohmann::json j = to_json(manifest.arch);
  for (auto& layer : j.at("layers")) {
    if (const auto* d = manifest.decomposition(layer.at("name").get<std::string>())) layer["tucker"] = to_json(*d);
  }
  return j.dump(2);
}

std::string weight_name(std::string_view layer) { return std::string(layer) + ".weight"; }
std::string bias_name(std::string_view layer) { return std::string(layer) + ".bias"; }

ConvKernel load_kernel(const Container& c, const LayerDesc& layer) {
  const DenseTensor* w = c.find(weight_name(layer.name));
  if (w == nullptr) throw ValidationError("container has no dense weight for layer '" + layer.name + "'");
  const Shape expected{layer.out_channels, layer.in_channels, layer.kernel[0], layer.kernel[1], layer.kernel[2]};
  if (w->dims() != expected) {
    throw ValidationError("weight of layer '" + layer.name + "' has shape " + shape_to_string(w->dims()) +
                          ", manifest says " + shape_to_string(expected));
  }
  DenseTensor t = *w;
  t.set_dtype(DType::f64);
  return ConvKernel(std::move(t), layer.kind);
}

Container synthesize_model(const ArchDesc& arch, std::uint64_t seed, DType dtype) {
  arch.validate();
  Xoshiro256 rng(seed);
  Container c;
  ModelManifest manifest{arch, {}};
  c.manifest = dump_manifest(manifest);
  for (const auto& layer : arch.layers) {
    // He-style scale keeps activations of stacked random layers bounded.
    const double scale = std::sqrt(2.0 / static_cast<double>(layer.in_channels * layer.kernel_volume()));
    DenseTensor w = random_tensor(
        {layer.out_channels, layer.in_channels, layer.kernel[0], layer.kernel[1], layer.kernel[2]}, rng);
    for (double& v : w.data()) {
      v *= scale;
      if (dtype == DType::f32) v = static_cast<double>(static_cast<float>(v));
    }
    w.set_dtype(dtype);
    c.add(weight_name(layer.name), std::move(w));
    if (layer.bias) {
      DenseTensor b = random_tensor({layer.out_channels}, rng);
      for (double& v : b.data()) {
        v *= 0.1;
        if (dtype == DType::f32) v = static_cast<double>(static_cast<float>(v));
      }
      b.set_dtype(dtype);
      c.add(bias_name(layer.name), std::move(b));
    }
  }
  return c;
}

Container compress_model(const Container& original, const CompressOptions& options,
                         std::vector<CompressedLayer>* summary) {
  options.policy.validate();
  ModelManifest manifest = parse_manifest(original.manifest);
  const auto& layers = manifest.arch.layers;

  auto compress_layer = [&](std::size_t index) {
    const LayerDesc& layer = layers[index];
    LayerOutcome outcome;
    if (manifest.decomposition(layer.name) != nullptr || !options.eligibility.eligible(layer)) return outcome;
    const ConvKernel kernel = load_kernel(original, layer);
    const TuckerRanks ranks = select_ranks(options.policy, layer.out_channels, layer.in_channels);
    TuckerFactors factors = hosvd_partial(kernel, ranks);
    if (options.hooi) factors = hooi_refine(kernel, factors, options.hooi_options);
    outcome.summary = {layer.name,
                       ranks,
                       explained_variance(kernel, factors),
                       params_direct(layer),
                       params_tucker(layer, ranks),
                       layer.is_pointwise()};
    outcome.factors = std::move(factors);
    return outcome;
  };

  std::vector<LayerOutcome> outcomes(layers.size());
  const std::size_t threads = std::max<std::size_t>(1, options.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < layers.size(); ++i) outcomes[i] = compress_layer(i);
  } else {
    for (std::size_t begin = 0; begin < layers.size(); begin += threads) {
      std::vector<std::future<LayerOutcome>> batch;
      for (std::size_t i = begin; i < std::min(layers.size(), begin + threads); ++i) {
        batch.push_back(std::async(std::launch::async, compress_layer, i));
      }
      for (std::size_t k = 0; k < batch.size(); ++k) outcomes[begin + k] = batch[k].get();
    }
  }

  Container out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerDesc& layer = layers[i];
    if (outcomes[i].factors) {
      const DType dtype = original.find(weight_name(layer.name))->dtype();
      store_factors(out, layer.name, *outcomes[i].factors, dtype);
      const CompressedLayer& s = outcomes[i].summary;
      manifest.decompositions.emplace(
          layer.name, DecompositionInfo{s.ranks, options.policy.df, options.policy.min_rank,
                                        options.hooi ? "hooi" : "hosvd", s.explained_variance, s.pointwise});
      if (summary != nullptr) summary->push_back(s);
    } else if (manifest.decomposition(layer.name) != nullptr) {
      for (const char* part : {"u_in", "core", "u_out"}) {
        const std::string name = factor_tensor_name(layer.name, part);
        const DenseTensor* t = original.find(name);
        if (t == nullptr) throw ValidationError("container is missing tensor '" + name + "'");
        out.add(name, *t);
      }
    } else {
      const DenseTensor* w = original.find(weight_name(layer.name));
      if (w == nullptr) throw ValidationError("container has no dense weight for layer '" + layer.name + "'");
      out.add(weight_name(layer.name), *w);
    }
    if (layer.bias) {
      const DenseTensor* b = original.find(bias_name(layer.name));
      if (b == nullptr) throw ValidationError("layer '" + layer.name + "' declares a bias that is not stored");
      out.add(bias_name(layer.name), *b);
    }
  }
  out.manifest = dump_manifest(manifest);
  return out;
}

double max_relative_error(const FeatureMap& a, const FeatureMap& b) {
  if (a.tensor().dims() != b.tensor().dims()) throw ValidationError("compared feature maps differ in shape");
  double diff = 0.0;
  double scale = 0.0;
  const auto x = a.tensor().data();
  const auto y = b.tensor().data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    diff = std::max(diff, std::abs(x[i] - y[i]));
    scale = std::max(scale, std::abs(y[i]));
  }
  if (scale == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / scale;
}

VerifyReport verify_model(const Container& original, const Container& compressed, const VerifyOptions& options) {
  const ModelManifest reference = parse_manifest(original.manifest);
  const ModelManifest manifest = parse_manifest(compressed.manifest);
  Xoshiro256 rng(options.seed);
  const ExecOptions exec{options.threads, nullptr};
  VerifyReport report;
  for (const auto& layer : manifest.arch.layers) {
    if (manifest.decomposition(layer.name) == nullptr) continue;
    if (layer.kind == LayerKind::convtranspose3d) {
      report.skipped.push_back(layer.name);
      continue;
    }
    const LayerDesc* ref_layer = reference.arch.find(layer.name);
    if (ref_layer == nullptr) throw ValidationError("layer '" + layer.name + "' is not in the original model");
    const ConvKernel kernel = load_kernel(original, *ref_layer);
    const TuckerFactors factors = load_factors(compressed, layer.name);
    if (factors.out_channels() != kernel.out_channels() || factors.in_channels() != kernel.in_channels() ||
        Triple{factors.core.dim(2), factors.core.dim(3), factors.core.dim(4)} != kernel.spatial()) {
      throw ValidationError("factors of layer '" + layer.name + "' do not match the original kernel");
    }

    Triple dims = layer.input_dims;
    if (options.max_extent > 0) {
      for (std::size_t a = 0; a < 3; ++a) {
        const std::size_t floor = layer.kernel[a] > 2 * layer.spec.padding[a]
                                      ? layer.kernel[a] - 2 * layer.spec.padding[a]
                                      : std::size_t{1};
        dims[a] = std::min(dims[a], std::max(options.max_extent, floor));
      }
    }
    const FeatureMap x(random_tensor({layer.in_channels, dims[0], dims[1], dims[2]}, rng));
    const FeatureMap tucker = conv3d_tucker(x, factors, layer.spec, exec);
    const FeatureMap direct_reconstructed = conv3d_direct(x, reconstruct(factors), layer.spec, exec);
    const FeatureMap direct_original = conv3d_direct(x, kernel, layer.spec, exec);

    VerifyLayer v{layer.name, dims, max_relative_error(tucker, direct_reconstructed),
                  max_relative_error(tucker, direct_original)};
    report.max_identity_error = std::max(report.max_identity_error, v.identity_error);
    report.max_approximation_error = std::max(report.max_approximation_error, v.approximation_error);
    if (!(v.identity_error <= options.tolerance)) report.passed = false;
    report.layers.push_back(std::move(v));
  }
  return report;
}

}  // namespace tuckerforge
