// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "tuckerforge/prune.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tuckerforge/errors.hpp"

namespace tuckerforge {

void PruneSpec::validate() const {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ValidationError("prune fraction must lie in [0, 1]");
}

std::vector<double> channel_l2_norms(const ConvKernel& kernel) {
  const std::size_t channels = kernel.out_channels();
  const std::size_t slice = kernel.tensor().size() / channels;
  const auto w = kernel.tensor().data();
  std::vector<double> norms(channels);
  for (std::size_t o = 0; o < channels; ++o) {
    double acc = 0.0;
    for (std::size_t e = 0; e < slice; ++e) acc += w[o * slice + e] * w[o * slice + e];
    norms[o] = std::sqrt(acc);
  }
  return norms;
}

std::size_t pruned_channel_count(const PruneSpec& spec, std::size_t out_channels) {
  spec.validate();
  const auto n = static_cast<std::size_t>(std::round(spec.fraction * static_cast<double>(out_channels)));
  return std::min(n, out_channels);
}

std::vector<std::size_t> channels_to_prune(const ConvKernel& kernel, const PruneSpec& spec) {
  const std::size_t count = pruned_channel_count(spec, kernel.out_channels());
  const std::vector<double> norms = channel_l2_norms(kernel);
  std::vector<std::size_t> order(norms.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norms[a] < norms[b]; });
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

ConvKernel prune_channels(const ConvKernel& kernel, const PruneSpec& spec) {
  ConvKernel out = kernel;
  const std::size_t slice = kernel.tensor().size() / kernel.out_channels();
  auto w = out.tensor().data();
  for (std::size_t o : channels_to_prune(kernel, spec)) {
    std::fill_n(w.begin() + static_cast<std::ptrdiff_t>(o * slice), slice, 0.0);
  }
  return out;
}

double zero_fraction(const ConvKernel& kernel) {
  const auto w = kernel.tensor().data();
  const auto zeros = std::count(w.begin(), w.end(), 0.0);
  return static_cast<double>(zeros) / static_cast<double>(w.size());
}

}  // namespace tuckerforge
