// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "tuckerforge/kernel.hpp"

namespace tuckerforge {

/// Fraction of output channels (filters) to zero, in [0, 1].
struct PruneSpec {
  double fraction = 0.0;

  void validate() const;
};

/// L2 norm of each output channel's (I, K_H, K_W, K_D) slice.
std::vector<double> channel_l2_norms(const ConvKernel& kernel);

/// round_half_away(fraction · O).
std::size_t pruned_channel_count(const PruneSpec& spec, std::size_t out_channels);

/// Indices of the channels prune_channels zeroes: the smallest norms, ties
/// broken by the lower index. Returned in ascending index order.
std::vector<std::size_t> channels_to_prune(const ConvKernel& kernel, const PruneSpec& spec);

/// Zeroes the selected output channels; every other entry is left bit-identical.
ConvKernel prune_channels(const ConvKernel& kernel, const PruneSpec& spec);

/// Fraction of exactly-zero entries.
double zero_fraction(const ConvKernel& kernel);

}  // namespace tuckerforge
