// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tuckerforge/conv.hpp"

namespace tuckerforge {

struct BenchOptions {
  std::size_t runs = 10;
  std::size_t warmup = 3;
};

struct BenchResult {
  std::string label;
  double df = std::numeric_limits<double>::quiet_NaN();  ///< NaN for the uncompressed baseline
  std::size_t runs = 0;
  double mean_ms = 0.0;
  double std_ms = 0.0;  ///< sample standard deviation; 0 for a single run
  double speedup = 1.0;
};

/// Runs `forward` `warmup` times untimed, then `runs` times on a monotonic
/// clock. `prepare`, if given, runs before every pass outside the timed region.
BenchResult time_forward(std::string label, const std::function<void()>& forward, const BenchOptions& options,
                         const std::function<void()>& prepare = {});

/// baseline.mean_ms / candidate.mean_ms.
double speedup(const BenchResult& baseline, const BenchResult& candidate);

/// Columns: label, df, runs, mean_ms, std_ms, speedup.
std::string bench_csv(std::span<const BenchResult> results);

/// A single C → C layer with a random kernel, timed directly and factorized
/// at each downsampling factor.
struct LayerBenchConfig {
  std::size_t channels = 256;
  std::size_t spatial = 32;
  std::size_t kernel = 3;
  ConvSpec spec{{1, 1, 1}, {1, 1, 1}};
  std::vector<double> dfs{0.1};
  std::size_t min_rank = 8;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  BenchOptions options;
};

/// First entry is the direct baseline; the rest follow `dfs` with speedups
/// relative to it. Weights are packed and buffers allocated before timing.
std::vector<BenchResult> bench_layer(const LayerBenchConfig& config);

}  // namespace tuckerforge
