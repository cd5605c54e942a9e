// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "tuckerforge/tensor.hpp"

namespace tuckerforge {

/// xoshiro256** seeded through splitmix64.
///
/// Fully specified so ports in other languages reproduce the same streams:
/// the four state words are successive splitmix64 outputs starting from the
/// seed, and uniform() maps the top 53 bits of next() to [0, 1).
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next() noexcept;

  /// Uniform in [0, 1).
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [-1, 1).
  double symmetric() noexcept { return 2.0 * uniform() - 1.0; }

 private:
  std::uint64_t s_[4];
};

/// Tensor filled with symmetric() draws in row-major order.
DenseTensor random_tensor(Shape dims, Xoshiro256& rng);

}  // namespace tuckerforge
