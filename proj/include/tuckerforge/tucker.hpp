// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tuckerforge/kernel.hpp"
#include "tuckerforge/tensor.hpp"

namespace tuckerforge {

/// Partial Tucker factors of a kernel along its two channel modes:
/// K ≈ core ×₀ u_out ×₁ u_in with core of shape (T_O, T_I, K_H, K_W, K_D).
struct TuckerFactors {
  DenseTensor core;
  Matrix u_out;  ///< O × T_O, orthonormal columns
  Matrix u_in;   ///< I × T_I, orthonormal columns

  std::size_t rank_out() const noexcept { return u_out.cols(); }
  std::size_t rank_in() const noexcept { return u_in.cols(); }
  std::size_t out_channels() const noexcept { return u_out.rows(); }
  std::size_t in_channels() const noexcept { return u_in.rows(); }

  /// Checks shape consistency between the three parts. With `orthonormal_tol`
  /// > 0 also checks UᵀU ≈ I for both factors.
  void validate(double orthonormal_tol = 0.0) const;

  friend bool operator==(const TuckerFactors& a, const TuckerFactors& b) = default;
};

struct TuckerRanks {
  std::size_t out;
  std::size_t in;

  friend bool operator==(const TuckerRanks&, const TuckerRanks&) = default;
};

/// Rank selection from a downsampling factor (DF) with a floor on the rank.
struct RankPolicy {
  double df = 0.5;
  std::size_t min_rank = 8;

  void validate() const;
};

/// clamp(round_half_away(df · channels), min(min_rank, channels), channels).
std::size_t select_rank(const RankPolicy& policy, std::size_t channels);
TuckerRanks select_ranks(const RankPolicy& policy, std::size_t out_channels, std::size_t in_channels);

/// Projects `kernel` onto the given channel bases: core = K ×₀ u_outᵀ ×₁ u_inᵀ.
TuckerFactors project(const ConvKernel& kernel, Matrix u_out, Matrix u_in);

/// Single-pass partial HOSVD: each factor is the leading left singular basis
/// of the matching unfolding. Deterministic for a fixed input.
TuckerFactors hosvd_partial(const ConvKernel& kernel, TuckerRanks ranks);

struct HooiOptions {
  std::size_t max_iters = 20;
  double tol = 1e-6;  ///< stop once one sweep improves EV by less than this
};

/// Higher-order orthogonal iteration starting from `initial`. Never returns
/// factors with a lower explained variance than `initial`.
TuckerFactors hooi_refine(const ConvKernel& kernel, const TuckerFactors& initial, const HooiOptions& options = {});

/// K̂ = core ×₀ u_out ×₁ u_in.
ConvKernel reconstruct(const TuckerFactors& factors, LayerKind kind = LayerKind::conv3d);

/// 1 − ‖K − K̂‖² / ‖K‖². Throws for a zero-norm kernel.
double explained_variance(const ConvKernel& kernel, const TuckerFactors& factors);

/// HOSVD explained variance for every (t_o, t_i) pair; rows follow
/// `out_ranks`, columns follow `in_ranks`. Both lists must be strictly
/// increasing and within the channel counts. Cells are independent; with
/// threads > 1 they are evaluated concurrently with identical results.
Matrix ev_grid(const ConvKernel& kernel, std::span<const std::size_t> out_ranks,
               std::span<const std::size_t> in_ranks, std::size_t threads = 1);

/// CSV with a header row of t_i values and a leading column of t_o values;
/// cells printed with 12 significant digits.
std::string ev_grid_csv(const Matrix& grid, std::span<const std::size_t> out_ranks,
                        std::span<const std::size_t> in_ranks);

}  // namespace tuckerforge
