// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

#include "tuckerforge/tensor.hpp"

namespace tuckerforge {

/// Mode-n unfolding: a (dims[n] × product of the other extents) matrix.
///
/// Columns follow the cyclic convention: the remaining axes are taken in the
/// order n+1, ..., N-1, 0, ..., n-1 and axis n+1 varies fastest. Factor
/// matrices are serialized, so this order is part of the on-disk contract.
Matrix mode_n_unfold(const DenseTensor& t, std::size_t n);

/// Inverse of mode_n_unfold for a tensor of shape `dims`.
DenseTensor mode_n_fold(const Matrix& m, std::size_t n, std::span<const std::size_t> dims);

/// Mode-n product t ×ₙ u: result[..., r, ...] = Σ_i u(r, i) · t[..., i, ...].
/// Requires u.cols() == t.dim(n).
DenseTensor mode_n_product(const DenseTensor& t, const Matrix& u, std::size_t n);

double frobenius_norm_sq(const DenseTensor& t) noexcept;
double frobenius_norm_sq(const Matrix& m) noexcept;

}  // namespace tuckerforge
