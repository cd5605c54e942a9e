// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "tuckerforge/tensor.hpp"

namespace tuckerforge {

/// Orthonormal eigenbasis of M·Mᵀ, columns sorted by decreasing eigenvalue.
///
/// Column j spans the j-th left singular direction of M. When rows > cols the
/// trailing columns complete the null space. Each column is signed so that
/// its largest-magnitude entry is positive (first such entry on ties), which
/// makes every decomposition built on top reproducible byte for byte.
struct LeftSingularBasis {
  Matrix vectors;                     ///< rows × rows
  std::vector<double> squared_values; ///< eigenvalues of M·Mᵀ, descending, clamped at 0
};

LeftSingularBasis left_singular_basis(const Matrix& m);

/// r leading left singular vectors of m, 1 ≤ r ≤ min(rows, cols).
Matrix leading_left_singular_vectors(const Matrix& m, std::size_t r);

/// Like leading_left_singular_vectors but allows r up to rows.
Matrix leading_left_basis(const Matrix& m, std::size_t r);

}  // namespace tuckerforge
