// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "tuckerforge/svd.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "tuckerforge/errors.hpp"

namespace tuckerforge {

LeftSingularBasis left_singular_basis(const Matrix& m) {
  if (!m.all_finite()) throw ValidationError("singular vectors requested for a matrix with non-finite entries");
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> mat(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                                       static_cast<Eigen::Index>(m.cols()));
  const Eigen::MatrixXd gram = mat * mat.transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) throw Error("symmetric eigensolver did not converge");

  const std::size_t n = m.rows();
  LeftSingularBasis out{Matrix(n, n), std::vector<double>(n)};
  // Eigen returns eigenvalues in increasing order.
  for (std::size_t c = 0; c < n; ++c) {
    const auto src = static_cast<Eigen::Index>(n - 1 - c);
    out.squared_values[c] = std::max(0.0, solver.eigenvalues()(src));
    std::size_t pivot = 0;
    for (std::size_t r = 1; r < n; ++r) {
      if (std::abs(solver.eigenvectors()(static_cast<Eigen::Index>(r), src)) >
          std::abs(solver.eigenvectors()(static_cast<Eigen::Index>(pivot), src))) {
        pivot = r;
      }
    }
    const double sign = solver.eigenvectors()(static_cast<Eigen::Index>(pivot), src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      out.vectors(r, c) = sign * solver.eigenvectors()(static_cast<Eigen::Index>(r), src);
    }
  }
  return out;
}

Matrix leading_left_basis(const Matrix& m, std::size_t r) {
  if (r < 1 || r > m.rows()) {
    throw ValidationError("rank " + std::to_string(r) + " out of range [1, " + std::to_string(m.rows()) + "]");
  }
  return left_singular_basis(m).vectors.leading_columns(r);
}

Matrix leading_left_singular_vectors(const Matrix& m, std::size_t r) {
  const std::size_t limit = std::min(m.rows(), m.cols());
  if (r < 1 || r > limit) {
    throw ValidationError("rank " + std::to_string(r) + " out of range [1, " + std::to_string(limit) + "]");
  }
  return leading_left_basis(m, r);
}

}  // namespace tuckerforge
