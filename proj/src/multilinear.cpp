// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "tuckerforge/multilinear.hpp"

#include <string>
#include <vector>

#include "tuckerforge/errors.hpp"

namespace tuckerforge {

namespace {

// Column stride of each tensor axis inside the mode-n unfolding (0 for axis n).
std::vector<std::size_t> unfolding_column_strides(std::span<const std::size_t> dims, std::size_t n) {
  const std::size_t rank = dims.size();
  std::vector<std::size_t> stride(rank, 0);
  std::size_t s = 1;
  for (std::size_t k = 1; k < rank; ++k) {
    const std::size_t axis = (n + k) % rank;
    stride[axis] = s;
    s *= dims[axis];
  }
  return stride;
}

void check_axis(std::size_t rank, std::size_t n) {
  if (n >= rank) {
    throw ValidationError("mode " + std::to_string(n) + " out of range for a rank-" + std::to_string(rank) +
                          " tensor");
  }
}

// Visits every element in row-major order, passing its flat offset and its
// (row, column) position in the mode-n unfolding.
template <typename Fn>
void for_each_unfolded(std::span<const std::size_t> dims, std::size_t n, Fn&& fn) {
  const auto col_stride = unfolding_column_strides(dims, n);
  const std::size_t rank = dims.size();
  std::vector<std::size_t> index(rank, 0);
  const std::size_t total = shape_volume(dims);
  std::size_t col = 0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    fn(flat, index[n], col);
    for (std::size_t a = rank; a-- > 0;) {
      ++index[a];
      col += col_stride[a];
      if (index[a] < dims[a]) break;
      col -= col_stride[a] * dims[a];
      index[a] = 0;
    }
  }
}

}  // namespace

Matrix mode_n_unfold(const DenseTensor& t, std::size_t n) {
  check_axis(t.rank(), n);
  const std::size_t rows = t.dim(n);
  const std::size_t cols = t.size() / rows;
  Matrix m(rows, cols);
  const auto src = t.data();
  for_each_unfolded(t.dims(), n, [&](std::size_t flat, std::size_t r, std::size_t c) { m(r, c) = src[flat]; });
  return m;
}

DenseTensor mode_n_fold(const Matrix& m, std::size_t n, std::span<const std::size_t> dims) {
  check_axis(dims.size(), n);
  Shape shape(dims.begin(), dims.end());
  DenseTensor t(shape);
  if (m.rows() != dims[n] || m.rows() * m.cols() != t.size()) {
    throw ValidationError("mode_n_fold: matrix shape does not match target " + shape_to_string(dims));
  }
  auto dst = t.data();
  for_each_unfolded(dims, n, [&](std::size_t flat, std::size_t r, std::size_t c) { dst[flat] = m(r, c); });
  return t;
}

DenseTensor mode_n_product(const DenseTensor& t, const Matrix& u, std::size_t n) {
  check_axis(t.rank(), n);
  if (u.cols() != t.dim(n)) {
    throw ValidationError("mode_n_product: factor has " + std::to_string(u.cols()) + " columns but mode " +
                          std::to_string(n) + " has extent " + std::to_string(t.dim(n)));
  }
  std::size_t outer = 1;
  for (std::size_t a = 0; a < n; ++a) outer *= t.dim(a);
  std::size_t inner = 1;
  for (std::size_t a = n + 1; a < t.rank(); ++a) inner *= t.dim(a);
  const std::size_t in_extent = t.dim(n);
  const std::size_t out_extent = u.rows();

  Shape out_dims = t.dims();
  out_dims[n] = out_extent;
  DenseTensor out(out_dims, t.dtype());
  const auto src = t.data();
  auto dst = out.data();
  for (std::size_t o = 0; o < outer; ++o) {
    const double* src_block = src.data() + o * in_extent * inner;
    double* dst_block = dst.data() + o * out_extent * inner;
    for (std::size_t r = 0; r < out_extent; ++r) {
      double* dst_row = dst_block + r * inner;
      for (std::size_t i = 0; i < in_extent; ++i) {
        const double w = u(r, i);
        const double* src_row = src_block + i * inner;
        for (std::size_t k = 0; k < inner; ++k) dst_row[k] += w * src_row[k];
      }
    }
  }
  return out;
}

double frobenius_norm_sq(const DenseTensor& t) noexcept {
  double acc = 0.0;
  for (double v : t.data()) acc += v * v;
  return acc;
}

double frobenius_norm_sq(const Matrix& m) noexcept {
  double acc = 0.0;
  for (double v : m.data()) acc += v * v;
  return acc;
}

}  // namespace tuckerforge
