// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace tuckerforge {

/// Storage width used when a tensor is serialized. Arithmetic is always double.
enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

std::string to_string(DType dtype);

using Shape = std::vector<std::size_t>;

/// Product of the extents; throws ValidationError on overflow.
std::size_t shape_volume(std::span<const std::size_t> dims);

std::string shape_to_string(std::span<const std::size_t> dims);

/// Dense n-dimensional array of doubles in row-major order (last index fastest).
///
/// Every extent is at least one and the payload length always equals the
/// product of the extents; both are checked on construction.
class DenseTensor {
 public:
  /// A single zero, shape {1}.
  DenseTensor();

  /// Zero-filled tensor of the given shape.
  explicit DenseTensor(Shape dims, DType dtype = DType::f64);

  DenseTensor(Shape dims, std::vector<double> data, DType dtype = DType::f64);

  const Shape& dims() const noexcept { return dims_; }
  std::size_t dim(std::size_t axis) const;
  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return data_.size(); }

  DType dtype() const noexcept { return dtype_; }
  void set_dtype(DType dtype) noexcept { dtype_ = dtype; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  double operator[](std::size_t flat) const { return data_[flat]; }
  double& operator[](std::size_t flat) { return data_[flat]; }

  /// Flat offset of a multi-index; throws on rank mismatch or out-of-range index.
  std::size_t offset(std::span<const std::size_t> index) const;

  double at(std::initializer_list<std::size_t> index) const;
  double& at(std::initializer_list<std::size_t> index);

  /// Row-major strides, in elements.
  std::vector<std::size_t> strides() const;

  /// Same payload viewed under another shape of equal volume.
  DenseTensor reshaped(Shape dims) const;

  bool all_finite() const noexcept;

  /// Shape, dtype and payload equality (payload compared with ==).
  friend bool operator==(const DenseTensor& a, const DenseTensor& b);

 private:
  Shape dims_;
  std::vector<double> data_;
  DType dtype_ = DType::f64;
};

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() : Matrix(1, 1) {}
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Matrix transposed() const;

  /// First `n` columns.
  Matrix leading_columns(std::size_t n) const;

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix& a, const Matrix& b) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);

}  // namespace tuckerforge
