// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "tuckerforge/tensor.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "tuckerforge/errors.hpp"

namespace tuckerforge {

std::string to_string(DType dtype) { return dtype == DType::f32 ? "f32" : "f64"; }

std::size_t shape_volume(std::span<const std::size_t> dims) {
  std::size_t volume = 1;
  for (std::size_t d : dims) {
    if (d != 0 && volume > std::numeric_limits<std::size_t>::max() / d) {
      throw ValidationError("tensor volume overflows size_t for shape " + shape_to_string(dims));
    }
    volume *= d;
  }
  return volume;
}

std::string shape_to_string(std::span<const std::size_t> dims) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i != 0) os << ", ";
    os << dims[i];
  }
  os << ')';
  return os.str();
}

namespace {

void check_dims(const Shape& dims) {
  if (dims.empty()) throw ValidationError("tensor must have at least one axis");
  for (std::size_t d : dims) {
    if (d == 0) throw ValidationError("tensor extents must be >= 1, got " + shape_to_string(dims));
  }
}

}  // namespace

DenseTensor::DenseTensor() : dims_{1}, data_(1, 0.0) {}

DenseTensor::DenseTensor(Shape dims, DType dtype) : dims_(std::move(dims)), dtype_(dtype) {
  check_dims(dims_);
  data_.assign(shape_volume(dims_), 0.0);
}

DenseTensor::DenseTensor(Shape dims, std::vector<double> data, DType dtype)
    : dims_(std::move(dims)), data_(std::move(data)), dtype_(dtype) {
  check_dims(dims_);
  if (shape_volume(dims_) != data_.size()) {
    throw ValidationError("payload length " + std::to_string(data_.size()) + " does not match shape " +
                          shape_to_string(dims_));
  }
}

std::size_t DenseTensor::dim(std::size_t axis) const {
  if (axis >= dims_.size()) {
    throw ValidationError("axis " + std::to_string(axis) + " out of range for rank " + std::to_string(rank()));
  }
  return dims_[axis];
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != dims_.size()) throw ValidationError("index rank does not match tensor rank");
  std::size_t flat = 0;
  for (std::size_t a = 0; a < dims_.size(); ++a) {
    if (index[a] >= dims_[a]) throw ValidationError("index out of range on axis " + std::to_string(a));
    flat = flat * dims_[a] + index[a];
  }
  return flat;
}

double DenseTensor::at(std::initializer_list<std::size_t> index) const {
  return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

double& DenseTensor::at(std::initializer_list<std::size_t> index) {
  return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

std::vector<std::size_t> DenseTensor::strides() const {
  std::vector<std::size_t> s(dims_.size(), 1);
  for (std::size_t a = dims_.size(); a-- > 1;) s[a - 1] = s[a] * dims_[a];
  return s;
}

DenseTensor DenseTensor::reshaped(Shape dims) const { return DenseTensor(std::move(dims), data_, dtype_); }

bool DenseTensor::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool operator==(const DenseTensor& a, const DenseTensor& b) {
  return a.dtype_ == b.dtype_ && a.dims_ == b.dims_ && a.data_ == b.data_;
}

Matrix::Matrix(std::size_t rows, std::size_t cols) : Matrix(rows, cols, std::vector<double>(rows * cols, 0.0)) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) throw ValidationError("matrix extents must be >= 1");
  if (rows * cols != data_.size()) throw ValidationError("matrix payload length does not match rows*cols");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

Matrix Matrix::leading_columns(std::size_t n) const {
  if (n == 0 || n > cols_) throw ValidationError("leading_columns: count out of range");
  Matrix out(rows_, n);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < n; ++c) out(r, c) = (*this)(r, c);
  }
  return out;
}

bool Matrix::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ValidationError("matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

}  // namespace tuckerforge
