// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

// Reference implementations used as test oracles. They share no code with
// the library: plain loops, a hand-written Jacobi eigensolver and a
// standard-library RNG.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <limits>
#include <cmath>
#include <cstddef>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Index = std::vector<std::size_t>;

inline std::size_t volume(const Index& dims) {
  std::size_t v = 1;
  for (auto d : dims) v *= d;
  return v;
}

inline std::size_t flat(const Index& dims, const Index& idx) {
  std::size_t f = 0;
  for (std::size_t a = 0; a < dims.size(); ++a) f = f * dims[a] + idx[a];
  return f;
}

inline Index unflat(const Index& dims, std::size_t f) {
  Index idx(dims.size());
  for (std::size_t a = dims.size(); a-- > 0;) {
    idx[a] = f % dims[a];
    f /= dims[a];
  }
  return idx;
}

inline std::vector<double> normal_values(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

/// Column index of entry `idx` in the mode-n unfolding: the remaining axes
/// n+1, ..., N-1, 0, ..., n-1 with axis n+1 varying fastest.
inline std::size_t unfold_column(const Index& dims, const Index& idx, std::size_t n) {
  const std::size_t N = dims.size();
  std::size_t col = 0;
  std::size_t stride = 1;
  for (std::size_t s = 1; s < N; ++s) {
    const std::size_t axis = (n + s) % N;
    col += idx[axis] * stride;
    stride *= dims[axis];
  }
  return col;
}

/// Row-major rows × cols matrix of the mode-n unfolding.
inline std::vector<double> unfold(const std::vector<double>& t, const Index& dims, std::size_t n) {
  const std::size_t rows = dims[n];
  const std::size_t cols = volume(dims) / rows;
  std::vector<double> m(rows * cols);
  for (std::size_t f = 0; f < t.size(); ++f) {
    const Index idx = unflat(dims, f);
    m[idx[n] * cols + unfold_column(dims, idx, n)] = t[f];
  }
  return m;
}

/// t ×ₙ u with u of shape (J, dims[n]), summing the contracted index upward.
inline std::vector<double> mode_product(const std::vector<double>& t, const Index& dims, const std::vector<double>& u,
                                        std::size_t J, std::size_t n, Index& out_dims) {
  out_dims = dims;
  out_dims[n] = J;
  std::vector<double> out(volume(out_dims), 0.0);
  for (std::size_t f = 0; f < out.size(); ++f) {
    Index idx = unflat(out_dims, f);
    const std::size_t j = idx[n];
    double acc = 0.0;
    for (std::size_t i = 0; i < dims[n]; ++i) {
      idx[n] = i;
      acc += u[j * dims[n] + i] * t[flat(dims, idx)];
    }
    out[f] = acc;
  }
  return out;
}

/// Cyclic Jacobi eigensolver for a symmetric n × n matrix (row-major).
/// Returns eigenvalues in descending order and the matching eigenvectors as
/// the columns of a row-major n × n matrix.
inline std::pair<std::vector<double>, std::vector<double>> jacobi_eigen(std::vector<double> a, std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    double total = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = 0; q < n; ++q) {
        total += a[p * n + q] * a[p * n + q];
        if (p != q) off += a[p * n + q] * a[p * n + q];
      }
    }
    if (off <= 1e-30 * total || off == 0.0) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return a[x * n + x] > a[y * n + y]; });
  std::vector<double> values(n);
  std::vector<double> vectors(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    values[j] = a[order[j] * n + order[j]];
    for (std::size_t k = 0; k < n; ++k) vectors[k * n + j] = v[k * n + order[j]];
  }
  return {values, vectors};
}

/// m · mᵀ for a row-major rows × cols matrix.
inline std::vector<double> gram(const std::vector<double>& m, std::size_t rows, std::size_t cols) {
  std::vector<double> g(rows * rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < rows; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < cols; ++k) acc += m[i * cols + k] * m[j * cols + k];
      g[i * rows + j] = acc;
    }
  }
  return g;
}

/// Direct 3-D cross-correlation, one voxel at a time. Each output is a chain
/// of fused multiply-adds over (input channel, kh, kw, kd) starting at zero;
/// taps in the zero padding contribute fma(w, 0, acc).
inline std::vector<double> conv3d(const std::vector<double>& x, const Index& xdims, const std::vector<double>& w,
                                  const Index& wdims, std::array<std::size_t, 3> stride,
                                  std::array<std::size_t, 3> pad, Index& ydims) {
  const std::size_t O = wdims[0], I = wdims[1];
  std::array<std::size_t, 3> out{};
  for (int a = 0; a < 3; ++a) out[a] = (xdims[a + 1] + 2 * pad[a] - wdims[a + 2]) / stride[a] + 1;
  ydims = {O, out[0], out[1], out[2]};
  std::vector<double> y(volume(ydims));
  for (std::size_t o = 0; o < O; ++o)
    for (std::size_t h = 0; h < out[0]; ++h)
      for (std::size_t v = 0; v < out[1]; ++v)
        for (std::size_t d = 0; d < out[2]; ++d) {
          double acc = 0.0;
          for (std::size_t i = 0; i < I; ++i)
            for (std::size_t j = 0; j < wdims[2]; ++j)
              for (std::size_t k = 0; k < wdims[3]; ++k)
                for (std::size_t m = 0; m < wdims[4]; ++m) {
                  const long hh = static_cast<long>(h * stride[0] + j) - static_cast<long>(pad[0]);
                  const long ww = static_cast<long>(v * stride[1] + k) - static_cast<long>(pad[1]);
                  const long dd = static_cast<long>(d * stride[2] + m) - static_cast<long>(pad[2]);
                  double xv = 0.0;
                  if (hh >= 0 && ww >= 0 && dd >= 0 && hh < static_cast<long>(xdims[1]) &&
                      ww < static_cast<long>(xdims[2]) && dd < static_cast<long>(xdims[3])) {
                    xv = x[flat(xdims, {i, static_cast<std::size_t>(hh), static_cast<std::size_t>(ww),
                                        static_cast<std::size_t>(dd)})];
                  }
                  acc = std::fma(w[flat(wdims, {o, i, j, k, m})], xv, acc);
                }
          y[flat(ydims, {o, h, v, d})] = acc;
        }
  return y;
}

/// Lowest-norm-sum n-subset by enumerating all bitmasks; among equal sums
/// the lexicographically smallest index set wins.
inline std::vector<std::size_t> exhaustive_min_subset(const std::vector<double>& norms, std::size_t n) {
  const std::size_t o = norms.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_set;
  for (std::uint32_t mask = 0; mask < (1u << o); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != n) continue;
    std::vector<std::size_t> set;
    double sum = 0.0;
    for (std::size_t c = 0; c < o; ++c) {
      if (mask & (1u << c)) {
        set.push_back(c);
        sum += norms[c];
      }
    }
    if (sum < best || (sum == best && set < best_set)) {
      best = sum;
      best_set = set;
    }
  }
  return best_set;
}

}  // namespace oracle
