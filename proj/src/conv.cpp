// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "tuckerforge/conv.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <utility>

#if defined(__AVX2__) || defined(__AVX512F__)
#include <immintrin.h>
#endif

#include "tuckerforge/errors.hpp"

namespace tuckerforge {

namespace {

// Register tile (rows of the kernel matrix × output voxels) and cache blocks.
// Every variant performs, per output element, the same chain of fused
// multiply-adds in the same order, so results do not depend on the ISA.
#if defined(__AVX512F__)
constexpr std::size_t kTileRows = 8;
constexpr std::size_t kTileCols = 16;
#elif defined(__AVX2__) && defined(__FMA__)
constexpr std::size_t kTileRows = 6;
constexpr std::size_t kTileCols = 8;
#else
constexpr std::size_t kTileRows = 4;
constexpr std::size_t kTileCols = 8;
#endif
constexpr std::size_t kDepthBlock = 256;
constexpr std::size_t kColumnBlock = 256;

// c[MR×NR] continues its accumulation with `depth` more rank-1 updates.
inline void micro_kernel(std::size_t depth, const double* __restrict a, const double* __restrict b,
                         double* __restrict c) {
#if defined(__AVX512F__)
  __m512d acc[kTileRows][2];
  for (std::size_t r = 0; r < kTileRows; ++r) {
    acc[r][0] = _mm512_loadu_pd(c + r * kTileCols);
    acc[r][1] = _mm512_loadu_pd(c + r * kTileCols + 8);
  }
  for (std::size_t p = 0; p < depth; ++p) {
    const __m512d b0 = _mm512_loadu_pd(b + p * kTileCols);
    const __m512d b1 = _mm512_loadu_pd(b + p * kTileCols + 8);
    const double* ap = a + p * kTileRows;
    for (std::size_t r = 0; r < kTileRows; ++r) {
      const __m512d ar = _mm512_set1_pd(ap[r]);
      acc[r][0] = _mm512_fmadd_pd(ar, b0, acc[r][0]);
      acc[r][1] = _mm512_fmadd_pd(ar, b1, acc[r][1]);
    }
  }
  for (std::size_t r = 0; r < kTileRows; ++r) {
    _mm512_storeu_pd(c + r * kTileCols, acc[r][0]);
    _mm512_storeu_pd(c + r * kTileCols + 8, acc[r][1]);
  }
#elif defined(__AVX2__) && defined(__FMA__)
  __m256d acc[kTileRows][2];
  for (std::size_t r = 0; r < kTileRows; ++r) {
    acc[r][0] = _mm256_loadu_pd(c + r * kTileCols);
    acc[r][1] = _mm256_loadu_pd(c + r * kTileCols + 4);
  }
  for (std::size_t p = 0; p < depth; ++p) {
    const __m256d b0 = _mm256_loadu_pd(b + p * kTileCols);
    const __m256d b1 = _mm256_loadu_pd(b + p * kTileCols + 4);
    const double* ap = a + p * kTileRows;
    for (std::size_t r = 0; r < kTileRows; ++r) {
      const __m256d ar = _mm256_broadcast_sd(ap + r);
      acc[r][0] = _mm256_fmadd_pd(ar, b0, acc[r][0]);
      acc[r][1] = _mm256_fmadd_pd(ar, b1, acc[r][1]);
    }
  }
  for (std::size_t r = 0; r < kTileRows; ++r) {
    _mm256_storeu_pd(c + r * kTileCols, acc[r][0]);
    _mm256_storeu_pd(c + r * kTileCols + 4, acc[r][1]);
  }
#else
  double acc[kTileRows][kTileCols];
  for (std::size_t r = 0; r < kTileRows; ++r) {
    for (std::size_t j = 0; j < kTileCols; ++j) acc[r][j] = c[r * kTileCols + j];
  }
  for (std::size_t p = 0; p < depth; ++p) {
    const double* bp = b + p * kTileCols;
    const double* ap = a + p * kTileRows;
    for (std::size_t r = 0; r < kTileRows; ++r) {
      for (std::size_t j = 0; j < kTileCols; ++j) acc[r][j] = std::fma(ap[r], bp[j], acc[r][j]);
    }
  }
  for (std::size_t r = 0; r < kTileRows; ++r) {
    for (std::size_t j = 0; j < kTileCols; ++j) c[r * kTileCols + j] = acc[r][j];
  }
#endif
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

void ConvSpec::validate() const {
  for (std::size_t s : stride) {
    if (s < 1) throw ValidationError("convolution stride must be >= 1");
  }
}

FeatureMap::FeatureMap(std::size_t channels, Triple spatial)
    : tensor_(Shape{channels, spatial[0], spatial[1], spatial[2]}) {}

FeatureMap::FeatureMap(DenseTensor tensor) : tensor_(std::move(tensor)) {
  if (tensor_.rank() != 4) {
    throw ValidationError("feature map must have 4 axes (C, H, W, D), got " + shape_to_string(tensor_.dims()));
  }
}

Triple output_dims(Triple input, Triple kernel, const ConvSpec& spec) {
  spec.validate();
  Triple out{};
  for (std::size_t a = 0; a < 3; ++a) {
    const std::size_t padded = input[a] + 2 * spec.padding[a];
    if (kernel[a] < 1 || padded < kernel[a]) {
      throw ValidationError("invalid convolution geometry on axis " + std::to_string(a) + ": input " +
                            std::to_string(input[a]) + ", kernel " + std::to_string(kernel[a]) + ", padding " +
                            std::to_string(spec.padding[a]));
    }
    out[a] = (padded - kernel[a]) / spec.stride[a] + 1;
  }
  return out;
}

DirectConv::DirectConv(const ConvKernel& kernel, ConvSpec spec, Triple input_dims)
    : out_channels_(kernel.out_channels()),
      in_channels_(kernel.in_channels()),
      kernel_dims_(kernel.spatial()),
      spec_(spec),
      input_dims_(input_dims),
      output_dims_(tuckerforge::output_dims(input_dims, kernel.spatial(), spec)) {
  if (kernel.kind() == LayerKind::convtranspose3d) {
    throw ValidationError("transposed convolutions are decomposed and scored but not executed");
  }
  for (std::size_t a = 0; a < 3; ++a) padded_dims_[a] = input_dims_[a] + 2 * spec_.padding[a];
  reduction_ = in_channels_ * kernel.spatial_volume();
  columns_ = output_dims_[0] * output_dims_[1] * output_dims_[2];
  panels_ = ceil_div(out_channels_, kTileRows);

  // Kernel rows are already laid out as (o, [i, j, k, m]); pack them into
  // row panels, zero-filled past the last output channel.
  a_pack_.assign(panels_ * reduction_ * kTileRows, 0.0);
  const auto w = kernel.tensor().data();
  for (std::size_t o = 0; o < out_channels_; ++o) {
    const std::size_t panel = o / kTileRows;
    const std::size_t r = o % kTileRows;
    double* dst = a_pack_.data() + panel * reduction_ * kTileRows + r;
    const double* src = w.data() + o * reduction_;
    for (std::size_t p = 0; p < reduction_; ++p) dst[p * kTileRows] = src[p];
  }

  const std::size_t row = padded_dims_[2];
  const std::size_t slab = padded_dims_[1] * row;
  const std::size_t plane = padded_dims_[0] * slab;
  tap_offset_.reserve(reduction_);
  for (std::size_t i = 0; i < in_channels_; ++i) {
    for (std::size_t j = 0; j < kernel_dims_[0]; ++j) {
      for (std::size_t k = 0; k < kernel_dims_[1]; ++k) {
        for (std::size_t m = 0; m < kernel_dims_[2]; ++m) tap_offset_.push_back(i * plane + j * slab + k * row + m);
      }
    }
  }
  column_offset_.reserve(columns_);
  for (std::size_t h = 0; h < output_dims_[0]; ++h) {
    for (std::size_t w2 = 0; w2 < output_dims_[1]; ++w2) {
      for (std::size_t d = 0; d < output_dims_[2]; ++d) {
        column_offset_.push_back(h * spec_.stride[0] * slab + w2 * spec_.stride[1] * row + d * spec_.stride[2]);
      }
    }
  }
  if (spec_.padding != Triple{0, 0, 0}) padded_.assign(in_channels_ * plane, 0.0);
}

void DirectConv::run_columns(const double* src, double* dst, std::size_t col_begin, std::size_t col_end,
                             Workspace& ws, std::uint64_t& macs) const {
  for (std::size_t c0 = col_begin; c0 < col_end; c0 += kColumnBlock) {
    const std::size_t c1 = std::min(col_end, c0 + kColumnBlock);
    const std::size_t strips = ceil_div(c1 - c0, kTileCols);
    std::fill(ws.c_tiles.begin(), ws.c_tiles.begin() + panels_ * strips * kTileRows * kTileCols, 0.0);

    for (std::size_t p0 = 0; p0 < reduction_; p0 += kDepthBlock) {
      const std::size_t depth = std::min(kDepthBlock, reduction_ - p0);
      // Gather the im2col block [p0, p0 + depth) × [c0, c1) into column strips.
      for (std::size_t s = 0; s < strips; ++s) {
        double* strip = ws.b_pack.data() + s * depth * kTileCols;
        const std::size_t first = c0 + s * kTileCols;
        const std::size_t width = std::min(kTileCols, c1 - first);
        const std::size_t* cols = column_offset_.data() + first;
        for (std::size_t p = 0; p < depth; ++p) {
          const double* tap = src + tap_offset_[p0 + p];
          double* out = strip + p * kTileCols;
          std::size_t j = 0;
          for (; j < width; ++j) out[j] = tap[cols[j]];
          for (; j < kTileCols; ++j) out[j] = 0.0;
        }
      }
      for (std::size_t s = 0; s < strips; ++s) {
        const double* strip = ws.b_pack.data() + s * depth * kTileCols;
        const std::size_t width = std::min(kTileCols, c1 - (c0 + s * kTileCols));
        for (std::size_t panel = 0; panel < panels_; ++panel) {
          const double* a = a_pack_.data() + (panel * reduction_ + p0) * kTileRows;
          double* c = ws.c_tiles.data() + (panel * strips + s) * kTileRows * kTileCols;
          micro_kernel(depth, a, strip, c);
          const std::size_t height = std::min(kTileRows, out_channels_ - panel * kTileRows);
          macs += static_cast<std::uint64_t>(height) * width * depth;
        }
      }
    }

    for (std::size_t panel = 0; panel < panels_; ++panel) {
      const std::size_t height = std::min(kTileRows, out_channels_ - panel * kTileRows);
      for (std::size_t s = 0; s < strips; ++s) {
        const std::size_t first = c0 + s * kTileCols;
        const std::size_t width = std::min(kTileCols, c1 - first);
        const double* c = ws.c_tiles.data() + (panel * strips + s) * kTileRows * kTileCols;
        for (std::size_t r = 0; r < height; ++r) {
          double* out = dst + (panel * kTileRows + r) * columns_ + first;
          for (std::size_t j = 0; j < width; ++j) out[j] = c[r * kTileCols + j];
        }
      }
    }
  }
}

void DirectConv::run(const FeatureMap& x, FeatureMap& y, const ExecOptions& options) {
  if (x.channels() != in_channels_) {
    throw ValidationError("input has " + std::to_string(x.channels()) + " channels but the kernel expects " +
                          std::to_string(in_channels_));
  }
  if (x.spatial() != input_dims_) throw ValidationError("input spatial extents differ from the planned geometry");
  if (y.channels() != out_channels_ || y.spatial() != output_dims_) {
    throw ValidationError("output buffer has the wrong shape");
  }

  const double* src = x.tensor().data().data();
  if (!padded_.empty()) {
    const Triple& pad = spec_.padding;
    const std::size_t row = padded_dims_[2];
    const std::size_t slab = padded_dims_[1] * row;
    const std::size_t plane = padded_dims_[0] * slab;
    for (std::size_t i = 0; i < in_channels_; ++i) {
      for (std::size_t h = 0; h < input_dims_[0]; ++h) {
        for (std::size_t w = 0; w < input_dims_[1]; ++w) {
          const double* from = src + ((i * input_dims_[0] + h) * input_dims_[1] + w) * input_dims_[2];
          double* to = padded_.data() + i * plane + (h + pad[0]) * slab + (w + pad[1]) * row + pad[2];
          std::copy(from, from + input_dims_[2], to);
        }
      }
    }
    src = padded_.data();
  }

  const std::size_t blocks = ceil_div(columns_, kColumnBlock);
  const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, blocks);
  if (workspaces_.size() < threads) workspaces_.resize(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    workspaces_[t].b_pack.resize(ceil_div(kColumnBlock, kTileCols) * kDepthBlock * kTileCols);
    workspaces_[t].c_tiles.resize(panels_ * ceil_div(kColumnBlock, kTileCols) * kTileRows * kTileCols);
  }

  double* dst = y.tensor().data().data();
  std::vector<std::uint64_t> macs(threads, 0);
  if (threads == 1) {
    run_columns(src, dst, 0, columns_, workspaces_[0], macs[0]);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = std::min(columns_, (blocks * t / threads) * kColumnBlock);
      const std::size_t end = std::min(columns_, (blocks * (t + 1) / threads) * kColumnBlock);
      pool.emplace_back([&, t, begin, end] { run_columns(src, dst, begin, end, workspaces_[t], macs[t]); });
    }
  }
  if (options.counter != nullptr) {
    for (std::uint64_t m : macs) options.counter->macs += m;
  }
}

FeatureMap DirectConv::run(const FeatureMap& x, const ExecOptions& options) {
  FeatureMap y = make_output();
  run(x, y, options);
  return y;
}

ConvKernel projection_kernel_in(const Matrix& u_in) {
  const Matrix t = u_in.transposed();
  return ConvKernel(DenseTensor({t.rows(), t.cols(), 1, 1, 1}, std::vector<double>(t.data().begin(), t.data().end())),
                    LayerKind::pointwise);
}

ConvKernel projection_kernel_out(const Matrix& u_out) {
  return ConvKernel(
      DenseTensor({u_out.rows(), u_out.cols(), 1, 1, 1}, std::vector<double>(u_out.data().begin(), u_out.data().end())),
      LayerKind::pointwise);
}

TuckerConv::TuckerConv(const TuckerFactors& factors, ConvSpec spec, Triple input_dims)
    : project_((factors.validate(), projection_kernel_in(factors.u_in)), ConvSpec{}, input_dims),
      core_(ConvKernel(factors.core), spec, input_dims),
      expand_(projection_kernel_out(factors.u_out), ConvSpec{}, core_.output_dims()),
      projected_(project_.make_output()),
      cored_(core_.make_output()) {}

void TuckerConv::run(const FeatureMap& x, FeatureMap& y, const ExecOptions& options) {
  project_.run(x, projected_, options);
  core_.run(projected_, cored_, options);
  expand_.run(cored_, y, options);
}

FeatureMap TuckerConv::run(const FeatureMap& x, const ExecOptions& options) {
  FeatureMap y = make_output();
  run(x, y, options);
  return y;
}

FeatureMap conv3d_direct(const FeatureMap& x, const ConvKernel& kernel, const ConvSpec& spec,
                         const ExecOptions& options) {
  DirectConv plan(kernel, spec, x.spatial());
  return plan.run(x, options);
}

FeatureMap conv3d_tucker(const FeatureMap& x, const TuckerFactors& factors, const ConvSpec& spec,
                         const ExecOptions& options) {
  TuckerConv plan(factors, spec, x.spatial());
  return plan.run(x, options);
}

void add_bias(FeatureMap& y, std::span<const double> bias) {
  if (bias.size() != y.channels()) throw ValidationError("bias length does not match output channels");
  auto data = y.tensor().data();
  const std::size_t voxels = y.voxels();
  for (std::size_t o = 0; o < bias.size(); ++o) {
    for (std::size_t v = 0; v < voxels; ++v) data[o * voxels + v] += bias[o];
  }
}

}  // namespace tuckerforge
