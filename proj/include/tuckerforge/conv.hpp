// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tuckerforge/kernel.hpp"
#include "tuckerforge/tensor.hpp"
#include "tuckerforge/tucker.hpp"

namespace tuckerforge {

/// Stride and zero-padding per spatial axis (H, W, D).
struct ConvSpec {
  Triple stride{1, 1, 1};
  Triple padding{0, 0, 0};

  void validate() const;
  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

/// Activation volume with axes (C, H, W, D).
class FeatureMap {
 public:
  FeatureMap(std::size_t channels, Triple spatial);
  explicit FeatureMap(DenseTensor tensor);

  const DenseTensor& tensor() const noexcept { return tensor_; }
  DenseTensor& tensor() noexcept { return tensor_; }
  std::size_t channels() const noexcept { return tensor_.dims()[0]; }
  Triple spatial() const noexcept { return {tensor_.dims()[1], tensor_.dims()[2], tensor_.dims()[3]}; }
  std::size_t voxels() const noexcept { return tensor_.size() / channels(); }

 private:
  DenseTensor tensor_;
};

/// floor((in − k + 2p) / s + 1) per axis; throws if an extent would be < 1.
Triple output_dims(Triple input, Triple kernel, const ConvSpec& spec);

/// Counts multiply-accumulates as the engine executes them. Taps that land
/// in the zero padding are executed and counted like any other.
struct MacCounter {
  std::uint64_t macs = 0;
};

struct ExecOptions {
  std::size_t threads = 1;
  MacCounter* counter = nullptr;
};

/// A direct 3-D convolution bound to one kernel, geometry and input size.
///
/// Weights are packed once on construction and scratch buffers are reused
/// across calls, so `run` does no allocation after the first call with a
/// given thread count. Every output voxel is accumulated as a chain of fused
/// multiply-adds over (i, j, k, m) in lexicographic order, starting from
/// zero. The result is therefore bit-identical for any thread count.
class DirectConv {
 public:
  DirectConv(const ConvKernel& kernel, ConvSpec spec, Triple input_dims);

  std::size_t in_channels() const noexcept { return in_channels_; }
  std::size_t out_channels() const noexcept { return out_channels_; }
  Triple input_dims() const noexcept { return input_dims_; }
  Triple output_dims() const noexcept { return output_dims_; }

  FeatureMap make_output() const { return FeatureMap(out_channels_, output_dims_); }

  void run(const FeatureMap& x, FeatureMap& y, const ExecOptions& options = {});
  FeatureMap run(const FeatureMap& x, const ExecOptions& options = {});

 private:
  struct Workspace {
    std::vector<double> b_pack;
    std::vector<double> c_tiles;
  };

  void run_columns(const double* src, double* dst, std::size_t col_begin, std::size_t col_end, Workspace& ws,
                   std::uint64_t& macs) const;

  std::size_t out_channels_;
  std::size_t in_channels_;
  Triple kernel_dims_;
  ConvSpec spec_;
  Triple input_dims_;
  Triple padded_dims_;
  Triple output_dims_;
  std::size_t reduction_;  // I · K_H · K_W · K_D
  std::size_t columns_;    // H' · W' · D'
  std::size_t panels_;
  std::vector<double> a_pack_;
  std::vector<std::size_t> tap_offset_;
  std::vector<std::size_t> column_offset_;
  std::vector<double> padded_;
  std::vector<Workspace> workspaces_;
};

/// The three-stage factorized convolution: a pointwise projection I → T_I
/// with u_inᵀ, the core convolution T_I → T_O carrying the original stride
/// and padding, and a pointwise projection T_O → O with u_out.
class TuckerConv {
 public:
  TuckerConv(const TuckerFactors& factors, ConvSpec spec, Triple input_dims);

  Triple output_dims() const noexcept { return expand_.output_dims(); }
  FeatureMap make_output() const { return expand_.make_output(); }

  void run(const FeatureMap& x, FeatureMap& y, const ExecOptions& options = {});
  FeatureMap run(const FeatureMap& x, const ExecOptions& options = {});

 private:
  DirectConv project_;
  DirectConv core_;
  DirectConv expand_;
  FeatureMap projected_;
  FeatureMap cored_;
};

FeatureMap conv3d_direct(const FeatureMap& x, const ConvKernel& kernel, const ConvSpec& spec,
                         const ExecOptions& options = {});

FeatureMap conv3d_tucker(const FeatureMap& x, const TuckerFactors& factors, const ConvSpec& spec,
                         const ExecOptions& options = {});

/// Adds bias[o] to every voxel of output channel o.
void add_bias(FeatureMap& y, std::span<const double> bias);

/// Pointwise kernels (c_out, c_in, 1, 1, 1) for the two projection stages.
ConvKernel projection_kernel_in(const Matrix& u_in);
ConvKernel projection_kernel_out(const Matrix& u_out);

}  // namespace tuckerforge
