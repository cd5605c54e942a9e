// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tuckerforge/errors.hpp"
#include "tuckerforge/tensor.hpp"
#include "tuckerforge/tucker.hpp"

namespace tuckerforge {

// Byte layout, all integers little-endian:
//
//   "TKWT"  u32 version (=1)  u32 manifest_len  manifest (UTF-8)  u32 tensor_count
//   per tensor:
//     u16 name_len  name (UTF-8)  u8 dtype (0=f32, 1=f64)  u8 ndim  ndim × u32 dims
//     payload: product(dims) values of the dtype, row-major
//
// An empty container is exactly 16 bytes.

inline constexpr std::uint32_t kContainerVersion = 1;

/// Manifest key listing tensors whose values changed when narrowed to f32.
inline constexpr std::string_view kLossyNarrowingKey = "lossy_f32_narrowing";

struct NamedTensor {
  std::string name;
  DenseTensor tensor;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

struct Container {
  std::uint32_t version = kContainerVersion;
  std::string manifest;
  std::vector<NamedTensor> tensors;

  const DenseTensor* find(std::string_view name) const;
  /// Throws if the name is already present.
  void add(std::string name, DenseTensor tensor);
  void validate() const;

  friend bool operator==(const Container&, const Container&) = default;
};

enum class ContainerErrc {
  bad_magic,
  unsupported_version,
  truncated_header,
  bad_dtype,
  bad_shape,
  duplicate_name,
  payload_length_mismatch,
  trailing_bytes,
  name_too_long,
};

std::string_view to_string(ContainerErrc code);

/// A malformed container; `code()` identifies which check failed.
class ContainerError : public ValidationError {
 public:
  ContainerError(ContainerErrc code, const std::string& detail);
  ContainerErrc code() const noexcept { return code_; }

 private:
  ContainerErrc code_;
};

/// Serializes `c`. Tensors tagged f32 are narrowed; if that changes any value
/// the tensor's name is appended to the manifest's lossy-narrowing list (the
/// manifest must then be empty or a JSON object).
std::vector<std::uint8_t> encode_container(const Container& c);
Container decode_container(std::span<const std::uint8_t> bytes);

void write_container(const std::filesystem::path& path, const Container& c);
Container read_container(const std::filesystem::path& path);

/// Names used for a factorized layer: <layer>.u_in, <layer>.core, <layer>.u_out.
std::string factor_tensor_name(std::string_view layer, std::string_view part);

void store_factors(Container& c, std::string_view layer, const TuckerFactors& factors, DType dtype = DType::f64);

/// Reassembles a layer's factors and checks that their ranks agree.
TuckerFactors load_factors(const Container& c, std::string_view layer);

}  // namespace tuckerforge
