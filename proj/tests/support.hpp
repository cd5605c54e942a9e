// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

// Shared fixtures for the unit tests and the acceptance suite.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tuckerforge/container.hpp"

namespace support {

/// Little-endian byte builder, independent of the library's writer.
struct Bytes {
  std::vector<std::uint8_t> data;

  Bytes& raw(std::string_view s) {
    data.insert(data.end(), s.begin(), s.end());
    return *this;
  }
  template <typename T>
  Bytes& le(T v) {
    for (std::size_t b = 0; b < sizeof(T); ++b) data.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
    return *this;
  }
  Bytes& f64(double v) { return le(std::bit_cast<std::uint64_t>(v)); }
  Bytes& header(std::string_view manifest, std::uint32_t count, std::uint32_t version = 1) {
    raw("TKWT").le<std::uint32_t>(version).le<std::uint32_t>(static_cast<std::uint32_t>(manifest.size()));
    raw(manifest).le<std::uint32_t>(count);
    return *this;
  }
  Bytes& tensor_f64(std::string_view name, const std::vector<std::uint32_t>& dims, const std::vector<double>& values) {
    le<std::uint16_t>(static_cast<std::uint16_t>(name.size())).raw(name);
    le<std::uint8_t>(1).le<std::uint8_t>(static_cast<std::uint8_t>(dims.size()));
    for (auto d : dims) le<std::uint32_t>(d);
    for (double v : values) f64(v);
    return *this;
  }
};

/// One byte string per malformation class, each paired with the error code
/// the decoder must report.
inline std::vector<std::pair<tuckerforge::ContainerErrc, std::vector<std::uint8_t>>> malformed_containers() {
  using E = tuckerforge::ContainerErrc;
  auto valid = [] { return Bytes{}.header("{}", 1).tensor_f64("t", {2}, {1.0, 2.0}).data; };
  // Offsets in `valid`: magic 0, version 4, manifest 12, count 14, name len 18,
  // name 20, dtype 21, ndim 22, dim 23, payload 27.
  std::vector<std::pair<E, std::vector<std::uint8_t>>> cases;
  auto bad_magic = valid();
  bad_magic[0] = 'X';
  cases.emplace_back(E::bad_magic, bad_magic);
  auto version = valid();
  version[4] = 2;
  cases.emplace_back(E::unsupported_version, version);
  auto truncated = valid();
  truncated.resize(10);
  cases.emplace_back(E::truncated_header, truncated);
  auto dtype = valid();
  dtype[21] = 7;
  cases.emplace_back(E::bad_dtype, dtype);
  auto shape = valid();
  shape[23] = 0;
  cases.emplace_back(E::bad_shape, shape);
  cases.emplace_back(E::duplicate_name,
                     Bytes{}.header("{}", 2).tensor_f64("t", {1}, {1.0}).tensor_f64("t", {1}, {2.0}).data);
  auto payload = valid();
  payload.pop_back();
  cases.emplace_back(E::payload_length_mismatch, payload);
  auto trailing = valid();
  trailing.push_back(0);
  cases.emplace_back(E::trailing_bytes, trailing);
  return cases;
}

/// Random container: up to 6 tensors of rank 1-5 with random dtypes. f32
/// tensors hold values already representable in f32 so the round trip is
/// exact and no narrowing flag is added.
inline tuckerforge::Container random_container(std::mt19937_64& gen) {
  tuckerforge::Container c;
  std::uniform_int_distribution<int> count(0, 6), rank(1, 5), extent(1, 5), coin(0, 1), len(1, 24);
  std::normal_distribution<double> value(0.0, 10.0);
  const int manifest_len = std::uniform_int_distribution<int>(0, 64)(gen);
  for (int i = 0; i < manifest_len; ++i) c.manifest.push_back(static_cast<char>('a' + gen() % 26));
  const int n = count(gen);
  for (int t = 0; t < n; ++t) {
    std::string name = "tensor" + std::to_string(t) + ".";
    const int extra = len(gen);
    for (int i = 0; i < extra; ++i) name.push_back(static_cast<char>('a' + gen() % 26));
    tuckerforge::Shape dims(static_cast<std::size_t>(rank(gen)));
    for (auto& d : dims) d = static_cast<std::size_t>(extent(gen));
    const auto dtype = coin(gen) ? tuckerforge::DType::f64 : tuckerforge::DType::f32;
    std::vector<double> values(tuckerforge::shape_volume(dims));
    for (auto& v : values) {
      v = value(gen);
      if (dtype == tuckerforge::DType::f32) v = static_cast<double>(static_cast<float>(v));
    }
    c.tensors.push_back({std::move(name), tuckerforge::DenseTensor(dims, std::move(values), dtype)});
  }
  return c;
}

}  // namespace support
