// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "tuckerforge/container.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <nlohmann/json.hpp>
#include <set>

namespace tuckerforge {

namespace {

constexpr char kMagic[4] = {'T', 'K', 'W', 'T'};

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  template <typename T>
  void le(T value) {
    for (std::size_t b = 0; b < sizeof(T); ++b) out_.push_back(static_cast<std::uint8_t>(value >> (8 * b)));
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::size_t remaining() const noexcept { return in_.size() - pos_; }

  template <typename T>
  T le(ContainerErrc code, const char* what) {
    need(sizeof(T), code, what);
    T value = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) value |= static_cast<T>(T{in_[pos_ + b]} << (8 * b));
    pos_ += sizeof(T);
    return value;
  }

  std::span<const std::uint8_t> take(std::size_t n, ContainerErrc code, const char* what) {
    need(n, code, what);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n, ContainerErrc code, const char* what) {
    if (remaining() < n) throw ContainerError(code, std::string("unexpected end of file while reading ") + what);
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::string with_lossy_names(const std::string& manifest, const std::vector<std::string>& names) {
  nlohmann::json j = nlohmann::json::object();
  if (!manifest.empty()) {
    try {
      j = nlohmann::json::parse(manifest);
    } catch (const nlohmann::json::parse_error&) {
      throw ValidationError("lossy f32 narrowing must be recorded in the manifest, which is not JSON");
    }
    if (!j.is_object()) throw ValidationError("lossy f32 narrowing requires a JSON object manifest");
  }
  auto& list = j[std::string(kLossyNarrowingKey)];
  if (!list.is_array()) list = nlohmann::json::array();
  for (const auto& n : names) {
    if (std::find(list.begin(), list.end(), n) == list.end()) list.push_back(n);
  }
  return j.dump();
}

}  // namespace

std::string_view to_string(ContainerErrc code) {
  switch (code) {
    case ContainerErrc::bad_magic:
      return "bad magic";
    case ContainerErrc::unsupported_version:
      return "unsupported version";
    case ContainerErrc::truncated_header:
      return "truncated header";
    case ContainerErrc::bad_dtype:
      return "bad dtype";
    case ContainerErrc::bad_shape:
      return "bad shape";
    case ContainerErrc::duplicate_name:
      return "duplicate tensor name";
    case ContainerErrc::payload_length_mismatch:
      return "payload length mismatch";
    case ContainerErrc::trailing_bytes:
      return "trailing bytes";
    case ContainerErrc::name_too_long:
      return "name too long";
  }
  return "container error";
}

ContainerError::ContainerError(ContainerErrc code, const std::string& detail)
    : ValidationError(std::string(to_string(code)) + ": " + detail), code_(code) {}

const DenseTensor* Container::find(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t.tensor;
  }
  return nullptr;
}

void Container::add(std::string name, DenseTensor tensor) {
  if (find(name) != nullptr) throw ContainerError(ContainerErrc::duplicate_name, "tensor '" + name + "'");
  tensors.push_back({std::move(name), std::move(tensor)});
}

void Container::validate() const {
  std::set<std::string_view> seen;
  for (const auto& t : tensors) {
    if (t.name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw ContainerError(ContainerErrc::name_too_long, std::to_string(t.name.size()) + " bytes");
    }
    if (!seen.insert(t.name).second) throw ContainerError(ContainerErrc::duplicate_name, "tensor '" + t.name + "'");
    if (t.tensor.rank() > std::numeric_limits<std::uint8_t>::max()) {
      throw ContainerError(ContainerErrc::bad_shape, "tensor '" + t.name + "' has too many axes");
    }
    for (std::size_t d : t.tensor.dims()) {
      if (d > std::numeric_limits<std::uint32_t>::max()) {
        throw ContainerError(ContainerErrc::bad_shape, "tensor '" + t.name + "' extent exceeds u32");
      }
    }
  }
}

std::vector<std::uint8_t> encode_container(const Container& c) {
  c.validate();
  if (c.version != kContainerVersion) {
    throw ContainerError(ContainerErrc::unsupported_version, "cannot write version " + std::to_string(c.version));
  }
  std::vector<std::string> lossy;
  for (const auto& t : c.tensors) {
    if (t.tensor.dtype() != DType::f32) continue;
    for (double v : t.tensor.data()) {
      const double narrowed = static_cast<double>(static_cast<float>(v));
      if (std::bit_cast<std::uint64_t>(narrowed) != std::bit_cast<std::uint64_t>(v)) {
        lossy.push_back(t.name);
        break;
      }
    }
  }
  const std::string manifest = lossy.empty() ? c.manifest : with_lossy_names(c.manifest, lossy);
  if (manifest.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("manifest exceeds 4 GiB");
  }

  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.le<std::uint32_t>(c.version);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(manifest.size()));
  w.bytes(manifest.data(), manifest.size());
  w.le<std::uint32_t>(static_cast<std::uint32_t>(c.tensors.size()));
  for (const auto& t : c.tensors) {
    w.le<std::uint16_t>(static_cast<std::uint16_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.le<std::uint8_t>(static_cast<std::uint8_t>(t.tensor.dtype()));
    w.le<std::uint8_t>(static_cast<std::uint8_t>(t.tensor.rank()));
    for (std::size_t d : t.tensor.dims()) w.le<std::uint32_t>(static_cast<std::uint32_t>(d));
    if (t.tensor.dtype() == DType::f32) {
      for (double v : t.tensor.data()) w.le<std::uint32_t>(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    } else {
      for (double v : t.tensor.data()) w.le<std::uint64_t>(std::bit_cast<std::uint64_t>(v));
    }
  }
  return w.take();
}

Container decode_container(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.take(4, ContainerErrc::truncated_header, "magic");
  if (std::memcmp(magic.data(), kMagic, sizeof kMagic) != 0) {
    throw ContainerError(ContainerErrc::bad_magic, "file does not start with \"TKWT\"");
  }
  Container c;
  c.version = r.le<std::uint32_t>(ContainerErrc::truncated_header, "version");
  if (c.version != kContainerVersion) {
    throw ContainerError(ContainerErrc::unsupported_version, "version " + std::to_string(c.version));
  }
  const auto manifest_len = r.le<std::uint32_t>(ContainerErrc::truncated_header, "manifest length");
  const auto manifest = r.take(manifest_len, ContainerErrc::truncated_header, "manifest");
  c.manifest.assign(manifest.begin(), manifest.end());
  const auto count = r.le<std::uint32_t>(ContainerErrc::truncated_header, "tensor count");

  std::set<std::string> seen;
  for (std::uint32_t n = 0; n < count; ++n) {
    const auto name_len = r.le<std::uint16_t>(ContainerErrc::truncated_header, "tensor name length");
    const auto name_bytes = r.take(name_len, ContainerErrc::truncated_header, "tensor name");
    std::string name(name_bytes.begin(), name_bytes.end());
    if (!seen.insert(name).second) throw ContainerError(ContainerErrc::duplicate_name, "tensor '" + name + "'");

    const auto dtype_byte = r.le<std::uint8_t>(ContainerErrc::truncated_header, "dtype");
    if (dtype_byte > 1) {
      throw ContainerError(ContainerErrc::bad_dtype,
                           "tensor '" + name + "' has dtype code " + std::to_string(int{dtype_byte}));
    }
    const auto dtype = static_cast<DType>(dtype_byte);
    const auto ndim = r.le<std::uint8_t>(ContainerErrc::truncated_header, "ndim");
    if (ndim == 0) throw ContainerError(ContainerErrc::bad_shape, "tensor '" + name + "' has no axes");
    Shape dims(ndim);
    for (auto& d : dims) {
      d = r.le<std::uint32_t>(ContainerErrc::truncated_header, "dims");
      if (d == 0) throw ContainerError(ContainerErrc::bad_shape, "tensor '" + name + "' has a zero extent");
    }
    const std::size_t width = dtype == DType::f32 ? 4 : 8;
    // Accumulate the volume with a running bound so huge extents cannot wrap.
    const std::size_t limit = r.remaining() / width;
    std::size_t elems = 1;
    bool too_large = false;
    for (const auto d : dims) {
      too_large = too_large || d > limit || elems > limit / d;
      if (!too_large) elems *= d;
    }
    if (too_large) {
      throw ContainerError(ContainerErrc::payload_length_mismatch,
                           "tensor '" + name + "' of shape " + shape_to_string(dims) + " needs more than the " +
                               std::to_string(r.remaining()) + " bytes that remain");
    }
    std::vector<double> data(elems);
    const auto payload = r.take(elems * width, ContainerErrc::payload_length_mismatch, "payload");
    for (std::size_t e = 0; e < elems; ++e) {
      const std::uint8_t* p = payload.data() + e * width;
      if (width == 4) {
        std::uint32_t bits = 0;
        for (std::size_t b = 0; b < 4; ++b) bits |= std::uint32_t{p[b]} << (8 * b);
        data[e] = static_cast<double>(std::bit_cast<float>(bits));
      } else {
        std::uint64_t bits = 0;
        for (std::size_t b = 0; b < 8; ++b) bits |= std::uint64_t{p[b]} << (8 * b);
        data[e] = std::bit_cast<double>(bits);
      }
    }
    c.tensors.push_back({std::move(name), DenseTensor(std::move(dims), std::move(data), dtype)});
  }
  if (r.remaining() != 0) {
    throw ContainerError(ContainerErrc::trailing_bytes, std::to_string(r.remaining()) + " bytes after the last tensor");
  }
  return c;
}

void write_container(const std::filesystem::path& path, const Container& c) {
  const auto bytes = encode_container(c);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading " + path.string());
  return decode_container(bytes);
}

std::string factor_tensor_name(std::string_view layer, std::string_view part) {
  return std::string(layer) + "." + std::string(part);
}

void store_factors(Container& c, std::string_view layer, const TuckerFactors& factors, DType dtype) {
  factors.validate();
  DenseTensor u_in({factors.u_in.rows(), factors.u_in.cols()},
                   std::vector<double>(factors.u_in.data().begin(), factors.u_in.data().end()), dtype);
  DenseTensor core = factors.core;
  core.set_dtype(dtype);
  DenseTensor u_out({factors.u_out.rows(), factors.u_out.cols()},
                    std::vector<double>(factors.u_out.data().begin(), factors.u_out.data().end()), dtype);
  c.add(factor_tensor_name(layer, "u_in"), std::move(u_in));
  c.add(factor_tensor_name(layer, "core"), std::move(core));
  c.add(factor_tensor_name(layer, "u_out"), std::move(u_out));
}

TuckerFactors load_factors(const Container& c, std::string_view layer) {
  const DenseTensor* u_in = c.find(factor_tensor_name(layer, "u_in"));
  const DenseTensor* core = c.find(factor_tensor_name(layer, "core"));
  const DenseTensor* u_out = c.find(factor_tensor_name(layer, "u_out"));
  if (u_in == nullptr || core == nullptr || u_out == nullptr) {
    throw ValidationError("layer '" + std::string(layer) + "' is missing one of its factor tensors");
  }
  if (u_in->rank() != 2 || u_out->rank() != 2 || core->rank() != 5) {
    throw ValidationError("layer '" + std::string(layer) + "' factor tensors have the wrong number of axes");
  }
  auto to_matrix = [](const DenseTensor& t) {
    return Matrix(t.dim(0), t.dim(1), std::vector<double>(t.data().begin(), t.data().end()));
  };
  TuckerFactors f{*core, to_matrix(*u_out), to_matrix(*u_in)};
  f.core.set_dtype(DType::f64);
  try {
    f.validate();
  } catch (const ValidationError& e) {
    throw ValidationError("layer '" + std::string(layer) + "': " + e.what());
  }
  return f;
}

}  // namespace tuckerforge
