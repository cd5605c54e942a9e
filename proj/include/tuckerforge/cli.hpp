// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tuckerforge/tensor.hpp"

namespace tuckerforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

struct CommandConfig {
  std::string subcommand;
  std::filesystem::path input;
  std::filesystem::path output;
  std::filesystem::path original;
  std::filesystem::path arch;
  std::string layer;

  std::vector<double> dfs{0.5};
  std::size_t min_rank = 8;
  bool hooi = false;
  std::size_t hooi_iters = 20;
  double hooi_tol = 1e-6;
  bool include_pointwise = false;
  bool include_transposed = false;
  bool exclude_transposed = false;  // analyze counts transposed layers unless told not to
  bool flops_double = false;

  std::vector<std::size_t> grid_to;
  std::vector<std::size_t> grid_ti;

  double fraction = 0.5;

  std::size_t runs = 10;
  std::size_t warmup = 3;
  std::size_t threads = 1;
  std::size_t channels = 256;
  std::size_t spatial = 32;
  std::size_t kernel = 3;

  std::uint64_t seed = 0;
  std::size_t max_extent = 16;
  double tolerance = 1e-9;
  DType dtype = DType::f64;

  std::string format = "table";

  void validate() const;
};

/// Thrown by parse() for --help and --version.
struct HelpRequested {
  std::string text;
};

/// Parses argv. Parse errors surface as CLI::ParseError; use main() for the
/// full behaviour.
CommandConfig parse(int argc, const char* const* argv);

int run(const CommandConfig& config, std::ostream& out, std::ostream& err);

/// parse + run with exit-code mapping.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tuckerforge::cli
