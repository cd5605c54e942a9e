// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "tuckerforge/cost.hpp"
#include "tuckerforge/errors.hpp"

namespace tf = tuckerforge;

namespace {

tf::LayerDesc layer(std::string name, std::size_t o, std::size_t i, std::size_t k, tf::Triple in,
                    tf::ConvSpec spec = {}) {
  tf::LayerDesc l;
  l.name = std::move(name);
  l.out_channels = o;
  l.in_channels = i;
  l.kernel = {k, k, k};
  l.spec = spec;
  l.input_dims = in;
  l.kind = k == 1 ? tf::LayerKind::pointwise : tf::LayerKind::conv3d;
  return l;
}

}  // namespace

TEST(Params, Direct) {
  EXPECT_EQ(tf::params_direct(layer("a", 64, 32, 3, {8, 8, 8})), 55296u);
  EXPECT_EQ(tf::params_direct(layer("b", 8, 8, 1, {8, 8, 8})), 64u);
  EXPECT_EQ(tf::params_direct(layer("c", 1, 1, 1, {1, 1, 1})), 1u);
}

TEST(Params, Tucker) {
  EXPECT_EQ(tf::params_tucker(layer("a", 64, 32, 3, {8, 8, 8}), {32, 16}), 16384u);
  // Full rank costs 2C² more than the dense layer.
  const auto full = layer("f", 20, 20, 3, {8, 8, 8});
  EXPECT_EQ(tf::params_tucker(full, {20, 20}), tf::params_direct(full) + 2 * 20 * 20);
  const auto big = layer("big", 320, 320, 3, {8, 8, 8});
  EXPECT_EQ(tf::params_direct(big), 2764800u);
  EXPECT_EQ(tf::params_tucker(big, {160, 160}), 793600u);
  EXPECT_THROW(tf::params_tucker(big, {321, 10}), tf::ValidationError);
}

TEST(Flops, Direct) {
  EXPECT_EQ(tf::flops_direct(layer("a", 2, 2, 1, {2, 2, 2})), 32u);
  const auto base = layer("b", 3, 5, 3, {6, 6, 6}, {{1, 1, 1}, {1, 1, 1}});
  auto taller = base;
  taller.input_dims[0] = 12;
  EXPECT_EQ(tf::flops_direct(taller), 2 * tf::flops_direct(base));
}

TEST(Flops, Tucker) {
  const auto l = layer("a", 4, 4, 1, {2, 2, 2});
  EXPECT_EQ(tf::flops_tucker(l, {2, 2}), 160u);
  EXPECT_EQ(tf::flops_direct(l), 128u);
  // Full rank: direct plus both projection terms.
  const auto m = layer("m", 6, 5, 3, {7, 7, 7}, {{2, 2, 2}, {1, 1, 1}});
  const std::uint64_t out = 4 * 4 * 4;
  EXPECT_EQ(tf::flops_tucker(m, {6, 5}), tf::flops_direct(m) + 5 * 5 * 343 + 6 * 6 * out);
}

TEST(Flops, TransposedLayer) {
  tf::LayerDesc up = layer("up", 32, 64, 2, {4, 4, 4}, {{2, 2, 2}, {0, 0, 0}});
  up.kind = tf::LayerKind::convtranspose3d;
  EXPECT_EQ(up.output_dims(), (tf::Triple{8, 8, 8}));
  // Every input voxel scatters an O·I·K³ block.
  EXPECT_EQ(tf::flops_direct(up), 32u * 64 * 8 * 64);
  EXPECT_EQ(tf::flops_tucker(up, {16, 32}), 32u * 64 * 64 + 16u * 32 * 8 * 64 + 32u * 16 * 512);
}

TEST(CompressionRatio, Values) {
  EXPECT_DOUBLE_EQ(tf::compression_ratio(55296, 16384), 3.375);
  EXPECT_DOUBLE_EQ(tf::compression_ratio(10, 10), 1.0);
  EXPECT_THROW(tf::compression_ratio(10, 0), tf::ValidationError);
}

TEST(Analyze, SingleLayerEqualsFormulas) {
  tf::ArchDesc arch{"one", {layer("c", 64, 32, 3, {16, 16, 16}, {{1, 1, 1}, {1, 1, 1}})}};
  const tf::CostReport r = tf::analyze_arch(arch, {0.5, 8}, {});
  ASSERT_EQ(r.layers.size(), 1u);
  EXPECT_EQ(r.params_original, 55296u);
  EXPECT_EQ(r.params_tucker, 16384u);
  EXPECT_EQ(r.flops_original, tf::flops_direct(arch.layers[0]));
  EXPECT_EQ(r.flops_tucker, tf::flops_tucker(arch.layers[0], {32, 16}));
  EXPECT_DOUBLE_EQ(r.compression_ratio(), 3.375);
}

TEST(Analyze, LayerLevelReductionAt320Channels) {
  tf::ArchDesc arch{"big", {layer("c", 320, 320, 3, {8, 8, 8}, {{1, 1, 1}, {1, 1, 1}})}};
  const tf::CostReport r = tf::analyze_arch(arch, {0.5, 8}, {});
  EXPECT_NEAR(r.param_reduction(), 1.0 - 793600.0 / 2764800.0, 1e-15);
  EXPECT_NEAR(r.param_reduction() * 100.0, 71.30, 0.005);
}

TEST(Analyze, FullRankIsOverhead) {
  tf::ArchDesc arch{"x", {layer("a", 16, 16, 3, {8, 8, 8}, {{1, 1, 1}, {1, 1, 1}}), layer("b", 24, 16, 3, {8, 8, 8})}};
  const tf::CostReport r = tf::analyze_arch(arch, {1.0, 8}, {});
  EXPECT_LT(r.param_reduction(), 0.0);
  EXPECT_LT(r.flop_reduction(), 0.0);
}

TEST(Analyze, CompressionBoundedByChannelRatio) {
  std::mt19937_64 gen(71);
  std::uniform_int_distribution<std::size_t> ch(8, 300);
  for (int trial = 0; trial < 50; ++trial) {
    const auto l = layer("l", ch(gen), ch(gen), 3, {8, 8, 8});
    for (double df : {0.9, 0.5, 0.2, 0.05}) {
      const tf::TuckerRanks t = tf::select_ranks({df, 8}, l.out_channels, l.in_channels);
      const double cr = tf::compression_ratio(tf::params_direct(l), tf::params_tucker(l, t));
      EXPECT_LT(cr, double(l.out_channels * l.in_channels) / double(t.out * t.in));
    }
  }
}

TEST(Analyze, TotalsAreSumsAndOrderInvariant) {
  std::mt19937_64 gen(72);
  tf::ArchDesc arch{"x", {}};
  for (int n = 0; n < 8; ++n) {
    arch.layers.push_back(layer("l" + std::to_string(n), 4 + 13 * n, 3 + 7 * n, n % 3 == 0 ? 1 : 3, {10, 9, 8}));
  }
  const tf::CostReport a = tf::analyze_arch(arch, {0.3, 8}, {true, false});
  std::uint64_t p = 0, f = 0;
  for (const auto& l : a.layers) {
    p += l.params_tucker;
    f += l.flops_tucker;
  }
  EXPECT_EQ(p, a.params_tucker);
  EXPECT_EQ(f, a.flops_tucker);
  std::shuffle(arch.layers.begin(), arch.layers.end(), gen);
  const tf::CostReport b = tf::analyze_arch(arch, {0.3, 8}, {true, false});
  EXPECT_EQ(a.params_original, b.params_original);
  EXPECT_EQ(a.params_tucker, b.params_tucker);
  EXPECT_EQ(a.flops_original, b.flops_original);
  EXPECT_EQ(a.flops_tucker, b.flops_tucker);
}

TEST(Analyze, EligibilityFlags) {
  tf::LayerDesc up = layer("up", 8, 16, 2, {4, 4, 4}, {{2, 2, 2}, {0, 0, 0}});
  up.kind = tf::LayerKind::convtranspose3d;
  tf::ArchDesc arch{"x", {layer("pw", 32, 32, 1, {4, 4, 4}), up}};
  const auto none = tf::analyze_arch(arch, {0.5, 8}, {false, false});
  EXPECT_FALSE(none.layers[0].decomposed);
  EXPECT_FALSE(none.layers[1].decomposed);
  EXPECT_TRUE(none.layers[1].approximate);
  const auto all = tf::analyze_arch(arch, {0.5, 8}, {true, true});
  EXPECT_TRUE(all.layers[0].decomposed);
  EXPECT_TRUE(all.layers[0].pointwise);
  EXPECT_TRUE(all.layers[1].decomposed);
}

TEST(Analyze, BundledUnetLikeArchitecture) {
  const tf::ArchDesc arch = tf::load_arch(TUCKERFORGE_DATA_DIR "/arch/unet_like.json");
  const tf::Eligibility eligibility{false, true};
  const tf::CostReport half = tf::analyze_arch(arch, {0.5, 8}, eligibility);
  EXPECT_GE(half.param_reduction(), 0.68);
  EXPECT_LE(half.param_reduction(), 0.72);
  const tf::CostReport fifth = tf::analyze_arch(arch, {0.2, 8}, eligibility);
  EXPECT_GE(fifth.flop_reduction(), 0.85);
  EXPECT_LE(fifth.flop_reduction(), 0.94);
}

TEST(Reports, JsonAndTable) {
  tf::ArchDesc arch{"m", {layer("c", 64, 32, 3, {16, 16, 16}, {{1, 1, 1}, {1, 1, 1}})}};
  const tf::CostReport r = tf::analyze_arch(arch, {0.5, 8}, {});
  const auto j = tf::to_json(r);
  EXPECT_EQ(j.at("total").at("params_tucker"), 16384u);
  EXPECT_EQ(tf::to_json(r, 2).at("total").at("flops_original"), 2 * r.flops_original);
  const std::string table = tf::format_table(r);
  EXPECT_NE(table.find("M-param."), std::string::npos);
  EXPECT_NE(table.find("G-FLOPs"), std::string::npos);
  EXPECT_NE(table.find("CR"), std::string::npos);
  const std::vector<tf::CostReport> sweep{r, tf::analyze_arch(arch, {0.2, 8}, {})};
  EXPECT_NE(tf::format_sweep_table(sweep).find("DF 0.20"), std::string::npos);
}

TEST(ArchJson, RoundTripAndValidation) {
  const auto j = nlohmann::json::parse(R"({"model": "m", "layers": [
    {"name": "a", "kind": "conv3d", "in_channels": 4, "out_channels": 8, "kernel": [3,3,3],
     "stride": [1,1,1], "padding": [1,1,1], "input_dims": [8,8,8], "bias": true}]})");
  const tf::ArchDesc arch = tf::arch_from_json(j);
  ASSERT_EQ(arch.layers.size(), 1u);
  EXPECT_TRUE(arch.layers[0].bias);
  EXPECT_EQ(tf::arch_from_json(tf::to_json(arch)).layers[0].output_dims(), (tf::Triple{8, 8, 8}));

  auto bad = j;
  bad["layers"][0]["padding_mode"] = "reflect";
  EXPECT_THROW(tf::arch_from_json(bad), tf::ValidationError);
  bad = j;
  bad["layers"][0].erase("input_dims");
  EXPECT_THROW(tf::arch_from_json(bad), tf::ValidationError);
  bad = j;
  bad["layers"].push_back(j["layers"][0]);
  EXPECT_THROW(tf::arch_from_json(bad), tf::ValidationError);
  bad = j;
  bad["layers"][0]["input_dims"] = {1, 8, 8};
  bad["layers"][0]["padding"] = {0, 0, 0};
  EXPECT_THROW(tf::arch_from_json(bad), tf::ValidationError);
  bad = j;
  bad["layers"][0]["kind"] = "conv2d";
  EXPECT_THROW(tf::arch_from_json(bad), tf::ValidationError);
  EXPECT_THROW(tf::load_arch("/nonexistent/arch.json"), tf::IoError);
}
