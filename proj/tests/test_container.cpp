// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <set>
#include <unistd.h>

#include "support.hpp"
#include "tuckerforge/container.hpp"
#include "tuckerforge/errors.hpp"
#include "tuckerforge/tucker.hpp"

namespace tf = tuckerforge;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("tuckerforge_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Container, EmptyContainerIsSixteenBytes) {
  const auto bytes = tf::encode_container(tf::Container{});
  EXPECT_EQ(bytes.size(), 16u);
  EXPECT_EQ(bytes, read_bytes(TUCKERFORGE_TEST_DATA_DIR "/empty_v1.tkwt"));
  EXPECT_EQ(tf::decode_container(bytes), tf::Container{});
}

TEST(Container, GoldenFileDecodesAndReencodes) {
  const auto golden = read_bytes(TUCKERFORGE_TEST_DATA_DIR "/golden_v1.tkwt");
  const tf::Container c = tf::decode_container(golden);
  EXPECT_EQ(c.version, 1u);
  EXPECT_EQ(c.manifest, R"({"model":"golden"})");
  ASSERT_EQ(c.tensors.size(), 3u);
  EXPECT_EQ(c.tensors[0].name, "conv.weight");
  EXPECT_EQ(c.tensors[0].tensor,
            tf::DenseTensor({2, 1, 1, 1, 2}, std::vector<double>{1.0, -2.5, 0.125, 3.0}, tf::DType::f64));
  EXPECT_EQ(c.tensors[1].tensor, tf::DenseTensor({2}, std::vector<double>{0.5, -0.25}, tf::DType::f32));
  EXPECT_TRUE(std::isinf(c.tensors[2].tensor[0]));
  EXPECT_EQ(tf::encode_container(c), golden);
}

TEST(Container, EncodingMatchesIndependentByteBuilder) {
  tf::Container c;
  c.manifest = "{}";
  c.add("t", tf::DenseTensor({2}, std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(tf::encode_container(c), support::Bytes{}.header("{}", 1).tensor_f64("t", {2}, {1.0, 2.0}).data);
}

TEST(Container, RandomRoundTrips) {
  std::mt19937_64 gen(81);
  for (int trial = 0; trial < 100; ++trial) {
    const tf::Container c = support::random_container(gen);
    const auto bytes = tf::encode_container(c);
    const tf::Container back = tf::decode_container(bytes);
    ASSERT_EQ(back, c) << "trial " << trial;
    ASSERT_EQ(tf::encode_container(back), bytes);
  }
}

TEST(Container, FileRoundTrip) {
  std::mt19937_64 gen(82);
  const tf::Container c = support::random_container(gen);
  const fs::path path = temp_path("roundtrip.tkwt");
  tf::write_container(path, c);
  EXPECT_EQ(tf::read_container(path), c);
  fs::remove(path);
}

TEST(Container, EachMalformationHasItsOwnDiagnostic) {
  std::set<std::string> messages;
  for (const auto& [code, bytes] : support::malformed_containers()) {
    try {
      tf::decode_container(bytes);
      ADD_FAILURE() << "accepted malformed container: " << tf::to_string(code);
    } catch (const tf::ContainerError& e) {
      EXPECT_EQ(e.code(), code) << e.what();
      EXPECT_EQ(std::string(e.what()).rfind(std::string(tf::to_string(code)), 0), 0u) << e.what();
      messages.insert(std::string(tf::to_string(e.code())));
    }
  }
  EXPECT_EQ(messages.size(), support::malformed_containers().size());
  EXPECT_TRUE(messages.count("bad magic"));
  EXPECT_TRUE(messages.count("payload length mismatch"));
}

TEST(Container, HugeDeclaredExtentsAreRejected) {
  const auto bytes = support::Bytes{}
                         .header("", 1)
                         .le<std::uint16_t>(1)
                         .raw("t")
                         .le<std::uint8_t>(1)
                         .le<std::uint8_t>(4)
                         .le<std::uint32_t>(0xffffffffu)
                         .le<std::uint32_t>(0xffffffffu)
                         .le<std::uint32_t>(0xffffffffu)
                         .le<std::uint32_t>(0xffffffffu)
                         .data;
  try {
    tf::decode_container(bytes);
    FAIL();
  } catch (const tf::ContainerError& e) {
    EXPECT_EQ(e.code(), tf::ContainerErrc::payload_length_mismatch);
  }
}

TEST(Container, WriterRejectsInvalidContainers) {
  tf::Container dup;
  dup.tensors.push_back({"a", tf::DenseTensor()});
  dup.tensors.push_back({"a", tf::DenseTensor()});
  EXPECT_THROW(tf::encode_container(dup), tf::ContainerError);
  tf::Container long_name;
  long_name.tensors.push_back({std::string(70000, 'x'), tf::DenseTensor()});
  try {
    tf::encode_container(long_name);
    FAIL();
  } catch (const tf::ContainerError& e) {
    EXPECT_EQ(e.code(), tf::ContainerErrc::name_too_long);
  }
  tf::Container c;
  EXPECT_THROW(c.add("x", tf::DenseTensor()); c.add("x", tf::DenseTensor()), tf::ValidationError);
}

TEST(Container, NarrowingToF32IsAppliedAndFlagged) {
  std::mt19937_64 gen(83);
  std::normal_distribution<double> dist;
  std::vector<double> values(10);
  for (auto& v : values) v = dist(gen);
  tf::Container c;
  c.manifest = R"({"model":"m"})";
  c.add("exact", tf::DenseTensor({2}, std::vector<double>{0.5, 2.0}, tf::DType::f32));
  c.add("lossy", tf::DenseTensor({10}, values, tf::DType::f32));
  const tf::Container back = tf::decode_container(tf::encode_container(c));
  for (std::size_t i = 0; i < values.size(); ++i) {
    EXPECT_EQ(back.find("lossy")->data()[i], static_cast<double>(static_cast<float>(values[i])));
  }
  const auto manifest = nlohmann::json::parse(back.manifest);
  EXPECT_EQ(manifest.at("model"), "m");
  EXPECT_EQ(manifest.at(std::string(tf::kLossyNarrowingKey)), nlohmann::json::array({"lossy"}));
}

TEST(Container, IoFailuresAreIoErrors) {
  EXPECT_THROW(tf::read_container("/nonexistent/dir/file.tkwt"), tf::IoError);
  EXPECT_THROW(tf::write_container("/nonexistent/dir/file.tkwt", tf::Container{}), tf::IoError);
}

TEST(Container, FactorsRoundTrip) {
  std::mt19937_64 gen(84);
  std::normal_distribution<double> dist;
  std::vector<double> values(6 * 5 * 27);
  for (auto& v : values) v = dist(gen);
  const tf::ConvKernel k(tf::DenseTensor({6, 5, 3, 3, 3}, values));
  const tf::TuckerFactors f = tf::hosvd_partial(k, {3, 2});
  tf::Container c;
  tf::store_factors(c, "enc.conv", f);
  ASSERT_NE(c.find("enc.conv.u_in"), nullptr);
  ASSERT_NE(c.find("enc.conv.core"), nullptr);
  ASSERT_NE(c.find("enc.conv.u_out"), nullptr);
  EXPECT_EQ(tf::load_factors(tf::decode_container(tf::encode_container(c)), "enc.conv"), f);
}

TEST(Container, LoaderChecksRankConsistency) {
  tf::Container c;
  c.add("l.u_in", tf::DenseTensor({5, 2}));
  c.add("l.core", tf::DenseTensor({3, 3, 1, 1, 1}));
  c.add("l.u_out", tf::DenseTensor({6, 3}));
  EXPECT_THROW(tf::load_factors(c, "l"), tf::ValidationError);
  EXPECT_THROW(tf::load_factors(c, "missing"), tf::ValidationError);
}
