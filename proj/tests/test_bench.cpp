// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <thread>

#include "tuckerforge/bench.hpp"
#include "tuckerforge/errors.hpp"

namespace tf = tuckerforge;

namespace {

void spin_for(std::chrono::microseconds d) {
  const auto until = std::chrono::steady_clock::now() + d;
  while (std::chrono::steady_clock::now() < until) {
  }
}

}  // namespace

TEST(Bench, SingleRunHasZeroStd) {
  const tf::BenchResult r = tf::time_forward("x", [] { spin_for(std::chrono::microseconds(200)); }, {1, 0});
  EXPECT_EQ(r.runs, 1u);
  EXPECT_EQ(r.std_ms, 0.0);
  EXPECT_GT(r.mean_ms, 0.0);
}

TEST(Bench, WarmupAndRunCounts) {
  int calls = 0;
  int prepares = 0;
  const tf::BenchResult r = tf::time_forward("x", [&] { ++calls; }, {5, 2}, [&] { ++prepares; });
  EXPECT_EQ(calls, 7);
  EXPECT_EQ(prepares, 7);
  EXPECT_EQ(r.runs, 5u);
  EXPECT_GE(r.std_ms, 0.0);
  EXPECT_THROW(tf::time_forward("x", [] {}, {0, 0}), tf::ValidationError);
}

TEST(Bench, SpeedupRatio) {
  tf::BenchResult base, cand;
  base.mean_ms = 200.0;
  cand.mean_ms = 100.0;
  EXPECT_DOUBLE_EQ(tf::speedup(base, cand), 2.0);
  EXPECT_DOUBLE_EQ(tf::speedup(base, base), 1.0);
  EXPECT_LT(tf::speedup(cand, base), 1.0);
  cand.mean_ms = 0.0;
  EXPECT_THROW(tf::speedup(base, cand), tf::ValidationError);
}

TEST(Bench, PreparationCostIsNotTimed) {
  const auto forward = [] { spin_for(std::chrono::milliseconds(2)); };
  const tf::BenchResult cheap = tf::time_forward("a", forward, {5, 1}, [] { spin_for(std::chrono::milliseconds(2)); });
  const tf::BenchResult costly =
      tf::time_forward("b", forward, {5, 1}, [] { spin_for(std::chrono::milliseconds(4)); });
  // Doubling the untimed preparation leaves the mean at the forward cost.
  EXPECT_NEAR(costly.mean_ms, cheap.mean_ms, 1.0);
  EXPECT_LT(costly.mean_ms, 3.5);
}

TEST(Bench, CsvColumns) {
  tf::BenchResult base{"direct[t=1]", NAN, 3, 10.0, 0.5, 1.0};
  tf::BenchResult cand{"tucker-df0.10[t=1]", 0.1, 3, 5.0, 0.25, 2.0};
  const std::vector<tf::BenchResult> rows{base, cand};
  EXPECT_EQ(tf::bench_csv(rows),
            "label,df,runs,mean_ms,std_ms,speedup\n"
            "direct[t=1],,3,10.0000,0.5000,1.0000\n"
            "tucker-df0.10[t=1],0.1,3,5.0000,0.2500,2.0000\n");
}

TEST(Bench, LayerBenchProducesBaselineAndCandidates) {
  tf::LayerBenchConfig config;
  config.channels = 16;
  config.spatial = 6;
  config.dfs = {0.5, 1.0};
  config.options = {2, 1};
  const auto results = tf::bench_layer(config);
  ASSERT_EQ(results.size(), 3u);
  EXPECT_EQ(results[0].label, "direct[t=1]");
  EXPECT_TRUE(std::isnan(results[0].df));
  EXPECT_EQ(results[0].speedup, 1.0);
  EXPECT_EQ(results[1].label, "tucker-df0.50[t=1]");
  EXPECT_DOUBLE_EQ(results[1].speedup, results[0].mean_ms / results[1].mean_ms);
  EXPECT_EQ(results[2].df, 1.0);
}
