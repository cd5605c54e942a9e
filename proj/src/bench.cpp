// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "tuckerforge/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tuckerforge/errors.hpp"
#include "tuckerforge/rng.hpp"

namespace tuckerforge {

BenchResult time_forward(std::string label, const std::function<void()>& forward, const BenchOptions& options,
                         const std::function<void()>& prepare) {
  if (options.runs < 1) throw ValidationError("benchmark needs at least one timed run");
  using clock = std::chrono::steady_clock;
  for (std::size_t i = 0; i < options.warmup; ++i) {
    if (prepare) prepare();
    forward();
  }
  std::vector<double> samples;
  samples.reserve(options.runs);
  for (std::size_t i = 0; i < options.runs; ++i) {
    if (prepare) prepare();
    const auto t0 = clock::now();
    forward();
    const auto t1 = clock::now();
    samples.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }

  double sum = 0.0;
  for (double s : samples) sum += s;
  const double mean = sum / static_cast<double>(samples.size());
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  const double stddev = samples.size() > 1 ? std::sqrt(var / static_cast<double>(samples.size() - 1)) : 0.0;

  BenchResult result;
  result.label = std::move(label);
  result.runs = options.runs;
  result.mean_ms = mean;
  result.std_ms = stddev;
  return result;
}

double speedup(const BenchResult& baseline, const BenchResult& candidate) {
  if (!(candidate.mean_ms > 0.0)) throw ValidationError("speedup undefined for a zero mean time");
  return baseline.mean_ms / candidate.mean_ms;
}

std::string bench_csv(std::span<const BenchResult> results) {
  std::ostringstream os;
  os << "label,df,runs,mean_ms,std_ms,speedup\n";
  char line[256];
  for (const auto& r : results) {
    std::string df;
    if (!std::isnan(r.df)) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", r.df);
      df = buf;
    }
    std::snprintf(line, sizeof line, "%s,%s,%zu,%.4f,%.4f,%.4f\n", r.label.c_str(), df.c_str(), r.runs, r.mean_ms,
                  r.std_ms, r.speedup);
    os << line;
  }
  return os.str();
}

std::vector<BenchResult> bench_layer(const LayerBenchConfig& config) {
  const std::size_t c = config.channels;
  const std::size_t k = config.kernel;
  const Triple input{config.spatial, config.spatial, config.spatial};
  Xoshiro256 rng(config.seed);
  const ConvKernel kernel(random_tensor({c, c, k, k, k}, rng));
  const FeatureMap x(random_tensor({c, config.spatial, config.spatial, config.spatial}, rng));
  const ExecOptions exec{config.threads, nullptr};
  const std::string suffix = "[t=" + std::to_string(config.threads) + "]";

  std::vector<BenchResult> results;
  {
    DirectConv direct(kernel, config.spec, input);
    FeatureMap y = direct.make_output();
    results.push_back(time_forward("direct" + suffix, [&] { direct.run(x, y, exec); }, config.options));
  }
  for (double df : config.dfs) {
    const RankPolicy policy{df, config.min_rank};
    const TuckerFactors factors = hosvd_partial(kernel, select_ranks(policy, c, c));
    TuckerConv tucker(factors, config.spec, input);
    FeatureMap y = tucker.make_output();
    char label[64];
    std::snprintf(label, sizeof label, "tucker-df%.2f", df);
    BenchResult r = time_forward(label + suffix, [&] { tucker.run(x, y, exec); }, config.options);
    r.df = df;
    r.speedup = speedup(results.front(), r);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace tuckerforge
