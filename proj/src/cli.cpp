// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "tuckerforge/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "tuckerforge/bench.hpp"
#include "tuckerforge/container.hpp"
#include "tuckerforge/cost.hpp"
#include "tuckerforge/errors.hpp"
#include "tuckerforge/model.hpp"
#include "tuckerforge/prune.hpp"
#include "tuckerforge/tucker.hpp"

namespace tuckerforge::cli {

namespace {

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::size_t threads_from_env() {
  const char* env = std::getenv("TUCKERFORGE_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long long n = std::strtoll(env, &end, 10);
  if (*end != '\0' || n < 1) throw ValidationError(std::string("TUCKERFORGE_THREADS must be a positive integer, got '") + env + "'");
  return static_cast<std::size_t>(n);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

void emit(const CommandConfig& config, std::ostream& out, const std::string& text) {
  if (config.output.empty()) {
    out << text;
  } else {
    write_text(config.output, text);
  }
}

int run_synth(const CommandConfig& c, std::ostream& out) {
  const ArchDesc arch = load_arch(c.arch);
  write_container(c.output, synthesize_model(arch, c.seed, c.dtype));
  out << "wrote " << arch.layers.size() << " layers to " << c.output.string() << "\n";
  return kExitOk;
}

int run_compress(const CommandConfig& c, std::ostream& out) {
  const Container original = read_container(c.input);
  CompressOptions options;
  options.policy = {c.dfs.front(), c.min_rank};
  options.eligibility = {c.include_pointwise, c.include_transposed};
  options.hooi = c.hooi;
  options.hooi_options = {c.hooi_iters, c.hooi_tol};
  options.threads = c.threads;
  std::vector<CompressedLayer> summary;
  const Container compressed = compress_model(original, options, &summary);
  write_container(c.output, compressed);

  if (c.format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : summary) {
      j.push_back({{"name", s.name},
                   {"t_o", s.ranks.out},
                   {"t_i", s.ranks.in},
                   {"explained_variance", s.explained_variance},
                   {"params_original", s.params_original},
                   {"params_tucker", s.params_tucker}});
    }
    out << j.dump(2) << "\n";
    return kExitOk;
  }
  std::uint64_t before = 0;
  std::uint64_t after = 0;
  out << "layer                      t_o   t_i         EV      params     factored\n";
  for (const auto& s : summary) {
    char line[160];
    std::snprintf(line, sizeof line, "%-24s %5zu %5zu %10.6f %11llu %12llu%s\n", s.name.c_str(), s.ranks.out, s.ranks.in,
                  s.explained_variance, static_cast<unsigned long long>(s.params_original),
                  static_cast<unsigned long long>(s.params_tucker), s.pointwise ? "  (pointwise)" : "");
    out << line;
    before += s.params_original;
    after += s.params_tucker;
  }
  out << "factorized " << summary.size() << " layers: " << before << " -> " << after << " kernel parameters\n";
  return kExitOk;
}

int run_analyze(const CommandConfig& c, std::ostream& out) {
  ArchDesc arch;
  if (!c.arch.empty()) {
    arch = load_arch(c.arch);
  } else {
    arch = parse_manifest(read_container(c.input).manifest).arch;
  }
  const Eligibility eligibility{c.include_pointwise, !c.exclude_transposed};
  const std::uint64_t scale = c.flops_double ? 2 : 1;
  std::vector<CostReport> reports;
  for (double df : c.dfs) reports.push_back(analyze_arch(arch, RankPolicy{df, c.min_rank}, eligibility));

  if (c.format == "json") {
    nlohmann::json j;
    if (reports.size() == 1) {
      j = to_json(reports.front(), scale);
    } else {
      j = nlohmann::json::array();
      for (const auto& r : reports) j.push_back(to_json(r, scale));
    }
    emit(c, out, j.dump(2) + "\n");
  } else if (reports.size() == 1) {
    emit(c, out, format_table(reports.front(), scale));
  } else {
    emit(c, out, format_sweep_table(reports, scale));
  }
  return kExitOk;
}

int run_verify(const CommandConfig& c, std::ostream& out) {
  const Container original = read_container(c.original);
  const Container compressed = read_container(c.input);
  const VerifyReport report =
      verify_model(original, compressed, VerifyOptions{c.seed, c.max_extent, c.tolerance, c.threads});

  if (c.format == "json") {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : report.layers) {
      layers.push_back({{"name", l.name},
                        {"input_dims", l.input_dims},
                        {"identity_error", l.identity_error},
                        {"approximation_error", l.approximation_error}});
    }
    const nlohmann::json j{{"layers", layers},
                           {"skipped", report.skipped},
                           {"max_identity_error", report.max_identity_error},
                           {"max_approximation_error", report.max_approximation_error},
                           {"tolerance", c.tolerance},
                           {"passed", report.passed}};
    out << j.dump(2) << "\n";
  } else {
    out << "layer                    input          identity err   approx err\n";
    for (const auto& l : report.layers) {
      char line[160];
      const std::string dims = std::to_string(l.input_dims[0]) + "x" + std::to_string(l.input_dims[1]) + "x" +
                               std::to_string(l.input_dims[2]);
      std::snprintf(line, sizeof line, "%-24s %-12s %14.3e %12.3e\n", l.name.c_str(), dims.c_str(), l.identity_error,
                    l.approximation_error);
      out << line;
    }
    for (const auto& s : report.skipped) out << s << ": transposed layer, not executed\n";
    out << "max relative error " << format_double("%.3e", report.max_identity_error) << " (tolerance "
        << format_double("%.1e", c.tolerance) << "), vs original kernels "
        << format_double("%.3e", report.max_approximation_error) << "\n";
    out << (report.passed ? "PASS" : "FAIL") << "\n";
  }
  return report.passed ? kExitOk : kExitValidation;
}

std::vector<std::size_t> full_range(std::size_t n) {
  std::vector<std::size_t> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = i + 1;
  return r;
}

int run_ev_grid(const CommandConfig& c, std::ostream& out) {
  const Container container = read_container(c.input);
  const ModelManifest manifest = parse_manifest(container.manifest);
  const LayerDesc* layer = manifest.arch.find(c.layer);
  if (layer == nullptr) throw ValidationError("no layer named '" + c.layer + "'");
  const ConvKernel kernel = load_kernel(container, *layer);
  const auto to = c.grid_to.empty() ? full_range(kernel.out_channels()) : c.grid_to;
  const auto ti = c.grid_ti.empty() ? full_range(kernel.in_channels()) : c.grid_ti;
  const Matrix grid = ev_grid(kernel, to, ti, c.threads);
  emit(c, out, ev_grid_csv(grid, to, ti));
  return kExitOk;
}

int run_prune(const CommandConfig& c, std::ostream& out) {
  Container container = read_container(c.input);
  const ModelManifest manifest = parse_manifest(container.manifest);
  const PruneSpec spec{c.fraction};
  std::uint64_t total = 0;
  std::uint64_t zeros = 0;
  std::size_t pruned_layers = 0;
  out << "layer                    channels  pruned  sparsity\n";
  for (const auto& layer : manifest.arch.layers) {
    if (!c.layer.empty() && layer.name != c.layer) continue;
    if (manifest.decomposition(layer.name) != nullptr) {
      if (!c.layer.empty()) throw ValidationError("layer '" + layer.name + "' is factorized and cannot be pruned");
      continue;
    }
    const ConvKernel kernel = load_kernel(container, layer);
    const std::size_t count = pruned_channel_count(spec, kernel.out_channels());
    ConvKernel pruned = prune_channels(kernel, spec);
    const double sparsity = zero_fraction(pruned);
    total += pruned.tensor().size();
    zeros += static_cast<std::uint64_t>(std::llround(sparsity * static_cast<double>(pruned.tensor().size())));
    DenseTensor& stored = container.tensors[static_cast<std::size_t>(
                                                std::find_if(container.tensors.begin(), container.tensors.end(),
                                                             [&](const NamedTensor& t) { return t.name == weight_name(layer.name); }) -
                                                container.tensors.begin())]
                              .tensor;
    const DType dtype = stored.dtype();
    stored = pruned.tensor();
    stored.set_dtype(dtype);
    char line[160];
    std::snprintf(line, sizeof line, "%-24s %8zu %7zu %9.4f\n", layer.name.c_str(), kernel.out_channels(), count,
                  sparsity);
    out << line;
    ++pruned_layers;
  }
  if (!c.layer.empty() && pruned_layers == 0) throw ValidationError("no layer named '" + c.layer + "'");
  write_container(c.output, container);
  const double overall = total == 0 ? 0.0 : static_cast<double>(zeros) / static_cast<double>(total);
  out << "parameter sparsity " << format_double("%.4f", overall) << " over " << pruned_layers << " layers\n";
  return kExitOk;
}

int run_bench(const CommandConfig& c, std::ostream& out) {
  LayerBenchConfig bench;
  bench.channels = c.channels;
  bench.spatial = c.spatial;
  bench.kernel = c.kernel;
  const std::size_t pad = c.kernel / 2;
  bench.spec = ConvSpec{{1, 1, 1}, {pad, pad, pad}};
  bench.dfs = c.dfs;
  bench.min_rank = c.min_rank;
  bench.seed = c.seed;
  bench.threads = c.threads;
  bench.options = {c.runs, c.warmup};
  const auto results = bench_layer(bench);
  const std::string csv = bench_csv(results);
  if (!c.output.empty()) write_text(c.output, csv);
  if (c.format == "csv") {
    out << csv;
  } else {
    out << "label                         mean ms     std ms   speedup\n";
    for (const auto& r : results) {
      char line[160];
      std::snprintf(line, sizeof line, "%-26s %10.3f %10.3f %9.3f\n", r.label.c_str(), r.mean_ms, r.std_ms,
                    r.speedup);
      out << line;
    }
  }
  return kExitOk;
}

void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace

void CommandConfig::validate() const {
  for (double df : dfs) require(df > 0.0 && df <= 1.0, "--df must lie in (0, 1], got " + format_double("%g", df));
  require(!dfs.empty(), "--df needs at least one value");
  require(min_rank >= 1, "--min-rank must be at least 1");
  require(fraction >= 0.0 && fraction <= 1.0, "--fraction must lie in [0, 1]");
  require(runs >= 1, "--runs must be at least 1");
  require(threads >= 1, "--threads must be at least 1");
  require(hooi_tol >= 0.0, "--hooi-tol must be non-negative");
  require(tolerance >= 0.0, "--tol must be non-negative");
  require(channels >= 1 && spatial >= 1 && kernel >= 1, "bench geometry must be positive");

  auto need = [](const std::filesystem::path& p, const char* flag) {
    require(!p.empty(), std::string(flag) + " is required");
  };
  auto formats = [&](std::initializer_list<const char*> allowed) {
    for (const char* f : allowed) {
      if (format == f) return;
    }
    throw ValidationError("--format '" + format + "' is not supported by " + subcommand);
  };
  if (subcommand == "synth") {
    need(arch, "--arch");
    need(output, "--out");
  } else if (subcommand == "compress") {
    need(input, "--in");
    need(output, "--out");
    require(dfs.size() == 1, "compress takes a single --df");
    formats({"table", "json"});
  } else if (subcommand == "analyze") {
    require(arch.empty() != input.empty(), "analyze needs exactly one of --arch or --in");
    formats({"table", "json"});
  } else if (subcommand == "verify") {
    need(original, "--original");
    need(input, "--compressed");
    formats({"table", "json"});
  } else if (subcommand == "ev-grid") {
    need(input, "--in");
    require(!layer.empty(), "--layer is required");
    formats({"csv"});
  } else if (subcommand == "prune") {
    need(input, "--in");
    need(output, "--out");
    formats({"table"});
  } else if (subcommand == "bench") {
    formats({"table", "csv"});
  } else {
    throw ValidationError("unknown subcommand '" + subcommand + "'");
  }
}

CommandConfig parse(int argc, const char* const* argv) {
  CommandConfig c;
  CLI::App app{"Partial Tucker compression of 3-D convolution kernels", "tuckerforge"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tuckerforge 0.1.0");

  auto add_threads = [&](CLI::App* sub) {
    auto* opt = sub->add_option("--threads", c.threads, "Worker threads (env TUCKERFORGE_THREADS)");
    opt->check(CLI::PositiveNumber);
    return opt;
  };
  std::vector<CLI::Option*> thread_opts;
  auto add_policy = [&](CLI::App* sub) {
    sub->add_option("--min-rank", c.min_rank, "Rank floor")->capture_default_str();
  };

  auto* synth = app.add_subcommand("synth", "Write a random-weight model container for an architecture");
  synth->add_option("--arch", c.arch, "Architecture JSON")->required();
  synth->add_option("--out", c.output, "Output container")->required();
  synth->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
  synth->add_option("--dtype", c.dtype, "Stored dtype")
      ->transform(CLI::CheckedTransformer(std::map<std::string, DType>{{"f32", DType::f32}, {"f64", DType::f64}}));

  auto* compress = app.add_subcommand("compress", "Factorize eligible layers of a container");
  compress->add_option("--in", c.input, "Input container")->required();
  compress->add_option("--out", c.output, "Output container")->required();
  compress->add_option("--df", c.dfs, "Decomposition factor in (0, 1]")->expected(1);
  add_policy(compress);
  compress->add_flag("--hooi", c.hooi, "Refine HOSVD factors with HOOI");
  compress->add_option("--hooi-iters", c.hooi_iters, "HOOI iteration cap")->capture_default_str();
  compress->add_option("--hooi-tol", c.hooi_tol, "HOOI explained-variance improvement threshold")->capture_default_str();
  compress->add_flag("--include-pointwise", c.include_pointwise, "Also factorize 1x1x1 layers");
  compress->add_flag("--include-transposed", c.include_transposed, "Also factorize transposed convolutions");
  compress->add_option("--format", c.format, "Summary format: table|json");
  thread_opts.push_back(add_threads(compress));

  auto* analyze = app.add_subcommand("analyze", "Parameter and FLOP report for an architecture");
  analyze->add_option("--arch", c.arch, "Architecture JSON");
  analyze->add_option("--in", c.input, "Model container (its manifest is analysed)");
  analyze->add_option("--df", c.dfs, "Decomposition factor(s)")->delimiter(',');
  add_policy(analyze);
  analyze->add_flag("--include-pointwise", c.include_pointwise, "Count 1x1x1 layers as factorized");
  analyze->add_flag("--exclude-transposed", c.exclude_transposed, "Keep transposed convolutions dense");
  analyze->add_flag("--flops-double", c.flops_double, "Report 2 FLOPs per multiply-add");
  analyze->add_option("--format", c.format, "table|json");
  analyze->add_option("--out", c.output, "Write the report to a file");

  auto* verify = app.add_subcommand("verify", "Compare factorized and direct convolution on random inputs");
  verify->add_option("--original", c.original, "Uncompressed container")->required();
  verify->add_option("--compressed", c.input, "Compressed container")->required();
  verify->add_option("--seed", c.seed, "Input RNG seed")->capture_default_str();
  verify->add_option("--max-extent", c.max_extent, "Cap on each spatial input extent (0: none)")->capture_default_str();
  verify->add_option("--tol", c.tolerance, "Maximum relative error")->capture_default_str();
  verify->add_option("--format", c.format, "table|json");
  thread_opts.push_back(add_threads(verify));

  auto* grid = app.add_subcommand("ev-grid", "Explained variance over a grid of ranks, as CSV");
  grid->add_option("--in", c.input, "Model container")->required();
  grid->add_option("--layer", c.layer, "Layer name")->required();
  grid->add_option("--grid-to", c.grid_to, "Output ranks (default 1..O)")->delimiter(',');
  grid->add_option("--grid-ti", c.grid_ti, "Input ranks (default 1..I)")->delimiter(',');
  grid->add_option("--out", c.output, "CSV file (default stdout)");
  thread_opts.push_back(add_threads(grid));

  auto* prune = app.add_subcommand("prune", "Zero the lowest-norm output channels");
  prune->add_option("--in", c.input, "Input container")->required();
  prune->add_option("--out", c.output, "Output container")->required();
  prune->add_option("--fraction", c.fraction, "Fraction of output channels to zero")->capture_default_str();
  prune->add_option("--layer", c.layer, "Only this layer");

  auto* bench = app.add_subcommand("bench", "Time direct against factorized execution of one layer");
  bench->add_option("--channels", c.channels, "Input and output channels")->capture_default_str();
  bench->add_option("--spatial", c.spatial, "Cubic input extent")->capture_default_str();
  bench->add_option("--kernel", c.kernel, "Cubic kernel extent")->capture_default_str();
  bench->add_option("--df", c.dfs, "Decomposition factor(s)")->delimiter(',');
  add_policy(bench);
  bench->add_option("--runs", c.runs, "Timed passes")->capture_default_str();
  bench->add_option("--warmup", c.warmup, "Untimed passes")->capture_default_str();
  bench->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
  bench->add_option("--out", c.output, "CSV file");
  bench->add_option("--format", c.format, "table|csv");
  thread_opts.push_back(add_threads(bench));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::CallForVersion&) {
    throw HelpRequested{app.version() + "\n"};
  }
  c.subcommand = app.get_subcommands().front()->get_name();
  if (c.subcommand == "ev-grid") c.format = "csv";
  if (c.subcommand == "bench" && bench->count("--df") == 0) c.dfs = {0.1};

  bool threads_given = false;
  for (auto* opt : thread_opts) threads_given = threads_given || opt->count() > 0;
  if (!threads_given) c.threads = threads_from_env();
  return c;
}

int run(const CommandConfig& config, std::ostream& out, std::ostream& err) {
  try {
    config.validate();
    const std::string& s = config.subcommand;
    if (s == "synth") return run_synth(config, out);
    if (s == "compress") return run_compress(config, out);
    if (s == "analyze") return run_analyze(config, out);
    if (s == "verify") return run_verify(config, out);
    if (s == "ev-grid") return run_ev_grid(config, out);
    if (s == "prune") return run_prune(config, out);
    return run_bench(config, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CommandConfig config;
  try {
    config = parse(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.text;
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return run(config, out, err);
}

}  // namespace tuckerforge::cli
