// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "tuckerforge/tucker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <thread>
#include <utility>

#include "tuckerforge/errors.hpp"
#include "tuckerforge/multilinear.hpp"
#include "tuckerforge/svd.hpp"

namespace tuckerforge {

namespace {

constexpr std::size_t kOutMode = 0;
constexpr std::size_t kInMode = 1;

void check_ranks(const ConvKernel& kernel, TuckerRanks ranks) {
  if (ranks.out < 1 || ranks.out > kernel.out_channels()) {
    throw ValidationError("output rank " + std::to_string(ranks.out) + " out of range [1, " +
                          std::to_string(kernel.out_channels()) + "]");
  }
  if (ranks.in < 1 || ranks.in > kernel.in_channels()) {
    throw ValidationError("input rank " + std::to_string(ranks.in) + " out of range [1, " +
                          std::to_string(kernel.in_channels()) + "]");
  }
}

double orthonormality_error(const Matrix& u) {
  double worst = 0.0;
  for (std::size_t a = 0; a < u.cols(); ++a) {
    for (std::size_t b = a; b < u.cols(); ++b) {
      double dot = 0.0;
      for (std::size_t r = 0; r < u.rows(); ++r) dot += u(r, a) * u(r, b);
      worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
    }
  }
  return worst;
}

struct ChannelBases {
  Matrix out;
  Matrix in;
};

ChannelBases channel_bases(const ConvKernel& kernel) {
  if (!kernel.tensor().all_finite()) throw ValidationError("kernel contains non-finite entries");
  return {left_singular_basis(mode_n_unfold(kernel.tensor(), kOutMode)).vectors,
          left_singular_basis(mode_n_unfold(kernel.tensor(), kInMode)).vectors};
}

TuckerFactors hosvd_from_bases(const ConvKernel& kernel, const ChannelBases& bases, TuckerRanks ranks) {
  return project(kernel, bases.out.leading_columns(ranks.out), bases.in.leading_columns(ranks.in));
}

void check_rank_list(std::span<const std::size_t> ranks, std::size_t channels, const char* what) {
  if (ranks.empty()) throw ValidationError(std::string(what) + " rank list is empty");
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (ranks[i] < 1 || ranks[i] > channels) {
      throw ValidationError(std::string(what) + " rank " + std::to_string(ranks[i]) + " out of range [1, " +
                            std::to_string(channels) + "]");
    }
    if (i > 0 && ranks[i] <= ranks[i - 1]) {
      throw ValidationError(std::string(what) + " rank list must be strictly increasing");
    }
  }
}

}  // namespace

void TuckerFactors::validate(double orthonormal_tol) const {
  if (core.rank() != 5) throw ValidationError("Tucker core must have 5 axes, got " + shape_to_string(core.dims()));
  if (core.dim(0) != u_out.cols() || core.dim(1) != u_in.cols()) {
    throw ValidationError("Tucker core " + shape_to_string(core.dims()) + " inconsistent with factor ranks (" +
                          std::to_string(u_out.cols()) + ", " + std::to_string(u_in.cols()) + ")");
  }
  if (u_out.cols() > u_out.rows() || u_in.cols() > u_in.rows()) {
    throw ValidationError("Tucker rank exceeds channel count");
  }
  if (orthonormal_tol > 0.0) {
    if (orthonormality_error(u_out) > orthonormal_tol || orthonormality_error(u_in) > orthonormal_tol) {
      throw ValidationError("Tucker factor matrices are not orthonormal");
    }
  }
}

void RankPolicy::validate() const {
  if (!(df > 0.0 && df <= 1.0)) throw ValidationError("downsampling factor must lie in (0, 1]");
  if (min_rank < 1) throw ValidationError("minimum rank must be >= 1");
}

std::size_t select_rank(const RankPolicy& policy, std::size_t channels) {
  policy.validate();
  if (channels < 1) throw ValidationError("channel count must be >= 1");
  const auto target = static_cast<std::size_t>(std::round(policy.df * static_cast<double>(channels)));
  const std::size_t lower = std::min(policy.min_rank, channels);
  return std::clamp(target, lower, channels);
}

TuckerRanks select_ranks(const RankPolicy& policy, std::size_t out_channels, std::size_t in_channels) {
  return {select_rank(policy, out_channels), select_rank(policy, in_channels)};
}

TuckerFactors project(const ConvKernel& kernel, Matrix u_out, Matrix u_in) {
  if (u_out.rows() != kernel.out_channels() || u_in.rows() != kernel.in_channels()) {
    throw ValidationError("factor matrices do not match kernel channels " + shape_to_string(kernel.tensor().dims()));
  }
  DenseTensor core =
      mode_n_product(mode_n_product(kernel.tensor(), u_out.transposed(), kOutMode), u_in.transposed(), kInMode);
  return {std::move(core), std::move(u_out), std::move(u_in)};
}

TuckerFactors hosvd_partial(const ConvKernel& kernel, TuckerRanks ranks) {
  check_ranks(kernel, ranks);
  return hosvd_from_bases(kernel, channel_bases(kernel), ranks);
}

TuckerFactors hooi_refine(const ConvKernel& kernel, const TuckerFactors& initial, const HooiOptions& options) {
  initial.validate();
  if (options.max_iters == 0) return initial;
  check_ranks(kernel, {initial.rank_out(), initial.rank_in()});

  TuckerFactors best = initial;
  double best_ev = explained_variance(kernel, initial);
  Matrix u_out = initial.u_out;
  Matrix u_in = initial.u_in;
  for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
    const DenseTensor in_projected = mode_n_product(kernel.tensor(), u_in.transposed(), kInMode);
    u_out = leading_left_basis(mode_n_unfold(in_projected, kOutMode), initial.rank_out());
    const DenseTensor out_projected = mode_n_product(kernel.tensor(), u_out.transposed(), kOutMode);
    u_in = leading_left_basis(mode_n_unfold(out_projected, kInMode), initial.rank_in());

    TuckerFactors candidate = project(kernel, u_out, u_in);
    const double ev = explained_variance(kernel, candidate);
    const double improvement = ev - best_ev;
    if (ev > best_ev) {
      best = std::move(candidate);
      best_ev = ev;
    }
    if (improvement < options.tol) break;
  }
  return best;
}

ConvKernel reconstruct(const TuckerFactors& factors, LayerKind kind) {
  factors.validate();
  return ConvKernel(mode_n_product(mode_n_product(factors.core, factors.u_out, kOutMode), factors.u_in, kInMode),
                    kind);
}

double explained_variance(const ConvKernel& kernel, const TuckerFactors& factors) {
  const double total = frobenius_norm_sq(kernel.tensor());
  if (!(total > 0.0)) throw ValidationError("explained variance is undefined for a zero-norm kernel");
  const ConvKernel approx = reconstruct(factors, kernel.kind());
  if (approx.tensor().dims() != kernel.tensor().dims()) {
    throw ValidationError("factors reconstruct to " + shape_to_string(approx.tensor().dims()) + " but kernel is " +
                          shape_to_string(kernel.tensor().dims()));
  }
  const auto a = kernel.tensor().data();
  const auto b = approx.tensor().data();
  double residual = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    residual += d * d;
  }
  return 1.0 - residual / total;
}

Matrix ev_grid(const ConvKernel& kernel, std::span<const std::size_t> out_ranks,
               std::span<const std::size_t> in_ranks, std::size_t threads) {
  check_rank_list(out_ranks, kernel.out_channels(), "output");
  check_rank_list(in_ranks, kernel.in_channels(), "input");
  if (!(frobenius_norm_sq(kernel.tensor()) > 0.0)) {
    throw ValidationError("explained variance is undefined for a zero-norm kernel");
  }
  const ChannelBases bases = channel_bases(kernel);
  Matrix grid(out_ranks.size(), in_ranks.size());
  const std::size_t cells = out_ranks.size() * in_ranks.size();
  auto evaluate = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t cell = begin; cell < cells; cell += stride) {
      const std::size_t r = cell / in_ranks.size();
      const std::size_t c = cell % in_ranks.size();
      grid(r, c) = explained_variance(kernel, hosvd_from_bases(kernel, bases, {out_ranks[r], in_ranks[c]}));
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, cells);
  if (threads == 1) {
    evaluate(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(evaluate, t, threads);
  }
  return grid;
}

std::string ev_grid_csv(const Matrix& grid, std::span<const std::size_t> out_ranks,
                        std::span<const std::size_t> in_ranks) {
  if (grid.rows() != out_ranks.size() || grid.cols() != in_ranks.size()) {
    throw ValidationError("EV grid shape does not match rank lists");
  }
  std::ostringstream os;
  os << "t_o\\t_i";
  for (std::size_t t : in_ranks) os << ',' << t;
  os << '\n';
  char cell[64];
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    os << out_ranks[r];
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      std::snprintf(cell, sizeof cell, "%#.12g", grid(r, c));
      os << ',' << cell;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace tuckerforge
