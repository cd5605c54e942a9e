// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tuckerforge/cli.hpp"
#include "tuckerforge/container.hpp"
#include "tuckerforge/conv.hpp"
#include "tuckerforge/cost.hpp"
#include "tuckerforge/errors.hpp"
#include "tuckerforge/prune.hpp"
#include "tuckerforge/tucker.hpp"

namespace py = pybind11;
namespace tf = tuckerforge;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

tf::DenseTensor to_tensor(const Array& a) {
  tf::Shape dims(a.shape(), a.shape() + a.ndim());
  return tf::DenseTensor(std::move(dims), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const tf::DenseTensor& t) {
  std::vector<py::ssize_t> shape(t.dims().begin(), t.dims().end());
  Array a(shape);
  std::copy(t.data().begin(), t.data().end(), a.mutable_data());
  return a;
}

tf::Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw tf::ValidationError("expected a 2-D array");
  return tf::Matrix(a.shape(0), a.shape(1), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const tf::Matrix& m) {
  Array a({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
  std::copy(m.data().begin(), m.data().end(), a.mutable_data());
  return a;
}

tf::ConvKernel to_kernel(const Array& a, const std::string& kind) {
  return tf::ConvKernel(to_tensor(a), tf::parse_layer_kind(kind));
}

tf::ConvSpec to_spec(tf::Triple stride, tf::Triple padding) {
  tf::ConvSpec s{stride, padding};
  s.validate();
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Partial Tucker compression of 3-D convolution kernels";

  py::register_exception<tf::ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<tf::IoError>(m, "IoError", PyExc_OSError);

  py::class_<tf::TuckerFactors>(m, "TuckerFactors")
      .def(py::init([](const Array& core, const Array& u_out, const Array& u_in) {
             tf::TuckerFactors f{to_tensor(core), to_matrix(u_out), to_matrix(u_in)};
             f.validate();
             return f;
           }),
           py::arg("core"), py::arg("u_out"), py::arg("u_in"))
      .def_property_readonly("core", [](const tf::TuckerFactors& f) { return to_array(f.core); })
      .def_property_readonly("u_out", [](const tf::TuckerFactors& f) { return to_array(f.u_out); })
      .def_property_readonly("u_in", [](const tf::TuckerFactors& f) { return to_array(f.u_in); })
      .def_property_readonly("ranks", [](const tf::TuckerFactors& f) {
        return py::make_tuple(f.rank_out(), f.rank_in());
      });

  m.def(
      "select_rank",
      [](double df, std::size_t channels, std::size_t min_rank) {
        return tf::select_rank(tf::RankPolicy{df, min_rank}, channels);
      },
      py::arg("df"), py::arg("channels"), py::arg("min_rank") = 8);

  m.def(
      "hosvd_partial",
      [](const Array& kernel, std::size_t t_o, std::size_t t_i, const std::string& kind) {
        return tf::hosvd_partial(to_kernel(kernel, kind), {t_o, t_i});
      },
      py::arg("kernel"), py::arg("t_o"), py::arg("t_i"), py::arg("kind") = "conv3d");

  m.def(
      "hooi_refine",
      [](const Array& kernel, const tf::TuckerFactors& initial, std::size_t max_iters, double tol) {
        return tf::hooi_refine(to_kernel(kernel, "conv3d"), initial, {max_iters, tol});
      },
      py::arg("kernel"), py::arg("initial"), py::arg("max_iters") = 20, py::arg("tol") = 1e-6);

  m.def(
      "reconstruct", [](const tf::TuckerFactors& f) { return to_array(tf::reconstruct(f).tensor()); },
      py::arg("factors"));

  m.def(
      "explained_variance",
      [](const Array& kernel, const tf::TuckerFactors& f) {
        return tf::explained_variance(to_kernel(kernel, "conv3d"), f);
      },
      py::arg("kernel"), py::arg("factors"));

  m.def(
      "ev_grid",
      [](const Array& kernel, const std::vector<std::size_t>& out_ranks, const std::vector<std::size_t>& in_ranks,
         std::size_t threads) {
        return to_array(tf::ev_grid(to_kernel(kernel, "conv3d"), out_ranks, in_ranks, threads));
      },
      py::arg("kernel"), py::arg("out_ranks"), py::arg("in_ranks"), py::arg("threads") = 1);

  m.def(
      "conv3d_direct",
      [](const Array& x, const Array& kernel, tf::Triple stride, tf::Triple padding) {
        const tf::FeatureMap in(to_tensor(x));
        return to_array(tf::conv3d_direct(in, to_kernel(kernel, "conv3d"), to_spec(stride, padding)).tensor());
      },
      py::arg("x"), py::arg("kernel"), py::arg("stride") = tf::Triple{1, 1, 1},
      py::arg("padding") = tf::Triple{0, 0, 0});

  m.def(
      "conv3d_tucker",
      [](const Array& x, const tf::TuckerFactors& f, tf::Triple stride, tf::Triple padding) {
        const tf::FeatureMap in(to_tensor(x));
        return to_array(tf::conv3d_tucker(in, f, to_spec(stride, padding)).tensor());
      },
      py::arg("x"), py::arg("factors"), py::arg("stride") = tf::Triple{1, 1, 1},
      py::arg("padding") = tf::Triple{0, 0, 0});

  m.def(
      "channel_l2_norms", [](const Array& kernel) { return tf::channel_l2_norms(to_kernel(kernel, "conv3d")); },
      py::arg("kernel"));

  m.def(
      "prune_channels",
      [](const Array& kernel, double fraction) {
        return to_array(tf::prune_channels(to_kernel(kernel, "conv3d"), tf::PruneSpec{fraction}).tensor());
      },
      py::arg("kernel"), py::arg("fraction"));

  m.def(
      "analyze",
      [](const std::string& arch_json, double df, std::size_t min_rank, bool include_pointwise,
         bool include_transposed) {
        const auto arch = tf::arch_from_json(nlohmann::json::parse(arch_json));
        const auto report = tf::analyze_arch(arch, tf::RankPolicy{df, min_rank}, {include_pointwise, include_transposed});
        return tf::to_json(report).dump();
      },
      py::arg("arch_json"), py::arg("df") = 0.5, py::arg("min_rank") = 8, py::arg("include_pointwise") = false,
      py::arg("include_transposed") = true,
      "Cost report for an architecture, returned as a JSON string.");

  m.def(
      "read_container",
      [](const std::string& path) {
        const tf::Container c = tf::read_container(path);
        py::dict tensors;
        for (const auto& t : c.tensors) tensors[py::str(t.name)] = to_array(t.tensor);
        return py::make_tuple(c.manifest, tensors);
      },
      py::arg("path"), "Returns (manifest, {name: array}) in stored order.");

  m.def(
      "write_container",
      [](const std::string& path, const std::string& manifest, const py::dict& tensors, const std::string& dtype) {
        tf::Container c;
        c.manifest = manifest;
        const tf::DType d = dtype == "f32" ? tf::DType::f32 : tf::DType::f64;
        if (dtype != "f32" && dtype != "f64") throw tf::ValidationError("dtype must be 'f32' or 'f64'");
        for (const auto& [name, value] : tensors) {
          tf::DenseTensor t = to_tensor(value.cast<Array>());
          t.set_dtype(d);
          c.add(name.cast<std::string>(), std::move(t));
        }
        tf::write_container(path, c);
      },
      py::arg("path"), py::arg("manifest"), py::arg("tensors"), py::arg("dtype") = "f64");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"tuckerforge"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out;
        std::ostringstream err;
        const int code = tf::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a CLI command in-process; returns (exit_code, stdout, stderr).");
}
