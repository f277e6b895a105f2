// Copyright 2026 The collapse-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "collapse_lab/cascade.hpp"
#include "collapse_lab/core.hpp"
#include "collapse_lab/decoherence.hpp"
#include "collapse_lab/epr.hpp"
#include "collapse_lab/errors.hpp"
#include "collapse_lab/experiment.hpp"
#include "collapse_lab/parallel.hpp"
#include "collapse_lab/reduction.hpp"
#include "collapse_lab/rng.hpp"

namespace py = pybind11;
using namespace collapse;

namespace {

// Python sees every library error as collapse_lab.CollapseError carrying
// the module name.
void translate(std::exception_ptr p, const py::object& error_type) {
  try {
    if (p) std::rethrow_exception(p);
  } catch (const Error& e) {
    py::object exc = error_type(e.what());
    exc.attr("module") = e.module();
    PyErr_SetObject(error_type.ptr(), exc.ptr());
  }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "C++ core of collapse-lab";

  static py::object error_type = py::reinterpret_borrow<py::object>(
      PyErr_NewException("collapse_lab._core.CollapseError", PyExc_RuntimeError, nullptr));
  m.attr("CollapseError") = error_type;
  py::register_exception_translator([](std::exception_ptr p) { translate(p, error_type); });

  m.def("set_workers", &set_worker_override, py::arg("workers"));
  m.def("worker_count", &worker_count);

  py::class_<CounterRng>(m, "CounterRng")
      .def(py::init<std::uint64_t, std::uint64_t, std::uint32_t>(), py::arg("seed"), py::arg("stream") = 0,
           py::arg("substream") = 0)
      .def("next_u64", [](CounterRng& r) { return r(); })
      .def("uniform", &CounterRng::uniform)
      .def("normal", &CounterRng::normal);
  m.def("philox4x32", &philox4x32, py::arg("counter"), py::arg("key"));

  // core
  m.def("tensor_product", [](const ComplexMatrix& a, const ComplexMatrix& b) {
    return tensor_product(DensityMatrix(a), DensityMatrix(b)).matrix();
  });
  m.def(
      "partial_trace",
      [](const ComplexMatrix& rho, std::vector<std::size_t> dims, std::size_t keep) {
        return partial_trace(DensityMatrix(rho), SubsystemSplit{std::move(dims), keep}).matrix();
      },
      py::arg("rho"), py::arg("dims"), py::arg("keep"));
  m.def(
      "coherence_norm",
      [](const ComplexMatrix& rho, std::vector<std::size_t> dims, std::size_t channel) {
        return coherence_norm(DensityMatrix(rho), SubsystemSplit{std::move(dims), channel});
      },
      py::arg("rho"), py::arg("dims"), py::arg("channel"));

  // decoherence
  m.def(
      "run_decoherence",
      [](Complex c1, Complex c2, std::size_t sectors, double rate, double dt, std::size_t steps,
         std::uint64_t seed) {
        const auto init = PointerChannelAmplitudes::initial(
            c1, c2, std::vector<double>(sectors, 1.0 / static_cast<double>(sectors)));
        CollisionStream stream{rate, 1.0, true};
        py::list out;
        for (const auto& s : run_decoherence(init, stream, dt, steps, seed)) {
          out.append(py::make_tuple(s.time, s.offdiag, s.diag1, s.diag2));
        }
        return out;
      },
      py::arg("c1"), py::arg("c2"), py::arg("sectors"), py::arg("rate"), py::arg("dt"), py::arg("steps"),
      py::arg("seed"));

  // cascade
  py::class_<CascadeState>(m, "CascadeState")
      .def_readonly("q0", &CascadeState::q0)
      .def_readonly("q1", &CascadeState::q1)
      .def_readonly("q2", &CascadeState::q2)
      .def_readonly("tau", &CascadeState::tau)
      .def_readonly("epsilon", &CascadeState::epsilon);
  m.def("cascade_closed_form", &cascade_closed_form, py::arg("t"), py::arg("epsilon"), py::arg("dq1"),
        py::arg("dq2"), py::arg("tau"));
  m.def(
      "cascade_integrate",
      [](double dq1, double dq2, double tau, double t_end, std::size_t steps) {
        return cascade_integrate(CascadeState::seeded(dq1, dq2, tau), t_end, steps).state;
      },
      py::arg("dq1"), py::arg("dq2"), py::arg("tau"), py::arg("t_end"), py::arg("steps"));

  // reduction
  m.def(
      "born_rule_frequencies",
      [](std::vector<double> p0, double lambda, double dt, std::size_t n, std::uint64_t seed) {
        const auto s = born_rule_ensemble(ChannelSimplex::from(std::move(p0)), CovarianceModel::wright_fisher(lambda),
                                          dt, n, seed);
        return py::make_tuple(s.frequencies, s.mean_time);
      },
      py::arg("p0"), py::arg("lam"), py::arg("dt"), py::arg("trajectories"), py::arg("seed"));
  m.def(
      "fokker_planck_absorbed",
      [](double p0, double lambda, std::size_t grid_n, double t_end) {
        const auto r = fokker_planck_2ch(p0, CovarianceModel::wright_fisher(lambda), grid_n, t_end);
        return py::make_tuple(r.final().absorbed_zero, r.final().absorbed_one, r.final().interior);
      },
      py::arg("p0"), py::arg("lam"), py::arg("grid_n"), py::arg("t_end"));

  // epr
  m.def(
      "joint_weights",
      [](Complex a, Complex b, double theta) {
        return joint_weights(rotate_coefficients(SpinPairState{a, b, theta})).q;
      },
      py::arg("a"), py::arg("b"), py::arg("theta"));

  // runner
  m.def(
      "run_experiment",
      [](const std::string& config_json, bool strict) {
        const RunReport r = run_experiment(parse_config(nlohmann::json::parse(config_json)), RunOptions{strict});
        return r.to_json().dump();
      },
      py::arg("config_json"), py::arg("strict") = false);
  m.def("presets", [] {
    py::dict out;
    for (const auto& p : presets()) out[py::str(p.name)] = p.json_text;
    return out;
  });
}
