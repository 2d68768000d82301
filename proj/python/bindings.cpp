// Copyright 2026 The contmeas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>
#include <sstream>

#include "contmeas/config.hpp"
#include "contmeas/ensemble.hpp"
#include "contmeas/errors.hpp"
#include "contmeas/experiment.hpp"
#include "contmeas/lindblad.hpp"
#include "contmeas/models.hpp"
#include "contmeas/monitoring.hpp"
#include "contmeas/rng.hpp"
#include "contmeas/sme.hpp"
#include "contmeas/version.hpp"

namespace py = pybind11;
using namespace contmeas;
using namespace pybind11::literals;

namespace {

DensityMatrix state(const Operator& rho) { return DensityMatrix(rho); }

std::vector<Operator> ops(const std::vector<DensityMatrix>& states)
{
    std::vector<Operator> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(s.op());
    return out;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Continuously monitored open quantum systems";
    m.attr("__version__") = kVersion;

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    auto validation = py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", validation.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

    m.def("pauli", py::overload_cast<std::string_view>(&pauli), "name"_a);

    py::class_<LindbladModel>(m, "LindbladModel")
        .def(py::init<Operator, std::vector<Operator>>(), "hamiltonian"_a, "jumps"_a)
        .def_property_readonly("dim", &LindbladModel::dim)
        .def_property_readonly("hamiltonian", &LindbladModel::hamiltonian)
        .def_property_readonly("jumps", &LindbladModel::jumps)
        .def_property_readonly("characteristic_rate", &LindbladModel::characteristic_rate)
        .def("with_jump", &LindbladModel::with_jump, "jump"_a);

    m.def(
        "thermal_qubit",
        [](double gamma_down, double gamma_up, double detuning) {
            return thermal_qubit(QubitThermalParams{gamma_down, gamma_up, detuning});
        },
        "gamma_down"_a, "gamma_up"_a, "detuning"_a = 0.0);
    m.def(
        "thermal_excited_population",
        [](double gamma_down, double gamma_up) {
            return QubitThermalParams{gamma_down, gamma_up, 0.0}.excited_population();
        },
        "gamma_down"_a, "gamma_up"_a);
    m.def(
        "preset",
        [](const std::string& name, const ParamMap& params) {
            const auto& p = find_preset(name);
            return p.build(p.resolve(params));
        },
        "name"_a, "params"_a = ParamMap{});
    m.def("presets", [] {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& p : preset_registry()) out.emplace_back(p.name, p.description);
        return out;
    });

    m.def(
        "liouvillian_matrix", [](const LindbladModel& model) { return liouvillian_matrix(model).matrix(); },
        "model"_a);
    m.def("kernel_dimension", &kernel_dimension, "model"_a, "relative_threshold"_a = kKernelThreshold);
    m.def(
        "steady_state",
        [](const LindbladModel& model, double threshold) { return steady_state(model, threshold).op(); }, "model"_a,
        "relative_threshold"_a = kKernelThreshold);
    m.def(
        "propagate",
        [](const LindbladModel& model, const Operator& rho0, double t_final, double dt) {
            return propagate(model, state(rho0), t_final, dt).op();
        },
        "model"_a, "rho0"_a, "t_final"_a, "dt"_a);

    py::class_<MonitoringSpec>(m, "MonitoringSpec")
        .def(py::init(&make_monitoring), "c"_a, "gamma_m"_a, "eta"_a = 1.0)
        .def_readonly("c", &MonitoringSpec::c)
        .def_readonly("gamma_m", &MonitoringSpec::gamma_m)
        .def_readonly("eta", &MonitoringSpec::eta);
    m.def("measured_liouvillian", &measured_liouvillian, "model"_a, "spec"_a);

    py::class_<InvarianceReport>(m, "InvarianceReport")
        .def_readonly("residual_norm", &InvarianceReport::residual_norm)
        .def_readonly("invariant", &InvarianceReport::invariant)
        .def_readonly("tolerance", &InvarianceReport::tolerance)
        .def_property_readonly("steady_state",
                               [](const InvarianceReport& r) { return r.steady_state_used.op(); });
    m.def("invariance_check", &invariance_check, "model"_a, "c"_a, "tolerance"_a = kInvarianceTolerance);

    py::class_<SweepPoint>(m, "SweepPoint")
        .def_readonly("gamma_m", &SweepPoint::gamma_m)
        .def_readonly("drift", &SweepPoint::drift)
        .def_readonly("error", &SweepPoint::error)
        .def_property_readonly("ok", &SweepPoint::ok)
        .def_property_readonly("steady_state", [](const SweepPoint& p) -> std::optional<Operator> {
            if (!p.steady_state) return std::nullopt;
            return p.steady_state->op();
        });
    m.def(
        "gamma_sweep",
        [](const LindbladModel& model, const Operator& c, const std::vector<double>& gammas) {
            return gamma_sweep(model, c, gammas);
        },
        "model"_a, "c"_a, "gammas"_a);
    m.def(
        "default_sweep_gammas", &default_sweep_gammas, "model"_a, "points"_a = 8, "lo"_a = 1e-2, "hi"_a = 1e1);

    py::class_<TrajectoryConfig>(m, "TrajectoryConfig")
        .def(py::init<>())
        .def_readwrite("dt", &TrajectoryConfig::dt)
        .def_readwrite("t_final", &TrajectoryConfig::t_final)
        .def_readwrite("seed", &TrajectoryConfig::seed)
        .def_readwrite("stream", &TrajectoryConfig::stream)
        .def_readwrite("sample_stride", &TrajectoryConfig::sample_stride)
        .def_readwrite("renormalize", &TrajectoryConfig::renormalize)
        .def_readwrite("psd_tol", &TrajectoryConfig::psd_tol)
        .def_readwrite("store_record", &TrajectoryConfig::store_record)
        .def_property_readonly("n_steps", &TrajectoryConfig::n_steps);

    py::class_<TrajectoryPath>(m, "TrajectoryPath")
        .def_readonly("times", &TrajectoryPath::times)
        .def_readonly("expectations", &TrajectoryPath::expectations)
        .def_property_readonly("states", [](const TrajectoryPath& p) { return ops(p.states); })
        .def_property_readonly("record", [](const TrajectoryPath& p) { return p.record.increments; })
        .def_property_readonly("record_dt", [](const TrajectoryPath& p) { return p.record.dt; });
    m.def(
        "simulate_trajectory",
        [](const Operator& rho0, const LindbladModel& model, const MonitoringSpec& spec,
           const TrajectoryConfig& config, std::optional<std::vector<double>> increments) {
            py::gil_scoped_release release;
            if (increments) return simulate_trajectory(state(rho0), model, spec, config, *increments);
            return simulate_trajectory(state(rho0), model, spec, config);
        },
        "rho0"_a, "model"_a, "spec"_a, "config"_a, "increments"_a = py::none());
    m.def("wiener_increments", &wiener_increments, "seed"_a, "stream"_a, "n_steps"_a, "dt"_a);

    py::class_<EnsembleConfig>(m, "EnsembleConfig")
        .def(py::init<>())
        .def_readwrite("n_trajectories", &EnsembleConfig::n_trajectories)
        .def_readwrite("base_seed", &EnsembleConfig::base_seed)
        .def_readwrite("trajectory", &EnsembleConfig::trajectory)
        .def_readwrite("localization_observable", &EnsembleConfig::localization_observable)
        .def_readwrite("histogram_bins", &EnsembleConfig::histogram_bins)
        .def_readwrite("threads", &EnsembleConfig::threads)
        .def_readwrite("max_failure_fraction", &EnsembleConfig::max_failure_fraction)
        .def(
            "add_observable",
            [](EnsembleConfig& c, const std::string& name, const Operator& op) {
                c.observables.push_back({name, op});
            },
            "name"_a, "operator"_a);

    py::class_<ObservableSeries>(m, "ObservableSeries")
        .def_readonly("name", &ObservableSeries::name)
        .def_readonly("mean", &ObservableSeries::mean)
        .def_readonly("standard_error", &ObservableSeries::standard_error);

    py::class_<EnsembleStats>(m, "EnsembleStats")
        .def_readonly("times", &EnsembleStats::times)
        .def_property_readonly("mean_state", [](const EnsembleStats& s) { return ops(s.mean_state); })
        .def_readonly("observables", &EnsembleStats::observables)
        .def_readonly("purity_mean", &EnsembleStats::purity_mean)
        .def_readonly("purity_standard_error", &EnsembleStats::purity_standard_error)
        .def_readonly("localization", &EnsembleStats::localization)
        .def_readonly("n_requested", &EnsembleStats::n_requested)
        .def_readonly("n_completed", &EnsembleStats::n_completed)
        .def_property_readonly("failures",
                               [](const EnsembleStats& s) {
                                   std::vector<std::pair<std::size_t, std::string>> out;
                                   for (const auto& f : s.failures) out.emplace_back(f.index, f.message);
                                   return out;
                               })
        .def("observable", &EnsembleStats::observable, "name"_a, py::return_value_policy::reference_internal);
    m.def(
        "run_ensemble",
        [](const Operator& rho0, const LindbladModel& model, const MonitoringSpec& spec,
           const EnsembleConfig& config) {
            const auto rho = state(rho0);
            py::gil_scoped_release release;
            return run_ensemble(rho, model, spec, config);
        },
        "rho0"_a, "model"_a, "spec"_a, "config"_a);
    m.def("identical", &identical, "a"_a, "b"_a);
    m.def(
        "dissipative_uncollapse_metric",
        [](const EnsembleStats& s, const Operator& rho_ss) { return dissipative_uncollapse_metric(s, state(rho_ss)); },
        "stats"_a, "rho_ss"_a);
    m.def("bimodality_report", &bimodality_report, "stats"_a, "threshold"_a);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_property_readonly("kind", [](const ExperimentConfig& c) { return std::string(to_string(c.kind)); })
        .def_readwrite("output_directory", &ExperimentConfig::output_directory)
        .def("to_json", &serialize_config);
    m.def(
        "parse_config", [](std::string_view text) { return parse_config(text); }, "text"_a);
    m.def(
        "load_config", [](const std::filesystem::path& path) { return parse_config(read_file(path)); }, "path"_a);

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("exit_code", &RunResult::exit_code)
        .def_readonly("status", &RunResult::status)
        .def_readonly("message", &RunResult::message)
        .def_readonly("output_directory", &RunResult::output_directory);
    m.def(
        "run_experiment",
        [](const ExperimentConfig& config, std::optional<std::filesystem::path> output_directory, unsigned threads,
           std::optional<std::size_t> n_trajectories, std::optional<std::uint64_t> seed) {
            RunOptions o;
            o.threads = threads;
            o.n_trajectories = n_trajectories;
            o.seed = seed;
            if (output_directory) o.output_directory = *output_directory;
            py::gil_scoped_release release;
            return run_experiment(config, o);
        },
        "config"_a, "output_directory"_a = py::none(), "threads"_a = 0u, "n_trajectories"_a = py::none(),
        "seed"_a = py::none());
}
