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

#include "contmeas/models.hpp"

#include <cmath>

#include "contmeas/errors.hpp"

namespace contmeas {

void QubitThermalParams::validate() const
{
    if (!(gamma_down >= 0.0) || !(gamma_up >= 0.0) || !std::isfinite(gamma_down) || !std::isfinite(gamma_up)) {
        throw RangeError("thermal qubit rates must be finite and >= 0");
    }
    if (!std::isfinite(detuning)) {
        throw RangeError("thermal qubit detuning must be finite");
    }
    if (gamma_down + gamma_up <= 0.0) {
        throw AllRatesZero();
    }
}

double QubitThermalParams::excited_population() const
{
    validate();
    return gamma_up / (gamma_up + gamma_down);
}

LindbladModel thermal_qubit(const QubitThermalParams& params)
{
    params.validate();
    return LindbladModel(0.5 * params.detuning * pauli(Pauli::z),
                         {std::sqrt(params.gamma_down) * pauli(Pauli::minus),
                          std::sqrt(params.gamma_up) * pauli(Pauli::plus)});
}

DensityMatrix thermal_qubit_steady_state(const QubitThermalParams& params)
{
    const double p = params.excited_population();
    Operator rho = zeros(2);
    rho(0, 0) = 1.0 - p;
    rho(1, 1) = p;
    return DensityMatrix(std::move(rho));
}

MonitoringSpec qnd_monitoring(double gamma_m, double eta)
{
    return make_monitoring(pauli(Pauli::z), gamma_m, eta);
}

CounterexampleFixture counterexample_qubit(const QubitThermalParams& params)
{
    params.validate();
    if (params.gamma_up == params.gamma_down) {
        throw DegenerateChoice("counterexample_qubit: gamma_up == gamma_down gives p = 1/2, which sigma_x leaves invariant");
    }
    return CounterexampleFixture{thermal_qubit(params), pauli(Pauli::x)};
}

double sigma_x_monitored_excited_population(const QubitThermalParams& params, double gamma_m)
{
    params.validate();
    return (params.gamma_up + gamma_m) / (params.gamma_up + params.gamma_down + 2.0 * gamma_m);
}

ParamMap Preset::resolve(const ParamMap& given) const
{
    ParamMap out;
    for (const auto& p : params) {
        out[p.name] = p.default_value;
    }
    for (const auto& [key, value] : given) {
        if (!out.contains(key)) {
            std::string known;
            for (const auto& p : params) {
                known += (known.empty() ? "" : ", ") + p.name;
            }
            throw UnknownName("preset '" + name + "' has no parameter '" + key + "' (known: " + known + ")");
        }
        out[key] = value;
    }
    return out;
}

const BundledMeasurement* Preset::measurement(std::string_view which) const
{
    for (const auto& m : measurements) {
        if (m.name == which) {
            return &m;
        }
    }
    return nullptr;
}

namespace {

QubitThermalParams thermal_params(const ParamMap& p)
{
    return QubitThermalParams{p.at("gamma_down"), p.at("gamma_up"), p.at("detuning")};
}

std::vector<Preset> build_registry()
{
    std::vector<Preset> presets;

    Preset thermal;
    thermal.name = "thermal_qubit";
    thermal.description = "two-level system with incoherent relaxation and excitation";
    thermal.params = {{"gamma_down", 1.0, "relaxation rate |1> -> |0> (1/time)"},
                      {"gamma_up", 0.0, "excitation rate |0> -> |1> (1/time)"},
                      {"detuning", 0.0, "H = detuning * sigma_z / 2 (angular frequency)"}};
    thermal.build = [](const ParamMap& p) { return thermal_qubit(thermal_params(p)); };
    thermal.analytic_steady_state = [](const ParamMap& p) -> std::optional<DensityMatrix> {
        return thermal_qubit_steady_state(thermal_params(p));
    };
    thermal.measurements = {
        {"sigma_z", pauli(Pauli::z), [](const ParamMap&) { return true; }},
        {"sigma_x", pauli(Pauli::x), [](const ParamMap& p) { return p.at("gamma_up") == p.at("gamma_down"); }},
        {"identity", pauli(Pauli::id), [](const ParamMap&) { return true; }},
    };
    presets.push_back(std::move(thermal));

    Preset driven;
    driven.name = "driven_thermal_qubit";
    driven.description = "thermal qubit with a coherent drive H = rabi * sigma_x / 2 + detuning * sigma_z / 2";
    driven.params = {{"gamma_down", 1.0, "relaxation rate (1/time)"},
                     {"gamma_up", 0.0, "excitation rate (1/time)"},
                     {"rabi", 1.0, "drive strength (angular frequency)"},
                     {"detuning", 0.0, "drive detuning (angular frequency)"}};
    driven.build = [](const ParamMap& p) {
        const QubitThermalParams base{p.at("gamma_down"), p.at("gamma_up"), p.at("detuning")};
        base.validate();
        const Operator h = 0.5 * p.at("rabi") * pauli(Pauli::x) + 0.5 * p.at("detuning") * pauli(Pauli::z);
        return LindbladModel(h, thermal_qubit(base).jumps());
    };
    driven.analytic_steady_state = [](const ParamMap&) -> std::optional<DensityMatrix> { return std::nullopt; };
    driven.measurements = {
        // A drive builds coherences, which sigma_z dephasing then destroys. With
        // balanced rates the steady state is I/2, invariant although [H, sigma_z] != 0.
        {"sigma_z", pauli(Pauli::z),
         [](const ParamMap& p) { return p.at("rabi") == 0.0 || p.at("gamma_up") == p.at("gamma_down"); }},
        {"identity", pauli(Pauli::id), [](const ParamMap&) { return true; }},
    };
    presets.push_back(std::move(driven));

    return presets;
}

}  // namespace

const std::vector<Preset>& preset_registry()
{
    static const std::vector<Preset> registry = build_registry();
    return registry;
}

const Preset& find_preset(std::string_view name)
{
    std::string known;
    for (const auto& p : preset_registry()) {
        if (p.name == name) {
            return p;
        }
        known += (known.empty() ? "" : ", ") + p.name;
    }
    throw UnknownName("unknown model preset '" + std::string(name) + "' (available: " + known + ")");
}

}  // namespace contmeas
