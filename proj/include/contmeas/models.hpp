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

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "contmeas/lindblad.hpp"
#include "contmeas/monitoring.hpp"

namespace contmeas {

/// Incoherently pumped and damped two-level system.
struct QubitThermalParams
{
    double gamma_down = 1.0;  ///< relaxation rate |1> -> |0>
    double gamma_up = 0.0;    ///< excitation rate |0> -> |1>
    /// Optional H = detuning * sigma_z / 2. Commutes with sigma_z, so it never
    /// changes the steady state; kept as a regression guard for H != 0.
    double detuning = 0.0;

    /// Throws RangeError for negative rates, AllRatesZero when both vanish.
    void validate() const;
    /// p = gamma_up / (gamma_up + gamma_down)
    double excited_population() const;
};

/// H = detuning sigma_z / 2, jumps {sqrt(gamma_down) sigma_-, sqrt(gamma_up) sigma_+}.
LindbladModel thermal_qubit(const QubitThermalParams& params);

/// diag(1 - p, p)
DensityMatrix thermal_qubit_steady_state(const QubitThermalParams& params);

/// c = sigma_z
MonitoringSpec qnd_monitoring(double gamma_m, double eta);

struct CounterexampleFixture
{
    LindbladModel model;
    Operator c;  ///< sigma_x
};

/// Thermal qubit paired with sigma_x monitoring, which is not invariant unless
/// p = 1/2. Throws DegenerateChoice when gamma_up == gamma_down.
CounterexampleFixture counterexample_qubit(const QubitThermalParams& params);

/// Excited population of the sigma_x-monitored thermal qubit:
/// (gamma_up + gamma_m) / (gamma_up + gamma_down + 2 gamma_m).
double sigma_x_monitored_excited_population(const QubitThermalParams& params, double gamma_m);

using ParamMap = std::map<std::string, double, std::less<>>;

struct ParamSpec
{
    std::string name;
    double default_value;
    std::string description;
};

struct BundledMeasurement
{
    std::string name;
    Operator c;
    /// Whether D[c] rho_ss = 0 is expected for the given parameters.
    std::function<bool(const ParamMap&)> expected_invariant;
};

struct Preset
{
    std::string name;
    std::string description;
    std::vector<ParamSpec> params;
    std::function<LindbladModel(const ParamMap&)> build;
    /// Closed-form steady state when one is known.
    std::function<std::optional<DensityMatrix>(const ParamMap&)> analytic_steady_state;
    std::vector<BundledMeasurement> measurements;

    /// Fills defaults; throws UnknownName for parameters the preset does not declare.
    ParamMap resolve(const ParamMap& given) const;
    const BundledMeasurement* measurement(std::string_view name) const;
};

const std::vector<Preset>& preset_registry();
/// Throws UnknownName listing the available presets.
const Preset& find_preset(std::string_view name);

}  // namespace contmeas
