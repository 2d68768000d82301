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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "contmeas/ensemble.hpp"
#include "contmeas/errors.hpp"
#include "contmeas/lindblad.hpp"
#include "contmeas/models.hpp"
#include "contmeas/monitoring.hpp"
#include "contmeas/sme.hpp"

namespace contmeas {

enum class ExperimentKind { invariance_check, gamma_sweep, trajectory, ensemble };

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view text);

/// An operator given either by name ("sigma_z", "identity", ...) or as explicit entries.
struct OperatorRef
{
    std::string name;
    std::optional<Operator> matrix;
};

/// "steady_state", "maximally_mixed", "basis:k", or explicit entries.
struct StateRef
{
    std::string name = "steady_state";
    std::optional<Operator> matrix;
};

struct ModelConfig
{
    std::string preset;  ///< empty for explicit matrices
    ParamMap params;
    std::optional<Operator> hamiltonian;
    std::vector<Operator> jumps;
};

struct ObservableRef
{
    std::string name;
    OperatorRef op;
};

/// Numeric bounds or "noise_floor" (4 sqrt(2) / sqrt(n)) for the uncollapse metric.
using UncollapseBound = std::variant<double, std::string>;

struct Assertions
{
    std::optional<bool> expect_invariant;
    std::optional<double> max_drift;
    std::optional<UncollapseBound> max_uncollapse;
    std::optional<double> min_purity_gain;
    std::optional<double> master_equation_k;
    std::optional<double> min_bimodality;

    bool empty() const;
};

struct ExperimentConfig
{
    ExperimentKind kind = ExperimentKind::invariance_check;
    ModelConfig model;
    OperatorRef measurement{"sigma_z", std::nullopt};
    double gamma_m = 0.0;
    double eta = 1.0;
    double invariance_tolerance = kInvarianceTolerance;
    std::vector<double> sweep_gammas;  ///< empty: default_sweep_gammas
    StateRef initial_state;
    TrajectoryConfig trajectory;
    std::size_t n_trajectories = 100;
    std::uint64_t base_seed = 0;
    std::vector<ObservableRef> observables;  ///< empty: Hermitian part of c
    std::string localization_observable;
    double bimodality_threshold = 0.9;
    std::size_t histogram_bins = 20;
    std::string output_directory = "out";
    Assertions assertions;
};

struct ConfigIssue
{
    std::string field;  ///< dotted path, empty for syntax errors
    std::size_t line = 0;  ///< 1-based, 0 when unknown
    std::string message;
};

/// Every problem found in a config, not just the first.
class ConfigError : public ValidationError
{
public:
    explicit ConfigError(std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

/// Parses JSON (comments allowed). `kind_hint` supplies the kind when the file
/// omits it and must agree with it otherwise. Throws ConfigError.
ExperimentConfig parse_config(std::string_view text, std::optional<ExperimentKind> kind_hint = std::nullopt);

/// Canonical JSON text; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& config);

/// Everything a run needs, built from a config.
struct ResolvedExperiment
{
    LindbladModel model;
    MonitoringSpec monitoring;
    DensityMatrix initial_state;
    std::vector<NamedObservable> observables;
    /// Preset whose closed-form references apply, if any.
    const Preset* preset = nullptr;
    ParamMap params;
};

/// Throws ConfigError listing every unresolved piece.
ResolvedExperiment resolve_experiment(const ExperimentConfig& config);

Operator resolve_operator(const OperatorRef& ref, std::size_t dim);

}  // namespace contmeas
