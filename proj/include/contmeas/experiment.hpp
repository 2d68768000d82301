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
#include <filesystem>
#include <optional>
#include <string>

#include "contmeas/config.hpp"

namespace contmeas {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2, kExitAssertion = 3 };

struct RunOptions
{
    /// Ensemble worker threads, 0 = hardware concurrency. Recorded in metadata only.
    unsigned threads = 0;
    int verbosity = 0;
    std::optional<std::size_t> n_trajectories;
    /// Replaces both trajectory.seed and ensemble.base_seed.
    std::optional<std::uint64_t> seed;
    /// Overrides config.output_directory when non-empty.
    std::filesystem::path output_directory;
};

struct RunResult
{
    int exit_code = kExitOk;
    std::string status;  ///< "ok", "assertion_failed", "validation_error", "numerical_error"
    std::string message;
    std::filesystem::path output_directory;
};

/// Applies the overrides in `options` to a copy of `config`.
ExperimentConfig apply_overrides(ExperimentConfig config, const RunOptions& options);

/*!
 * Runs one experiment and writes into the output directory:
 *   summary.json     inputs, results, assertion verdicts (deterministic)
 *   metadata.json    config hash, seed, version, timestamp, threads
 *   timeseries.csv   trajectory and ensemble kinds
 *   record.csv       trajectory kind, the dY record
 *   sweep.csv        gamma-sweep kind
 * Module errors are caught and mapped onto the exit code.
 */
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace contmeas
