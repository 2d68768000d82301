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
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "contmeas/lindblad.hpp"
#include "contmeas/monitoring.hpp"
#include "contmeas/sme.hpp"

namespace contmeas {

struct NamedObservable
{
    std::string name;
    Operator op;
};

struct EnsembleConfig
{
    std::size_t n_trajectories = 100;
    /// Trajectory i draws noise stream i under this seed.
    std::uint64_t base_seed = 0;
    /// seed and stream are overwritten per trajectory.
    TrajectoryConfig trajectory;
    std::vector<NamedObservable> observables;
    /// Observable used for bimodality and histograms; empty means the first observable.
    std::string localization_observable;
    std::size_t histogram_bins = 20;
    /// Worker threads, 0 = hardware concurrency. Never affects the results.
    unsigned threads = 0;
    /// The run fails when more than this fraction of trajectories abort.
    double max_failure_fraction = 0.01;

    void validate(std::size_t dim) const;
};

struct ObservableSeries
{
    std::string name;
    std::vector<double> mean;
    std::vector<double> standard_error;
};

struct Histogram
{
    double time = 0.0;
    std::vector<double> edges;  ///< bins + 1 edges
    std::vector<std::size_t> counts;
};

struct TrajectoryFailure
{
    std::size_t index;
    std::string message;
};

struct EnsembleStats
{
    std::vector<double> times;
    /// E[rho_c(t)] over completed trajectories.
    std::vector<DensityMatrix> mean_state;
    std::vector<ObservableSeries> observables;
    std::vector<double> purity_mean;
    std::vector<double> purity_standard_error;

    std::string localization_observable;
    /// <obs>_c per completed trajectory (rows, index order) and sampled time (columns).
    Eigen::MatrixXd localization;
    /// Histograms of the localization observable at the first, middle and last sample.
    std::vector<Histogram> localization_histogram;

    std::size_t n_requested = 0;
    std::size_t n_completed = 0;
    std::vector<TrajectoryFailure> failures;

    /// Throws UnknownObservable.
    const ObservableSeries& observable(std::string_view name) const;
    std::size_t dim() const;
};

/// Bitwise comparison of every field.
bool identical(const EnsembleStats& a, const EnsembleStats& b);

EnsembleStats run_ensemble(const DensityMatrix& rho0,
                           const LindbladModel& model,
                           const MonitoringSpec& spec,
                           const EnsembleConfig& config);

/// d(t) = |E[rho_c(t)] - rho_ss|_F
std::vector<double> dissipative_uncollapse_metric(const EnsembleStats& stats, const DensityMatrix& rho_ss);

/// |E[rho_c(t)] - reference(t)|_F for a reference trajectory on the same grid.
std::vector<double> distance_to_reference(const EnsembleStats& stats, const std::vector<DensityMatrix>& reference);

/// Fraction of trajectories with |<obs>_c| > threshold at each sampled time.
std::vector<double> bimodality_report(const EnsembleStats& stats, double threshold);

Histogram localization_histogram(const EnsembleStats& stats, std::size_t time_index, std::size_t bins);

/// Residence in the localized region |<obs>_c| > threshold, from the sampled grid.
struct DwellStatistics
{
    double mean_dwell_time = 0.0;  ///< mean length of a localized episode
    double mean_switches = 0.0;    ///< per trajectory, sign flips between consecutive episodes
    std::size_t episodes = 0;
};

DwellStatistics dwell_statistics(const EnsembleStats& stats, double threshold);

/// Re Tr(a E[rho_c(t)]) at each sampled time.
std::vector<double> mean_state_expectation(const EnsembleStats& stats, const Operator& a);

}  // namespace contmeas
