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
#include <span>
#include <vector>

#include "contmeas/lindblad.hpp"
#include "contmeas/monitoring.hpp"
#include "contmeas/operator.hpp"

namespace contmeas {

struct TrajectoryConfig
{
    double dt = 1e-3;
    double t_final = 1.0;
    std::uint64_t seed = 0;
    /// Noise stream within `seed`; the ensemble runner sets this to the trajectory index.
    std::uint64_t stream = 0;
    /// Store every Nth step (plus the final step).
    std::size_t sample_stride = 1;
    bool renormalize = true;
    /// Sampled states with an eigenvalue below -psd_tol abort the trajectory.
    double psd_tol = 1e-6;
    /// Keep the dY increments in the returned path.
    bool store_record = true;

    /// Throws StepSizeInvalid / RangeError.
    void validate() const;
    /// round(t_final / dt)
    std::size_t n_steps() const;
};

/// Measurement record dY, one increment per integration step.
struct MeasurementRecord
{
    std::vector<double> increments;
    double dt = 0.0;
};

struct TrajectoryPath
{
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    /// Re Tr[(c + c^dagger) rho_c] / 2 at each sampled time; <sigma_z>_c when c = sigma_z.
    std::vector<double> expectations;
    MeasurementRecord record;
};

/// c rho + rho c^dagger - Tr[(c + c^dagger) rho] rho. Requires Tr(rho) = 1 to 1e-9.
Operator innovation_apply(const Operator& c, const Operator& rho);

/*!
 * Precomputed Euler-Maruyama stepper for the Ito stochastic master equation
 *
 *   d rho = (L + gamma_m D[c]) rho dt + sqrt(eta gamma_m) H[c] rho dW.
 *
 * Each step is followed by hermitization and (optionally) division by the
 * trace. States are never projected back onto the positive cone.
 */
class SmeIntegrator
{
public:
    SmeIntegrator(const LindbladModel& model, const MonitoringSpec& spec);

    std::size_t dim() const { return measured_.dim(); }
    const LindbladModel& measured_model() const { return measured_; }
    /// sqrt(eta * gamma_m)
    double noise_coefficient() const { return noise_coeff_; }

    /// Advances rho in place. Throws StateBlowup(step_index) if |rho|_F > 1e3 or non-finite.
    void step(Operator& rho, double dt, double dw, bool renormalize, std::size_t step_index = 0);

    /// Re Tr[(c + c^dagger) rho]
    double signal(const Operator& rho) const;

    /// dY = sqrt(eta gamma_m) Tr[(c + c^dagger) rho] dt + dW
    double record_increment(const Operator& rho, double dw, double dt) const;

private:
    LindbladModel measured_;
    Operator c_;
    Operator c_sum_;  // c + c^dagger
    double noise_coeff_;
    Operator drift_, innov_, work_;
};

inline constexpr double kBlowupNorm = 1e3;

DensityMatrix sme_step(const DensityMatrix& rho,
                       const LindbladModel& model,
                       const MonitoringSpec& spec,
                       double dt,
                       double dw,
                       bool renormalize = true);

double record_increment(const DensityMatrix& rho, const MonitoringSpec& spec, double dw, double dt);

/// Integrates one conditioned trajectory with noise from NoiseStream(config.seed, config.stream).
TrajectoryPath simulate_trajectory(const DensityMatrix& rho0,
                                   const LindbladModel& model,
                                   const MonitoringSpec& spec,
                                   const TrajectoryConfig& config);

/// Same, with caller-supplied Wiener increments (length config.n_steps()).
TrajectoryPath simulate_trajectory(const DensityMatrix& rho0,
                                   const LindbladModel& model,
                                   const MonitoringSpec& spec,
                                   const TrajectoryConfig& config,
                                   std::span<const double> increments);

/// First time |Tr(observable rho_c)| exceeds threshold, checked after every
/// raw step; nullopt if it never does before t_final.
std::optional<double> first_passage_time(const DensityMatrix& rho0,
                                         const LindbladModel& model,
                                         const MonitoringSpec& spec,
                                         const TrajectoryConfig& config,
                                         const Operator& observable,
                                         double threshold);

}  // namespace contmeas
