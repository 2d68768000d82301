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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "contmeas/lindblad.hpp"
#include "contmeas/operator.hpp"

namespace contmeas {

/// Continuous monitoring of operator c at rate gamma_m with detection efficiency eta.
struct MonitoringSpec
{
    Operator c;
    double gamma_m = 0.0;
    double eta = 1.0;

    /// Throws RangeError unless gamma_m >= 0 and 0 <= eta <= 1.
    void validate() const;
};

MonitoringSpec make_monitoring(Operator c, double gamma_m, double eta);

/// Unconditional (record-averaged) dynamics under monitoring: the model with
/// sqrt(gamma_m) * c appended as a jump operator, so the generator is
/// L + gamma_m D[c]. Efficiency does not enter.
LindbladModel measured_liouvillian(const LindbladModel& model, const MonitoringSpec& spec);

inline constexpr double kInvarianceTolerance = 1e-10;

struct InvarianceReport
{
    double residual_norm;  ///< |D[c] rho_ss|_F
    bool invariant;        ///< residual_norm <= tolerance
    double tolerance;
    DensityMatrix steady_state_used;
};

/// Checks D[c] rho_ss = 0 for the unique steady state of `model`.
InvarianceReport invariance_check(const LindbladModel& model,
                                  const Operator& c,
                                  double tolerance = kInvarianceTolerance);

struct SweepPoint
{
    double gamma_m = 0.0;
    std::optional<DensityMatrix> steady_state;
    /// |rho_ss(gamma_m) - rho_ss(0)|_F; NaN when this point failed.
    double drift = 0.0;
    /// Empty on success, otherwise the failure message for this point.
    std::string error;

    bool ok() const { return error.empty(); }
};

/// Steady state of L + gamma D[c] for each gamma, with drift measured against
/// the gamma = 0 steady state. A degenerate point is recorded and the sweep
/// continues; a degenerate reference throws.
std::vector<SweepPoint> gamma_sweep(const LindbladModel& model, const Operator& c, std::span<const double> gammas);

/// `points` log-spaced rates over [lo, hi] * model.characteristic_rate().
std::vector<double> default_sweep_gammas(const LindbladModel& model,
                                         std::size_t points = 8,
                                         double lo = 1e-2,
                                         double hi = 1e1);

}  // namespace contmeas
