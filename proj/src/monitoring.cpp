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

#include "contmeas/monitoring.hpp"

#include <cmath>
#include <limits>

#include "contmeas/errors.hpp"

namespace contmeas {

void MonitoringSpec::validate() const
{
    require_square(c, "measurement operator c");
    if (!(gamma_m >= 0.0) || !std::isfinite(gamma_m)) {
        throw RangeError("gamma_m must be a finite value >= 0 (got " + std::to_string(gamma_m) + ")");
    }
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw RangeError("eta must lie in [0, 1] (got " + std::to_string(eta) + ")");
    }
}

MonitoringSpec make_monitoring(Operator c, double gamma_m, double eta)
{
    MonitoringSpec spec{std::move(c), gamma_m, eta};
    spec.validate();
    return spec;
}

LindbladModel measured_liouvillian(const LindbladModel& model, const MonitoringSpec& spec)
{
    spec.validate();
    const auto d = static_cast<std::size_t>(spec.c.rows());
    if (d != model.dim()) {
        throw DimensionMismatch(model.dim(), d, "measured_liouvillian");
    }
    return model.with_jump(std::sqrt(spec.gamma_m) * spec.c);
}

InvarianceReport invariance_check(const LindbladModel& model, const Operator& c, double tolerance)
{
    const auto d = require_square(c, "invariance_check");
    if (d != model.dim()) {
        throw DimensionMismatch(model.dim(), d, "invariance_check");
    }
    auto rho = steady_state(model);
    const double residual = frobenius_norm(dissipator_apply(c, rho.op()));
    return InvarianceReport{residual, residual <= tolerance, tolerance, std::move(rho)};
}

std::vector<SweepPoint> gamma_sweep(const LindbladModel& model, const Operator& c, std::span<const double> gammas)
{
    const auto d = require_square(c, "gamma_sweep");
    if (d != model.dim()) {
        throw DimensionMismatch(model.dim(), d, "gamma_sweep");
    }
    for (const double g : gammas) {
        if (!(g >= 0.0) || !std::isfinite(g)) {
            throw RangeError("gamma_sweep: rates must be finite and >= 0 (got " + std::to_string(g) + ")");
        }
    }
    const auto reference = steady_state(model);
    std::vector<SweepPoint> out;
    out.reserve(gammas.size());
    for (const double g : gammas) {
        SweepPoint point;
        point.gamma_m = g;
        try {
            const auto measured = measured_liouvillian(model, MonitoringSpec{c, g, 1.0});
            point.steady_state = steady_state(measured);
            point.drift = frobenius_norm(point.steady_state->op() - reference.op());
        } catch (const NumericalError& e) {
            point.error = e.what();
            point.drift = std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(std::move(point));
    }
    return out;
}

std::vector<double> default_sweep_gammas(const LindbladModel& model, std::size_t points, double lo, double hi)
{
    if (points == 0 || !(lo > 0.0) || !(hi >= lo)) {
        throw RangeError("default_sweep_gammas: need points >= 1 and 0 < lo <= hi");
    }
    const double scale = model.characteristic_rate();
    std::vector<double> out(points);
    if (points == 1) {
        out[0] = lo * scale;
        return out;
    }
    const double step = std::log(hi / lo) / static_cast<double>(points - 1);
    for (std::size_t k = 0; k < points; ++k) {
        out[k] = scale * lo * std::exp(step * static_cast<double>(k));
    }
    return out;
}

}  // namespace contmeas
