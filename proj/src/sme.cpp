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

#include "contmeas/sme.hpp"

#include <cmath>
#include <string>

#include "contmeas/errors.hpp"
#include "contmeas/rng.hpp"

namespace contmeas {

void TrajectoryConfig::validate() const
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw StepSizeInvalid("trajectory dt must be positive and finite (got " + std::to_string(dt) + ")");
    }
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
        throw StepSizeInvalid("trajectory t_final must be non-negative and finite (got " + std::to_string(t_final) +
                              ")");
    }
    if (sample_stride < 1) {
        throw RangeError("sample_stride must be >= 1");
    }
    if (!(psd_tol >= 0.0)) {
        throw RangeError("psd_tol must be >= 0");
    }
}

std::size_t TrajectoryConfig::n_steps() const
{
    return static_cast<std::size_t>(std::llround(t_final / dt));
}

Operator innovation_apply(const Operator& c, const Operator& rho)
{
    require_same_dim(c, rho, "innovation_apply");
    const Complex tr = rho.trace();
    if (std::abs(tr - Complex{1.0, 0.0}) > 1e-9) {
        throw NonUnitTrace("innovation_apply: Tr(rho) = " + std::to_string(tr.real()) + " differs from 1");
    }
    const Operator c_rho = c * rho;
    const double s = 2.0 * c_rho.trace().real();
    return c_rho + rho * c.adjoint() - s * rho;
}

SmeIntegrator::SmeIntegrator(const LindbladModel& model, const MonitoringSpec& spec)
    : measured_(measured_liouvillian(model, spec)),
      c_(spec.c),
      c_sum_(spec.c + spec.c.adjoint()),
      noise_coeff_(std::sqrt(spec.eta * spec.gamma_m))
{
    const auto d = static_cast<Eigen::Index>(measured_.dim());
    drift_.resize(d, d);
    innov_.resize(d, d);
    work_.resize(d, d);
}

void SmeIntegrator::step(Operator& rho, double dt, double dw, bool renormalize, std::size_t step_index)
{
    // rho is Hermitian on entry, so rho K^dagger = (K rho)^dagger and rho c^dagger = (c rho)^dagger.
    const Operator& k = measured_.effective_generator();
    work_.noalias() = k * rho;
    drift_ = work_ + work_.adjoint();
    for (const auto& l : measured_.jumps()) {
        work_.noalias() = l * rho;
        drift_.noalias() += work_ * l.adjoint();
    }

    const double kick = noise_coeff_ * dw;
    if (kick != 0.0) {
        work_.noalias() = c_ * rho;
        const double s = 2.0 * work_.trace().real();
        innov_ = work_ + work_.adjoint() - s * rho;
        rho += dt * drift_ + kick * innov_;
    } else {
        rho += dt * drift_;
    }

    work_ = 0.5 * (rho + rho.adjoint());
    rho = work_;
    if (renormalize) {
        rho /= rho.trace().real();
    }
    const double norm = rho.norm();
    if (!(norm <= kBlowupNorm)) {
        throw StateBlowup(step_index, norm);
    }
}

double SmeIntegrator::signal(const Operator& rho) const
{
    return real_trace_product(c_sum_, rho);
}

double SmeIntegrator::record_increment(const Operator& rho, double dw, double dt) const
{
    return noise_coeff_ * signal(rho) * dt + dw;
}

DensityMatrix sme_step(const DensityMatrix& rho,
                       const LindbladModel& model,
                       const MonitoringSpec& spec,
                       double dt,
                       double dw,
                       bool renormalize)
{
    if (!(dt > 0.0)) {
        throw StepSizeInvalid("sme_step: dt must be positive");
    }
    if (rho.dim() != model.dim()) {
        throw DimensionMismatch(model.dim(), rho.dim(), "sme_step");
    }
    SmeIntegrator integrator(model, spec);
    Operator next = rho.op();
    integrator.step(next, dt, dw, renormalize);
    return DensityMatrix::unchecked(std::move(next));
}

double record_increment(const DensityMatrix& rho, const MonitoringSpec& spec, double dw, double dt)
{
    spec.validate();
    require_same_dim(spec.c, rho.op(), "record_increment");
    return std::sqrt(spec.eta * spec.gamma_m) * real_trace_product(spec.c + spec.c.adjoint(), rho.op()) * dt + dw;
}

namespace {

void check_inputs(const DensityMatrix& rho0, const LindbladModel& model, const MonitoringSpec& spec,
                  const TrajectoryConfig& config)
{
    config.validate();
    spec.validate();
    if (rho0.dim() != model.dim()) {
        throw DimensionMismatch(model.dim(), rho0.dim(), "simulate_trajectory initial state");
    }
}

template <class Noise>
TrajectoryPath integrate_path(const DensityMatrix& rho0,
                              const LindbladModel& model,
                              const MonitoringSpec& spec,
                              const TrajectoryConfig& config,
                              Noise&& noise)
{
    SmeIntegrator integrator(model, spec);
    const std::size_t n_steps = config.n_steps();
    const auto samples = sample_steps(n_steps, config.sample_stride);

    TrajectoryPath path;
    path.times.reserve(samples.size());
    path.states.reserve(samples.size());
    path.expectations.reserve(samples.size());
    path.record.dt = config.dt;
    if (config.store_record) {
        path.record.increments.reserve(n_steps);
    }

    Operator rho = rho0.op();
    auto store = [&](std::size_t step) {
        const double lambda = min_eigenvalue(rho);
        if (lambda < -config.psd_tol) {
            throw PositivityViolation(step, lambda);
        }
        path.times.push_back(static_cast<double>(step) * config.dt);
        path.states.push_back(DensityMatrix::unchecked(rho));
        path.expectations.push_back(0.5 * integrator.signal(rho));
    };

    std::size_t next_sample = 0;
    for (std::size_t step = 0; step <= n_steps; ++step) {
        if (next_sample < samples.size() && samples[next_sample] == step) {
            store(step);
            ++next_sample;
        }
        if (step == n_steps) {
            break;
        }
        const double dw = noise(step);
        if (config.store_record) {
            path.record.increments.push_back(integrator.record_increment(rho, dw, config.dt));
        }
        integrator.step(rho, config.dt, dw, config.renormalize, step);
    }
    return path;
}

}  // namespace

TrajectoryPath simulate_trajectory(const DensityMatrix& rho0,
                                   const LindbladModel& model,
                                   const MonitoringSpec& spec,
                                   const TrajectoryConfig& config)
{
    check_inputs(rho0, model, spec, config);
    const NoiseStream stream(config.seed, config.stream);
    const double scale = std::sqrt(config.dt);
    return integrate_path(rho0, model, spec, config, [&](std::size_t k) { return scale * stream.normal(k); });
}

TrajectoryPath simulate_trajectory(const DensityMatrix& rho0,
                                   const LindbladModel& model,
                                   const MonitoringSpec& spec,
                                   const TrajectoryConfig& config,
                                   std::span<const double> increments)
{
    check_inputs(rho0, model, spec, config);
    if (increments.size() != config.n_steps()) {
        throw LengthMismatch("simulate_trajectory: expected " + std::to_string(config.n_steps()) +
                             " increments, got " + std::to_string(increments.size()));
    }
    return integrate_path(rho0, model, spec, config, [&](std::size_t k) { return increments[k]; });
}

std::optional<double> first_passage_time(const DensityMatrix& rho0,
                                         const LindbladModel& model,
                                         const MonitoringSpec& spec,
                                         const TrajectoryConfig& config,
                                         const Operator& observable,
                                         double threshold)
{
    check_inputs(rho0, model, spec, config);
    require_same_dim(observable, rho0.op(), "first_passage_time observable");
    SmeIntegrator integrator(model, spec);
    const NoiseStream stream(config.seed, config.stream);
    const double scale = std::sqrt(config.dt);
    Operator rho = rho0.op();
    if (std::abs(real_trace_product(observable, rho)) > threshold) {
        return 0.0;
    }
    const std::size_t n_steps = config.n_steps();
    for (std::size_t step = 0; step < n_steps; ++step) {
        integrator.step(rho, config.dt, scale * stream.normal(step), config.renormalize, step);
        if (std::abs(real_trace_product(observable, rho)) > threshold) {
            return static_cast<double>(step + 1) * config.dt;
        }
    }
    return std::nullopt;
}

}  // namespace contmeas
