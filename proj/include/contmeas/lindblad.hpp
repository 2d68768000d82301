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

#include <cstddef>
#include <vector>

#include "contmeas/operator.hpp"

namespace contmeas {

/// Generator of a Markovian master equation: Hamiltonian plus jump operators.
///
/// Rates are folded into the jump operators, i.e. a decay channel with rate
/// gamma and operator L is stored as sqrt(gamma) * L. The hamiltonian is in
/// angular-frequency units with hbar = 1.
class LindbladModel
{
public:
    LindbladModel(Operator hamiltonian, std::vector<Operator> jumps);

    /// Model with H = 0.
    static LindbladModel dissipative(std::vector<Operator> jumps);

    std::size_t dim() const { return static_cast<std::size_t>(hamiltonian_.rows()); }
    const Operator& hamiltonian() const { return hamiltonian_; }
    const std::vector<Operator>& jumps() const { return jumps_; }

    /// K = -iH - 1/2 sum_k L_k^dagger L_k, so that L(rho) = K rho + rho K^dagger + sum_k L_k rho L_k^dagger.
    const Operator& effective_generator() const { return effective_; }

    /// sum_k |L_k|_F^2; equals gamma_up + gamma_down for the thermal qubit.
    double characteristic_rate() const;

    LindbladModel with_jump(Operator extra) const;

private:
    Operator hamiltonian_;
    std::vector<Operator> jumps_;
    Operator effective_;
};

/// L rho L^dagger - 1/2 {L^dagger L, rho}
Operator dissipator_apply(const Operator& jump, const Operator& rho);
Superoperator dissipator_matrix(const Operator& jump);

/// -i[H, rho] + sum_k D[L_k] rho
Operator liouvillian_apply(const LindbladModel& model, const Operator& rho);
Superoperator liouvillian_matrix(const LindbladModel& model);

/// Default singular-value cutoff, relative to the largest singular value.
inline constexpr double kKernelThreshold = 1e-10;

/// Number of singular values of the Liouvillian below threshold * sigma_max.
std::size_t kernel_dimension(const LindbladModel& model, double relative_threshold = kKernelThreshold);

/// Unique steady state from the SVD nullspace of the Liouvillian matrix.
/// Throws DegenerateSteadyState when the kernel is not one-dimensional and
/// NonPhysicalKernel when the kernel vector has (numerically) zero trace.
DensityMatrix steady_state(const LindbladModel& model, double relative_threshold = kKernelThreshold);

/// Fixed-step classical RK4 integration of d rho/dt = L rho up to t_final.
/// When t_final is not a multiple of dt the last step is shortened.
DensityMatrix propagate(const LindbladModel& model, const DensityMatrix& rho0, double t_final, double dt);

/// Step indices 0, stride, 2*stride, ... plus n_steps itself.
std::vector<std::size_t> sample_steps(std::size_t n_steps, std::size_t stride);

/// RK4 states at sample_steps(n_steps, stride), i.e. times step * dt.
std::vector<DensityMatrix> propagate_sampled(const LindbladModel& model,
                                             const DensityMatrix& rho0,
                                             double dt,
                                             std::size_t n_steps,
                                             std::size_t stride);

}  // namespace contmeas
