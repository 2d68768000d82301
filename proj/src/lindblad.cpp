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

#include "contmeas/lindblad.hpp"

#include <cmath>
#include <string>

#include "contmeas/errors.hpp"

namespace contmeas {

namespace {

constexpr double kHermitianTol = 1e-12;

// Reusable RK4 stepper; keeps stage buffers between calls.
class Rk4
{
public:
    explicit Rk4(const LindbladModel& model) : model_(model)
    {
        const auto d = static_cast<Eigen::Index>(model.dim());
        for (auto* m : {&k1_, &k2_, &k3_, &k4_, &tmp_, &work_}) {
            m->resize(d, d);
        }
    }

    void step(Operator& rho, double h)
    {
        rhs(rho, k1_);
        tmp_ = rho + (0.5 * h) * k1_;
        rhs(tmp_, k2_);
        tmp_ = rho + (0.5 * h) * k2_;
        rhs(tmp_, k3_);
        tmp_ = rho + h * k3_;
        rhs(tmp_, k4_);
        rho += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    }

private:
    void rhs(const Operator& rho, Operator& out)
    {
        const Operator& k = model_.effective_generator();
        out.noalias() = k * rho;
        out.noalias() += rho * k.adjoint();
        for (const auto& l : model_.jumps()) {
            work_.noalias() = l * rho;
            out.noalias() += work_ * l.adjoint();
        }
    }

    const LindbladModel& model_;
    Operator k1_, k2_, k3_, k4_, tmp_, work_;
};

void check_step(double dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw StepSizeInvalid("dt must be positive and finite (got " + std::to_string(dt) + ")");
    }
}

}  // namespace

LindbladModel::LindbladModel(Operator hamiltonian, std::vector<Operator> jumps)
    : hamiltonian_(std::move(hamiltonian)), jumps_(std::move(jumps))
{
    const auto d = require_square(hamiltonian_, "LindbladModel hamiltonian");
    const double herm = (hamiltonian_ - hamiltonian_.adjoint()).norm();
    if (herm > kHermitianTol * std::max(1.0, hamiltonian_.norm())) {
        throw ValidationError("LindbladModel: hamiltonian is not Hermitian (|H - H^dagger|_F = " +
                              std::to_string(herm) + ")");
    }
    const Complex i{0.0, 1.0};
    effective_ = -i * hamiltonian_;
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
        const auto dk = require_square(jumps_[k], "LindbladModel jump " + std::to_string(k));
        if (dk != d) {
            throw DimensionMismatch(d, dk, "LindbladModel jump " + std::to_string(k));
        }
        effective_.noalias() -= 0.5 * jumps_[k].adjoint() * jumps_[k];
    }
}

LindbladModel LindbladModel::dissipative(std::vector<Operator> jumps)
{
    if (jumps.empty()) {
        throw ValidationError("LindbladModel::dissipative needs at least one jump operator to fix the dimension");
    }
    const auto d = require_square(jumps.front(), "LindbladModel jump 0");
    return LindbladModel(zeros(d), std::move(jumps));
}

double LindbladModel::characteristic_rate() const
{
    double rate = 0.0;
    for (const auto& l : jumps_) {
        rate += l.squaredNorm();
    }
    return rate;
}

LindbladModel LindbladModel::with_jump(Operator extra) const
{
    auto jumps = jumps_;
    jumps.push_back(std::move(extra));
    return LindbladModel(hamiltonian_, std::move(jumps));
}

Operator dissipator_apply(const Operator& jump, const Operator& rho)
{
    require_same_dim(jump, rho, "dissipator_apply");
    const Operator ldl = jump.adjoint() * jump;
    return jump * rho * jump.adjoint() - 0.5 * (ldl * rho + rho * ldl);
}

Superoperator dissipator_matrix(const Operator& jump)
{
    const Operator ldl = jump.adjoint() * jump;
    return sandwich_super(jump, jump.adjoint()) - (left_mult_super(ldl) + right_mult_super(ldl)) * 0.5;
}

Operator liouvillian_apply(const LindbladModel& model, const Operator& rho)
{
    if (require_square(rho, "liouvillian_apply") != model.dim()) {
        throw DimensionMismatch(model.dim(), static_cast<std::size_t>(rho.rows()), "liouvillian_apply");
    }
    const Complex i{0.0, 1.0};
    Operator out = -i * commutator(model.hamiltonian(), rho);
    for (const auto& l : model.jumps()) {
        out += dissipator_apply(l, rho);
    }
    return out;
}

Superoperator liouvillian_matrix(const LindbladModel& model)
{
    const Complex i{0.0, 1.0};
    const Operator& h = model.hamiltonian();
    Superoperator out = (left_mult_super(h) - right_mult_super(h)) * (-i);
    for (const auto& l : model.jumps()) {
        out = out + dissipator_matrix(l);
    }
    return out;
}

namespace {

struct KernelSvd
{
    Eigen::VectorXd singular_values;
    Eigen::MatrixXcd v;
    std::size_t kernel_dim = 0;
};

KernelSvd kernel_svd(const LindbladModel& model, double relative_threshold)
{
    const auto matrix = liouvillian_matrix(model).matrix();
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(matrix, Eigen::ComputeFullV);
    KernelSvd out;
    out.singular_values = svd.singularValues();
    out.v = svd.matrixV();
    const double smax = out.singular_values.size() > 0 ? out.singular_values(0) : 0.0;
    const double cut = relative_threshold * smax;
    for (Eigen::Index k = 0; k < out.singular_values.size(); ++k) {
        // sigma_max == 0 means the zero generator: everything is kernel.
        if (smax == 0.0 || out.singular_values(k) < cut) {
            ++out.kernel_dim;
        }
    }
    return out;
}

}  // namespace

std::size_t kernel_dimension(const LindbladModel& model, double relative_threshold)
{
    return kernel_svd(model, relative_threshold).kernel_dim;
}

DensityMatrix steady_state(const LindbladModel& model, double relative_threshold)
{
    const auto svd = kernel_svd(model, relative_threshold);
    if (svd.kernel_dim != 1) {
        throw DegenerateSteadyState(svd.kernel_dim);
    }
    // Singular values are sorted descending, so the kernel is the last column.
    const ComplexVector v = svd.v.col(svd.v.cols() - 1);
    Operator rho = devectorize(v);
    const Complex tr = rho.trace();
    if (std::abs(tr) < 1e-12) {
        throw NonPhysicalKernel("steady-state kernel vector is traceless (|Tr| = " + std::to_string(std::abs(tr)) +
                                ")");
    }
    // Fix the arbitrary SVD phase before taking the Hermitian part.
    rho /= tr;
    rho = hermitize(rho);
    rho /= rho.trace().real();
    try {
        return DensityMatrix(std::move(rho));
    } catch (const InvalidState& e) {
        throw NonPhysicalKernel(std::string("steady-state kernel is not a density matrix: ") + e.what());
    }
}

DensityMatrix propagate(const LindbladModel& model, const DensityMatrix& rho0, double t_final, double dt)
{
    check_step(dt);
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
        throw StepSizeInvalid("t_final must be non-negative and finite (got " + std::to_string(t_final) + ")");
    }
    if (rho0.dim() != model.dim()) {
        throw DimensionMismatch(model.dim(), rho0.dim(), "propagate");
    }
    Operator rho = rho0.op();
    Rk4 rk4(model);
    const auto n_full = static_cast<std::size_t>(std::floor(t_final / dt * (1.0 + 1e-12)));
    for (std::size_t n = 0; n < n_full; ++n) {
        rk4.step(rho, dt);
    }
    const double rest = t_final - static_cast<double>(n_full) * dt;
    if (rest > 1e-12 * dt) {
        rk4.step(rho, rest);
    }
    return DensityMatrix::unchecked(std::move(rho));
}

std::vector<std::size_t> sample_steps(std::size_t n_steps, std::size_t stride)
{
    if (stride == 0) {
        throw RangeError("sample_stride must be >= 1");
    }
    std::vector<std::size_t> steps;
    steps.reserve(n_steps / stride + 2);
    for (std::size_t s = 0; s <= n_steps; s += stride) {
        steps.push_back(s);
    }
    if (steps.back() != n_steps) {
        steps.push_back(n_steps);
    }
    return steps;
}

std::vector<DensityMatrix> propagate_sampled(const LindbladModel& model,
                                             const DensityMatrix& rho0,
                                             double dt,
                                             std::size_t n_steps,
                                             std::size_t stride)
{
    check_step(dt);
    if (rho0.dim() != model.dim()) {
        throw DimensionMismatch(model.dim(), rho0.dim(), "propagate_sampled");
    }
    const auto steps = sample_steps(n_steps, stride);
    std::vector<DensityMatrix> out;
    out.reserve(steps.size());
    Operator rho = rho0.op();
    Rk4 rk4(model);
    std::size_t done = 0;
    for (const auto target : steps) {
        for (; done < target; ++done) {
            rk4.step(rho, dt);
        }
        out.push_back(DensityMatrix::unchecked(rho));
    }
    return out;
}

}  // namespace contmeas
