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

#include "contmeas/operator.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#include "contmeas/errors.hpp"

namespace contmeas {

Operator identity(std::size_t dim)
{
    return Operator::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

Operator zeros(std::size_t dim)
{
    return Operator::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

std::size_t require_square(const Operator& a, const std::string& what)
{
    if (a.rows() != a.cols() || a.rows() < 1) {
        throw ValidationError(what + ": operator must be square with dim >= 1 (got " +
                              std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + ")");
    }
    return static_cast<std::size_t>(a.rows());
}

void require_same_dim(const Operator& a, const Operator& b, const std::string& what)
{
    const auto da = require_square(a, what);
    const auto db = require_square(b, what);
    if (da != db) {
        throw DimensionMismatch(da, db, what);
    }
}

Operator dagger(const Operator& a)
{
    return a.adjoint();
}

Operator commutator(const Operator& a, const Operator& b)
{
    require_same_dim(a, b, "commutator");
    return a * b - b * a;
}

Operator anticommutator(const Operator& a, const Operator& b)
{
    require_same_dim(a, b, "anticommutator");
    return a * b + b * a;
}

double frobenius_norm(const Operator& a)
{
    return a.norm();
}

Complex trace(const Operator& a)
{
    return a.trace();
}

Operator hermitize(const Operator& a)
{
    return 0.5 * (a + a.adjoint());
}

double real_trace_product(const Operator& a, const Operator& b)
{
    // Tr(ab) = sum_ij a_ij b_ji
    return (a.transpose().cwiseProduct(b)).sum().real();
}

ComplexVector vectorize(const Operator& a)
{
    return Eigen::Map<const ComplexVector>(a.data(), a.size());
}

Operator devectorize(const ComplexVector& v)
{
    const auto n = static_cast<std::size_t>(v.size());
    const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    if (d == 0 || d * d != n) {
        throw LengthMismatch("devectorize: length " + std::to_string(n) + " is not a positive perfect square");
    }
    const auto di = static_cast<Eigen::Index>(d);
    return Eigen::Map<const Operator>(v.data(), di, di);
}

Pauli parse_pauli(std::string_view name)
{
    if (name.starts_with("sigma_")) {
        name.remove_prefix(6);
    }
    if (name == "x") return Pauli::x;
    if (name == "y") return Pauli::y;
    if (name == "z") return Pauli::z;
    if (name == "plus" || name == "+") return Pauli::plus;
    if (name == "minus" || name == "-") return Pauli::minus;
    if (name == "id" || name == "identity" || name == "i") return Pauli::id;
    throw UnknownName("unknown Pauli operator '" + std::string(name) + "'");
}

Operator pauli(Pauli which)
{
    const Complex i{0.0, 1.0};
    Operator m = Operator::Zero(2, 2);
    switch (which) {
        case Pauli::x:
            m(0, 1) = 1.0;
            m(1, 0) = 1.0;
            break;
        case Pauli::y:
            m(0, 1) = -i;
            m(1, 0) = i;
            break;
        case Pauli::z:
            m(0, 0) = 1.0;
            m(1, 1) = -1.0;
            break;
        case Pauli::plus:  // |1><0|
            m(1, 0) = 1.0;
            break;
        case Pauli::minus:  // |0><1|
            m(0, 1) = 1.0;
            break;
        case Pauli::id:
            m(0, 0) = 1.0;
            m(1, 1) = 1.0;
            break;
    }
    return m;
}

Operator pauli(std::string_view name)
{
    return pauli(parse_pauli(name));
}

double min_eigenvalue(const Operator& a)
{
    Eigen::SelfAdjointEigenSolver<Operator> solver(hermitize(a), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

std::string StateDiagnostics::describe() const
{
    std::ostringstream os;
    os << "hermiticity error " << hermiticity_error << (hermitian ? "" : " (FAIL)") << ", trace error "
       << trace_error << (unit_trace ? "" : " (FAIL)") << ", min eigenvalue " << min_eigenvalue
       << (positive ? "" : " (FAIL)");
    return os.str();
}

StateDiagnostics diagnose_state(const Operator& rho, const StateTolerances& tol)
{
    require_square(rho, "density matrix");
    StateDiagnostics d;
    const double norm = rho.norm();
    const double herm = (rho - rho.adjoint()).norm();
    d.hermiticity_error = norm > 0.0 ? herm / norm : herm;
    d.trace_error = std::abs(rho.trace() - Complex{1.0, 0.0});
    d.min_eigenvalue = min_eigenvalue(rho);
    d.hermitian = d.hermiticity_error <= tol.hermiticity;
    d.unit_trace = d.trace_error <= tol.trace;
    d.positive = d.min_eigenvalue >= -tol.psd;
    return d;
}

DensityMatrix::DensityMatrix(Operator op, const StateTolerances& tol) : op_(std::move(op))
{
    const auto diag = diagnose_state(op_, tol);
    if (!diag.ok()) {
        throw InvalidState("not a density matrix: " + diag.describe());
    }
}

DensityMatrix DensityMatrix::unchecked(Operator op)
{
    require_square(op, "density matrix");
    return DensityMatrix(std::move(op), NoCheck{});
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim)
{
    return unchecked(identity(dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::basis_state(std::size_t dim, std::size_t k)
{
    if (k >= dim) {
        throw RangeError("basis_state: index " + std::to_string(k) + " out of range for dim " + std::to_string(dim));
    }
    Operator op = zeros(dim);
    op(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0;
    return unchecked(std::move(op));
}

double DensityMatrix::purity() const
{
    return real_trace_product(op_, op_);
}

double DensityMatrix::expectation(const Operator& a) const
{
    require_same_dim(a, op_, "expectation");
    return real_trace_product(a, op_);
}

Superoperator::Superoperator(Eigen::MatrixXcd matrix) : matrix_(std::move(matrix)), dim_(0)
{
    const auto n = static_cast<std::size_t>(matrix_.rows());
    const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    if (matrix_.rows() != matrix_.cols() || d == 0 || d * d != n) {
        throw LengthMismatch("superoperator must be d^2 x d^2 (got " + std::to_string(matrix_.rows()) + "x" +
                             std::to_string(matrix_.cols()) + ")");
    }
    dim_ = d;
}

Superoperator Superoperator::zero(std::size_t dim)
{
    const auto n = static_cast<Eigen::Index>(dim * dim);
    return Superoperator(Eigen::MatrixXcd::Zero(n, n));
}

Superoperator Superoperator::identity(std::size_t dim)
{
    const auto n = static_cast<Eigen::Index>(dim * dim);
    return Superoperator(Eigen::MatrixXcd::Identity(n, n));
}

Operator Superoperator::apply(const Operator& rho) const
{
    if (require_square(rho, "Superoperator::apply") != dim_) {
        throw DimensionMismatch(dim_, static_cast<std::size_t>(rho.rows()), "Superoperator::apply");
    }
    return devectorize(matrix_ * vectorize(rho));
}

Superoperator Superoperator::operator+(const Superoperator& other) const
{
    if (other.dim_ != dim_) throw DimensionMismatch(dim_, other.dim_, "Superoperator +");
    return Superoperator(matrix_ + other.matrix_);
}

Superoperator Superoperator::operator-(const Superoperator& other) const
{
    if (other.dim_ != dim_) throw DimensionMismatch(dim_, other.dim_, "Superoperator -");
    return Superoperator(matrix_ - other.matrix_);
}

Superoperator Superoperator::operator*(Complex scale) const
{
    return Superoperator(matrix_ * scale);
}

Superoperator Superoperator::operator*(const Superoperator& other) const
{
    if (other.dim_ != dim_) throw DimensionMismatch(dim_, other.dim_, "Superoperator *");
    return Superoperator(matrix_ * other.matrix_);
}

Superoperator left_mult_super(const Operator& x)
{
    const auto d = require_square(x, "left_mult_super");
    return Superoperator(Eigen::kroneckerProduct(identity(d), x).eval());
}

Superoperator right_mult_super(const Operator& y)
{
    const auto d = require_square(y, "right_mult_super");
    return Superoperator(Eigen::kroneckerProduct(y.transpose(), identity(d)).eval());
}

Superoperator sandwich_super(const Operator& x, const Operator& y)
{
    require_same_dim(x, y, "sandwich_super");
    return Superoperator(Eigen::kroneckerProduct(y.transpose(), x).eval());
}

}  // namespace contmeas
