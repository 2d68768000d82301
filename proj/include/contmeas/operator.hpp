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

#include <complex>
#include <cstddef>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace contmeas {

using Complex = std::complex<double>;

/// Dense d x d complex matrix. Hamiltonians, jump operators, measurement
/// operators and density matrices all live in this type.
using Operator = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/*
 * Conventions used project-wide:
 *
 *  - Qubit basis ordering is (|0>, |1>) and sigma_z = diag(+1, -1), so
 *    <sigma_z> = +1 on |0>. sigma_- = |0><1|, sigma_+ = |1><0|.
 *  - vec() stacks columns: vec(X rho Y) = (Y^T kron X) vec(rho). This is the
 *    native storage order of Operator, so vectorize/devectorize are copies.
 */

Operator identity(std::size_t dim);
Operator zeros(std::size_t dim);

/// Throws ValidationError unless `a` is square with dim >= 1.
std::size_t require_square(const Operator& a, const std::string& what);
void require_same_dim(const Operator& a, const Operator& b, const std::string& what);

Operator dagger(const Operator& a);
Operator commutator(const Operator& a, const Operator& b);
Operator anticommutator(const Operator& a, const Operator& b);
double frobenius_norm(const Operator& a);
Complex trace(const Operator& a);

/// (a + a^dagger) / 2
Operator hermitize(const Operator& a);

/// Re Tr(a b) without forming the product.
double real_trace_product(const Operator& a, const Operator& b);

ComplexVector vectorize(const Operator& a);
/// Inverse of vectorize. The length must be a perfect square.
Operator devectorize(const ComplexVector& v);

enum class Pauli { x, y, z, plus, minus, id };

Pauli parse_pauli(std::string_view name);
Operator pauli(Pauli which);
/// Accepts x, y, z, plus, minus, id and the sigma_ prefixed spellings.
Operator pauli(std::string_view name);

/// Tolerances for what counts as a physical density matrix.
struct StateTolerances
{
    double hermiticity = 1e-12;  ///< relative to |rho|_F
    double trace = 1e-10;
    double psd = 1e-9;
};

struct StateDiagnostics
{
    double hermiticity_error = 0.0;  ///< |rho - rho^dagger|_F / |rho|_F
    double trace_error = 0.0;        ///< |Tr rho - 1|
    double min_eigenvalue = 0.0;
    bool hermitian = true;
    bool unit_trace = true;
    bool positive = true;

    bool ok() const { return hermitian && unit_trace && positive; }
    std::string describe() const;
};

StateDiagnostics diagnose_state(const Operator& rho, const StateTolerances& tol = {});

/// Smallest eigenvalue of the Hermitian part of `a`.
double min_eigenvalue(const Operator& a);

class DensityMatrix
{
public:
    /// Validates against `tol`; throws InvalidState with diagnostics on failure.
    explicit DensityMatrix(Operator op, const StateTolerances& tol = {});

    /// Skips validation. For integrator internals that check states separately.
    static DensityMatrix unchecked(Operator op);

    static DensityMatrix maximally_mixed(std::size_t dim);
    /// |k><k|
    static DensityMatrix basis_state(std::size_t dim, std::size_t k);

    const Operator& op() const { return op_; }
    std::size_t dim() const { return static_cast<std::size_t>(op_.rows()); }

    double purity() const;
    /// Re Tr(a rho)
    double expectation(const Operator& a) const;

private:
    struct NoCheck
    {
    };
    DensityMatrix(Operator op, NoCheck) : op_(std::move(op)) {}

    Operator op_;
};

/// Linear map on column-vectorized d x d operators, stored as a d^2 x d^2 matrix.
class Superoperator
{
public:
    explicit Superoperator(Eigen::MatrixXcd matrix);

    static Superoperator zero(std::size_t dim);
    static Superoperator identity(std::size_t dim);

    std::size_t dim() const { return dim_; }
    const Eigen::MatrixXcd& matrix() const { return matrix_; }

    Operator apply(const Operator& rho) const;

    Superoperator operator+(const Superoperator& other) const;
    Superoperator operator-(const Superoperator& other) const;
    Superoperator operator*(Complex scale) const;
    /// Composition: (*this)(other(rho)).
    Superoperator operator*(const Superoperator& other) const;

private:
    Eigen::MatrixXcd matrix_;
    std::size_t dim_;
};

/// Superoperator of rho -> x rho, i.e. I kron x.
Superoperator left_mult_super(const Operator& x);
/// Superoperator of rho -> rho y, i.e. y^T kron I.
Superoperator right_mult_super(const Operator& y);
/// Superoperator of rho -> x rho y. Equals left_mult_super(x) * right_mult_super(y).
Superoperator sandwich_super(const Operator& x, const Operator& y);

}  // namespace contmeas
