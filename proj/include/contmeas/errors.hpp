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
#include <stdexcept>
#include <string>

namespace contmeas {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: shapes, ranges, names, config fields. Maps to CLI exit code 1.
class ValidationError : public Error
{
public:
    using Error::Error;
};

/// The numerics could not produce a trustworthy answer. Maps to CLI exit code 2.
class NumericalError : public Error
{
public:
    using Error::Error;
};

class DimensionMismatch : public ValidationError
{
public:
    DimensionMismatch(std::size_t expected, std::size_t actual, const std::string& what)
        : ValidationError(what + ": dimension mismatch (expected " + std::to_string(expected) +
                          ", got " + std::to_string(actual) + ")")
    {
    }
};

class LengthMismatch : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

class UnknownName : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

class RangeError : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

class StepSizeInvalid : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

class AllRatesZero : public ValidationError
{
public:
    AllRatesZero() : ValidationError("thermal qubit needs gamma_down + gamma_up > 0") {}
};

/// Raised when a fixture would be vacuous, e.g. sigma_x on a p = 1/2 state.
class DegenerateChoice : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

class GridMismatch : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

class UnknownObservable : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

class InvalidState : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

class DegenerateSteadyState : public NumericalError
{
public:
    explicit DegenerateSteadyState(std::size_t kernel_dim)
        : NumericalError("Liouvillian kernel has dimension " + std::to_string(kernel_dim) +
                         " (a unique steady state needs exactly 1)"),
          kernel_dimension(kernel_dim)
    {
    }

    std::size_t kernel_dimension;
};

class NonPhysicalKernel : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

class NonUnitTrace : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

class StateBlowup : public NumericalError
{
public:
    StateBlowup(std::size_t step_index, double norm)
        : NumericalError("conditioned state blew up at step " + std::to_string(step_index) +
                         " (|rho|_F = " + std::to_string(norm) + "); reduce dt"),
          step(step_index)
    {
    }

    std::size_t step;
};

class PositivityViolation : public NumericalError
{
public:
    PositivityViolation(std::size_t step_index, double min_eigenvalue)
        : NumericalError("conditioned state lost positivity at step " + std::to_string(step_index) +
                         " (min eigenvalue " + std::to_string(min_eigenvalue) + ")"),
          step(step_index),
          eigenvalue(min_eigenvalue)
    {
    }

    std::size_t step;
    double eigenvalue;
};

class EnsembleFailure : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

}  // namespace contmeas
