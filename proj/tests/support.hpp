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

#include <cmath>
#include <random>

#include "contmeas/operator.hpp"
#include "doctest.h"

namespace contmeas::testing {

inline std::mt19937_64& rng()
{
    static std::mt19937_64 gen(20260101);
    return gen;
}

inline Operator random_operator(std::size_t d)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Operator a(d, d);
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            a(r, c) = Complex(n(rng()), n(rng()));
        }
    }
    return a;
}

inline Operator random_hermitian(std::size_t d)
{
    const Operator a = random_operator(d);
    return 0.5 * (a + a.adjoint());
}

/// Full-rank random density matrix A A^dagger / Tr.
inline DensityMatrix random_state(std::size_t d)
{
    const Operator a = random_operator(d);
    Operator rho = a * a.adjoint();
    rho /= rho.trace();
    return DensityMatrix(hermitize(rho));
}

inline double uniform(double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline double distance(const Operator& a, const Operator& b)
{
    return (a - b).norm();
}

inline double relative_distance(const Operator& a, const Operator& b)
{
    return (a - b).norm() / std::max(1.0, b.norm());
}

inline Operator diag2(double a, double b)
{
    Operator m = Operator::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

inline Operator ket_bra(std::size_t d, std::size_t i, std::size_t j)
{
    Operator m = Operator::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
    return m;
}

}  // namespace contmeas::testing
