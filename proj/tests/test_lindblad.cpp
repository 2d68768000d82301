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

#include <limits>

#include <Eigen/Eigenvalues>

#include "contmeas/errors.hpp"
#include "contmeas/lindblad.hpp"
#include "contmeas/models.hpp"
#include "support.hpp"

using namespace contmeas;
using namespace contmeas::testing;

namespace {

LindbladModel random_model(std::size_t d, std::size_t n_jumps)
{
    std::vector<Operator> jumps;
    for (std::size_t k = 0; k < n_jumps; ++k) jumps.push_back(random_operator(d));
    return LindbladModel(random_hermitian(d), jumps);
}

}  // namespace

TEST_SUITE("lindblad")
{
    TEST_CASE("model validation")
    {
        CHECK_THROWS_AS(LindbladModel(random_operator(2), {}), ValidationError);
        CHECK_THROWS_AS(LindbladModel(identity(2), {identity(3)}), DimensionMismatch);
        CHECK_THROWS_AS(LindbladModel(Operator::Zero(2, 3), {}), ValidationError);

        const auto m = thermal_qubit({3.0, 1.0, 0.0});
        CHECK(m.dim() == 2);
        CHECK(m.jumps().size() == 2);
        CHECK(m.characteristic_rate() == doctest::Approx(4.0));
        CHECK(m.with_jump(pauli(Pauli::z)).jumps().size() == 3);
    }

    TEST_CASE("dissipator")
    {
        const Operator sz = pauli(Pauli::z);
        CHECK(dissipator_apply(sz, diag2(0.7, 0.3)).norm() == 0.0);
        CHECK(dissipator_apply(random_operator(3), zeros(3)).norm() == 0.0);
        CHECK(distance(dissipator_apply(sz, ket_bra(2, 0, 1)), -2.0 * ket_bra(2, 0, 1)) < 1e-15);

        for (int k = 0; k < 10; ++k) {
            const Operator l = random_operator(3);
            const Operator rho = random_state(3).op();
            CHECK(relative_distance(dissipator_matrix(l).apply(rho), dissipator_apply(l, rho)) < 1e-12);
        }
    }

    TEST_CASE("liouvillian examples")
    {
        const QubitThermalParams p{3.0, 1.0, 0.0};
        const auto m = thermal_qubit(p);
        CHECK(liouvillian_apply(m, thermal_qubit_steady_state(p).op()).norm() < 1e-12);

        const LindbladModel trivial(zeros(2), {});
        CHECK(liouvillian_apply(trivial, random_state(2).op()).norm() == 0.0);
        CHECK(liouvillian_matrix(trivial).matrix().isZero(0.0));

        const auto decay = thermal_qubit({1.0, 0.0, 0.0});
        CHECK(distance(liouvillian_apply(decay, diag2(0.0, 1.0)), diag2(1.0, -1.0)) < 1e-15);
    }

    TEST_CASE("matrix and map forms agree")
    {
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const std::size_t d = 2 + static_cast<std::size_t>(k % 3);
            const auto m = random_model(d, 1 + static_cast<std::size_t>(k % 3));
            const Operator rho = random_operator(d);
            const Operator map = liouvillian_apply(m, rho);
            worst = std::max(worst, (liouvillian_matrix(m).apply(rho) - map).norm() / map.norm());
        }
        CHECK(worst < 1e-12);
    }

    TEST_CASE("trace and hermiticity preservation")
    {
        for (int k = 0; k < 20; ++k) {
            const auto m = random_model(3, 2);
            const Operator rho = random_hermitian(3);
            const Operator out = liouvillian_apply(m, rho);
            CHECK(std::abs(trace(out)) <= 1e-12 * std::max(1.0, rho.norm()) * std::max(1.0, m.characteristic_rate()));
            CHECK((out - out.adjoint()).norm() <= 1e-12 * std::max(1.0, out.norm()));
        }
    }

    TEST_CASE("steady state of the thermal qubit")
    {
        auto check = [](double down, double up, Operator expected) {
            const auto rho = steady_state(thermal_qubit({down, up, 0.0}));
            CHECK(distance(rho.op(), expected) < 1e-12);
        };
        check(3.0, 1.0, diag2(0.75, 0.25));
        check(1.0, 1.0, diag2(0.5, 0.5));
        check(1.0, 0.0, diag2(1.0, 0.0));
        CHECK(kernel_dimension(thermal_qubit({3.0, 1.0, 0.0})) == 1);

        for (int k = 0; k < 20; ++k) {
            const QubitThermalParams p{uniform(0.01, 5.0), uniform(0.01, 5.0), 0.0};
            CHECK(distance(steady_state(thermal_qubit(p)).op(), thermal_qubit_steady_state(p).op()) < 1e-12);
        }
    }

    TEST_CASE("degenerate kernels are reported")
    {
        const LindbladModel trivial(zeros(2), {});
        CHECK(kernel_dimension(trivial) == 4);
        CHECK_THROWS_AS(steady_state(trivial), DegenerateSteadyState);
        try {
            steady_state(LindbladModel::dissipative({pauli(Pauli::z)}));
            FAIL("expected DegenerateSteadyState");
        } catch (const DegenerateSteadyState& e) {
            CHECK(e.kernel_dimension == 2);
        }
    }

    TEST_CASE("steady state is independent of the kernel phase")
    {
        // Driven, damped qubit: the kernel has off-diagonal coherences.
        const LindbladModel m(0.5 * pauli(Pauli::x) + 0.3 * pauli(Pauli::z), {pauli(Pauli::minus)});
        const auto rho = steady_state(m);
        CHECK(liouvillian_apply(m, rho.op()).norm() < 1e-12);
        CHECK(std::abs(rho.op()(0, 1)) > 0.1);
        CHECK(diagnose_state(rho.op()).ok());
    }

    TEST_CASE("propagation")
    {
        const QubitThermalParams p{0.75, 0.25, 0.0};
        const auto m = thermal_qubit(p);
        const auto rho0 = DensityMatrix::basis_state(2, 1);
        CHECK(propagate(m, rho0, 0.0, 0.1).op() == rho0.op());
        CHECK_THROWS_AS(propagate(m, rho0, 1.0, 0.0), StepSizeInvalid);
        CHECK_THROWS_AS(propagate(m, rho0, -1.0, 0.1), StepSizeInvalid);

        const auto late = propagate(m, rho0, 50.0, 0.01);
        CHECK(distance(late.op(), thermal_qubit_steady_state(p).op()) < 1e-8);

        // p1(t) = p + (1 - p) exp(-(up + down) t)
        const double pe = p.excited_population();
        const auto states = propagate_sampled(m, rho0, 0.01, 500, 50);
        const auto steps = sample_steps(500, 50);
        REQUIRE(states.size() == steps.size());
        for (std::size_t k = 0; k < states.size(); ++k) {
            const double t = static_cast<double>(steps[k]) * 0.01;
            CHECK(states[k].op()(1, 1).real() == doctest::Approx(pe + (1.0 - pe) * std::exp(-t)).epsilon(1e-6));
        }

        // shortened last step lands exactly on t_final
        const double t = 0.37;
        const double exact = pe + (1.0 - pe) * std::exp(-t);
        CHECK(propagate(m, rho0, t, 0.1).op()(1, 1).real() == doctest::Approx(exact).epsilon(1e-5));
    }

    TEST_CASE("sample steps")
    {
        CHECK(sample_steps(10, 3) == std::vector<std::size_t>{0, 3, 6, 9, 10});
        CHECK(sample_steps(9, 3) == std::vector<std::size_t>{0, 3, 6, 9});
        CHECK(sample_steps(0, 1) == std::vector<std::size_t>{0});
    }

    TEST_CASE("rk4 is fourth order")
    {
        const QubitThermalParams p{0.75, 0.25, 0.0};
        const auto m = thermal_qubit(p);
        const auto rho0 = DensityMatrix::basis_state(2, 1);
        const double exact = p.excited_population() + (1.0 - p.excited_population()) * std::exp(-2.0);
        const double e1 = std::abs(propagate(m, rho0, 2.0, 0.2).op()(1, 1).real() - exact);
        const double e2 = std::abs(propagate(m, rho0, 2.0, 0.1).op()(1, 1).real() - exact);
        MESSAGE("rk4 error ratio " << e1 / e2);
        CHECK(e1 / e2 > 12.0);
        CHECK(e1 / e2 < 20.0);
    }

    TEST_CASE("nullspace agrees with long-time propagation")
    {
        for (int k = 0; k < 5; ++k) {
            const auto m = random_model(2, 2);
            const auto ss = steady_state(m);
            // run for 40 relaxation times of the slowest decaying mode
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(liouvillian_matrix(m).matrix(), false);
            double gap = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
                const double re = -eig.eigenvalues()(i).real();
                if (re > 1e-9) gap = std::min(gap, re);
            }
            const double fastest = eig.eigenvalues().cwiseAbs().maxCoeff();
            const auto late = propagate(m, random_state(2), 40.0 / gap, 0.05 / fastest);
            CHECK(distance(late.op(), ss.op()) < 1e-8);
        }
    }
}
