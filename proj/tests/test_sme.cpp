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

#include <algorithm>
#include <cmath>
#include <limits>

#include "contmeas/errors.hpp"
#include "contmeas/models.hpp"
#include "contmeas/rng.hpp"
#include "contmeas/sme.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace contmeas;
using namespace contmeas::testing;

namespace {

double median(std::vector<double> xs)
{
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

TEST_SUITE("sme")
{
    TEST_CASE("innovation")
    {
        const Operator sz = pauli(Pauli::z);
        CHECK(innovation_apply(sz, diag2(1.0, 0.0)).norm() == 0.0);
        CHECK(distance(innovation_apply(sz, diag2(0.5, 0.5)), sz) == 0.0);
        for (int k = 0; k < 5; ++k) {
            CHECK(innovation_apply(identity(3), random_state(3).op()).norm() < 1e-15);
        }
        CHECK(std::abs(trace(innovation_apply(random_operator(3), random_state(3).op()))) < 1e-14);
        CHECK_THROWS_AS(innovation_apply(sz, diag2(0.6, 0.6)), NonUnitTrace);
    }

    TEST_CASE("step without noise is the master-equation Euler step")
    {
        const auto model = thermal_qubit({0.7, 0.4, 0.3});
        const DensityMatrix rho = random_state(2);
        const double dt = 1e-3;
        for (const auto& spec : {make_monitoring(pauli(Pauli::x), 2.0, 0.0), make_monitoring(pauli(Pauli::x), 0.0, 1.0)}) {
            const Operator measured = liouvillian_apply(measured_liouvillian(model, spec), rho.op());
            Operator expected = rho.op() + dt * measured;
            expected /= expected.trace();
            const auto out = sme_step(rho, model, spec, dt, 0.37);
            CHECK(distance(out.op(), expected) < 1e-14);
        }
    }

    TEST_CASE("steady state is a fixed point without noise")
    {
        const QubitThermalParams p{3.0, 1.0, 0.0};
        const auto rho_ss = thermal_qubit_steady_state(p);
        const auto out = sme_step(rho_ss, thermal_qubit(p), qnd_monitoring(5.0, 1.0), 1e-3, 0.0);
        CHECK(distance(out.op(), rho_ss.op()) < 1e-12);
    }

    TEST_CASE("one-step hand evaluation")
    {
        const auto out = sme_step(DensityMatrix(diag2(0.5, 0.5)), thermal_qubit({1.0, 1.0, 0.0}), qnd_monitoring(1.0, 1.0),
                                  1e-3, 0.05);
        CHECK(out.op()(0, 0).real() == doctest::Approx(0.55).epsilon(1e-14));
        CHECK(out.op()(1, 1).real() == doctest::Approx(0.45).epsilon(1e-14));
        CHECK(std::abs(out.op()(0, 1)) < 1e-16);
    }

    TEST_CASE("record increments")
    {
        const auto spec = qnd_monitoring(1.0, 1.0);
        CHECK(record_increment(DensityMatrix(diag2(0.5, 0.5)), spec, 0.123, 1e-3) == 0.123);
        CHECK(record_increment(DensityMatrix(diag2(1.0, 0.0)), spec, 0.0, 1e-3) == doctest::Approx(2e-3).epsilon(1e-14));
        CHECK(record_increment(DensityMatrix(diag2(1.0, 0.0)), qnd_monitoring(1.0, 0.0), 0.4, 1e-3) == 0.4);
        // general c uses Tr[(c + c^dagger) rho]
        const auto lowering = make_monitoring(pauli(Pauli::minus), 4.0, 1.0);
        const DensityMatrix plus(0.5 * (identity(2) + pauli(Pauli::x)));
        CHECK(record_increment(plus, lowering, 0.0, 0.01) == doctest::Approx(2.0 * 1.0 * 0.01).epsilon(1e-14));
    }

    TEST_CASE("config validation")
    {
        TrajectoryConfig cfg;
        cfg.dt = 0.0;
        CHECK_THROWS_AS(cfg.validate(), StepSizeInvalid);
        cfg.dt = 1e-3;
        cfg.sample_stride = 0;
        CHECK_THROWS_AS(cfg.validate(), RangeError);
        cfg.sample_stride = 1;
        cfg.t_final = -1.0;
        CHECK_THROWS_AS(cfg.validate(), StepSizeInvalid);
        cfg.t_final = 0.5;
        CHECK(cfg.n_steps() == 500);
    }

    TEST_CASE("path layout and supplied noise")
    {
        const auto model = thermal_qubit({1.0, 0.5, 0.0});
        const auto spec = qnd_monitoring(1.0, 1.0);
        TrajectoryConfig cfg;
        cfg.dt = 1e-3;
        cfg.t_final = 0.25;
        cfg.seed = 99;
        cfg.stream = 4;
        cfg.sample_stride = 30;
        const auto rho0 = DensityMatrix::maximally_mixed(2);
        const auto path = simulate_trajectory(rho0, model, spec, cfg);
        CHECK(path.times.size() == sample_steps(250, 30).size());
        CHECK(path.states.size() == path.times.size());
        CHECK(path.expectations.size() == path.times.size());
        CHECK(path.record.increments.size() == 250);
        CHECK(path.record.dt == cfg.dt);
        CHECK(path.times.back() == doctest::Approx(0.25));
        CHECK(std::adjacent_find(path.times.begin(), path.times.end(), std::greater_equal<>{}) == path.times.end());

        const auto w = wiener_increments(99, 4, 250, 1e-3);
        const auto same = simulate_trajectory(rho0, model, spec, cfg, w);
        CHECK(same.states.back().op() == path.states.back().op());
        CHECK(same.record.increments == path.record.increments);
        const std::vector<double> short_noise(10, 0.0);
        CHECK_THROWS_AS(simulate_trajectory(rho0, model, spec, cfg, short_noise), LengthMismatch);

        cfg.store_record = false;
        CHECK(simulate_trajectory(rho0, model, spec, cfg).record.increments.empty());
        CHECK_THROWS_AS(simulate_trajectory(DensityMatrix::maximally_mixed(3), model, spec, cfg), DimensionMismatch);
    }

    TEST_CASE("no measurement reduces to the master equation")
    {
        const QubitThermalParams p{0.75, 0.25, 0.0};
        const auto model = thermal_qubit(p);
        TrajectoryConfig cfg;
        cfg.dt = 1e-4;
        cfg.t_final = 2.0;
        cfg.sample_stride = 1000;
        const auto rho0 = DensityMatrix::basis_state(2, 1);
        const auto path = simulate_trajectory(rho0, model, qnd_monitoring(0.0, 1.0), cfg);
        const auto reference = propagate_sampled(model, rho0, cfg.dt, cfg.n_steps(), cfg.sample_stride);
        for (std::size_t k = 0; k < path.states.size(); ++k) {
            CHECK(distance(path.states[k].op(), reference[k].op()) < 1e-4);
        }
    }

    TEST_CASE("trace and hermiticity")
    {
        const auto model = thermal_qubit({0.75, 0.25, 0.0});
        const auto spec = make_monitoring(pauli(Pauli::x), 1.0, 0.8);
        TrajectoryConfig cfg;
        cfg.dt = 1e-3;
        cfg.t_final = 1.0;
        cfg.seed = 5;
        const DensityMatrix start(diag2(0.3, 0.7));
        const auto path = simulate_trajectory(start, model, spec, cfg);
        double worst = 0.0;
        for (const auto& s : path.states) {
            worst = std::max(worst, std::abs(s.op().trace() - Complex(1.0)));
            CHECK(s.op() == s.op().adjoint());
            CHECK(min_eigenvalue(s.op()) >= -1e-6);
        }
        CHECK(worst <= 4e-16);

        cfg.renormalize = false;
        const auto raw = simulate_trajectory(start, model, spec, cfg);
        const double drift = std::abs(raw.states.back().op().trace() - Complex(1.0));
        MESSAGE("unrenormalized trace drift " << drift);
        CHECK(drift < 1e-2);
    }

    TEST_CASE("positivity is monitored, not clipped")
    {
        const auto model = thermal_qubit({0.75, 0.25, 0.0});
        TrajectoryConfig cfg;
        cfg.dt = 0.05;
        cfg.t_final = 20.0;
        std::size_t aborted = 0;
        for (std::uint64_t s = 0; s < 20; ++s) {
            cfg.seed = s;
            try {
                simulate_trajectory(DensityMatrix::maximally_mixed(2), model, qnd_monitoring(40.0, 1.0), cfg);
            } catch (const PositivityViolation& e) {
                CHECK(e.eigenvalue < -cfg.psd_tol);
                ++aborted;
            } catch (const StateBlowup&) {
                ++aborted;
            }
        }
        CHECK(aborted > 0);

        // at gamma_m dt = 1e-3 the qubit fixtures stay positive
        cfg.dt = 1e-3;
        cfg.t_final = 2.0;
        cfg.sample_stride = 1;
        for (std::uint64_t s = 0; s < 20; ++s) {
            cfg.seed = s;
            CHECK_NOTHROW(simulate_trajectory(DensityMatrix::maximally_mixed(2), model, qnd_monitoring(1.0, 1.0), cfg));
        }
    }

    TEST_CASE("pure measurement localizes")
    {
        const LindbladModel none(zeros(2), {});
        const auto spec = qnd_monitoring(1.0, 1.0);
        TrajectoryConfig cfg;
        cfg.dt = 1e-3;
        cfg.t_final = 3.0;
        cfg.sample_stride = 100;

        // from I/2 the mean purity grows; single paths may dip
        const std::size_t n = 400;
        const std::size_t samples = sample_steps(cfg.n_steps(), cfg.sample_stride).size();
        std::vector<std::vector<double>> purity(n);
        for (std::uint64_t s = 0; s < n; ++s) {
            cfg.seed = 100 + s;
            for (const auto& st : simulate_trajectory(DensityMatrix::maximally_mixed(2), none, spec, cfg).states) {
                purity[s].push_back(st.purity());
            }
        }
        for (std::size_t t = 1; t < samples; ++t) {
            double mean = 0.0, sq = 0.0;
            for (std::size_t s = 0; s < n; ++s) {
                const double d = purity[s][t] - purity[s][t - 1];
                mean += d;
                sq += d * d;
            }
            mean /= n;
            const double se = std::sqrt(std::max(0.0, sq / n - mean * mean) / (n - 1));
            CHECK(mean >= -3.0 * se);
        }
        double final_mean = 0.0;
        for (const auto& p : purity) final_mean += p.back();
        CHECK(final_mean / n > 0.95);
    }

    TEST_CASE("zeno pinning")
    {
        // gamma_up = gamma_down = 0.05, gamma_m = 5: t = 10 / (eta gamma_m) = 2
        const auto model = thermal_qubit({0.05, 0.05, 0.0});
        const auto spec = qnd_monitoring(5.0, 1.0);
        TrajectoryConfig cfg;
        cfg.dt = 2e-4;
        cfg.t_final = 2.0;
        cfg.sample_stride = 10;
        double mean_fraction = 0.0;
        const std::size_t n = 200;
        for (std::uint64_t s = 0; s < n; ++s) {
            cfg.seed = 7;
            cfg.stream = s;
            const auto path = simulate_trajectory(DensityMatrix::maximally_mixed(2), model, spec, cfg);
            const auto pinned = std::count_if(path.expectations.begin(), path.expectations.end(),
                                              [](double z) { return std::abs(z) > 0.9; });
            mean_fraction += static_cast<double>(pinned) / static_cast<double>(path.expectations.size());
        }
        mean_fraction /= n;
        MESSAGE("mean pinned time fraction " << mean_fraction);
        CHECK(mean_fraction > 0.6);
    }

    TEST_CASE("first passage")
    {
        const LindbladModel none(zeros(2), {});
        TrajectoryConfig cfg;
        cfg.dt = 1e-3;
        cfg.t_final = 1e-3 * 5;
        CHECK_FALSE(first_passage_time(DensityMatrix::maximally_mixed(2), none, qnd_monitoring(1.0, 1.0), cfg,
                                       pauli(Pauli::z), 0.9)
                        .has_value());
        CHECK(*first_passage_time(DensityMatrix::basis_state(2, 0), none, qnd_monitoring(1.0, 1.0), cfg,
                                  pauli(Pauli::z), 0.9) == 0.0);
        CHECK_THROWS_AS(first_passage_time(DensityMatrix::maximally_mixed(2), none, qnd_monitoring(1.0, 1.0), cfg,
                                           identity(3), 0.9),
                        DimensionMismatch);
    }

    TEST_CASE("localization time matches the first-passage series")
    {
        const double oracle = localization_median(0.9);
        CHECK(oracle == doctest::Approx(0.26421536813768).epsilon(1e-8));
        CHECK(localization_survival(1e-3, 0.9) == doctest::Approx(1.0).epsilon(1e-7));

        const LindbladModel none(zeros(2), {});
        for (const double k : {1.0, 10.0}) {
            const auto spec = qnd_monitoring(k, 1.0);
            TrajectoryConfig cfg;
            cfg.dt = 1e-3 / k;
            cfg.t_final = 20.0 / k;
            cfg.seed = 31;
            std::vector<double> fpt;
            for (std::uint64_t s = 0; s < 400; ++s) {
                cfg.stream = s;
                const auto t = first_passage_time(DensityMatrix::maximally_mixed(2), none, spec, cfg, pauli(Pauli::z), 0.9);
                REQUIRE(t.has_value());
                fpt.push_back(*t * k);
            }
            const double m = median(fpt);
            MESSAGE("eta gamma_m = " << k << ": median first passage " << m << " / (eta gamma_m), series " << oracle);
            // four standard errors of a 400-sample median
            CHECK(std::abs(m - oracle) < 0.05);
        }
    }

    TEST_CASE("weak order one")
    {
        const QubitThermalParams p{0.75, 0.25, 0.0};
        const auto model = thermal_qubit(p);
        const auto spec = qnd_monitoring(0.1, 1.0);
        const auto rho0 = DensityMatrix::basis_state(2, 1);
        const double big = 0.05, t_final = 1.0;
        const std::size_t n = 4000;
        double s1 = 0.0, s2 = 0.0, sref = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto fine = wiener_increments(77, i, 160, big / 8.0);
            auto run = [&](std::size_t factor) {
                TrajectoryConfig cfg;
                cfg.dt = big * static_cast<double>(factor) / 8.0;
                cfg.t_final = t_final;
                cfg.sample_stride = 1000000;
                cfg.store_record = false;
                // coarse Euler steps can dip below zero; keep them in the average
                cfg.psd_tol = std::numeric_limits<double>::infinity();
                return simulate_trajectory(rho0, model, spec, cfg, coarsen_increments(fine, factor)).expectations.back();
            };
            s1 += run(8);
            s2 += run(4);
            sref += run(1);
        }
        const double e1 = std::abs(s1 - sref) / n;
        const double e2 = std::abs(s2 - sref) / n;
        MESSAGE("weak errors " << e1 << " " << e2 << " ratio " << e2 / e1);
        CHECK(e2 / e1 > 0.35);
        CHECK(e2 / e1 < 0.65);
    }
}
