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

#include "contmeas/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "contmeas/errors.hpp"

namespace contmeas {

namespace {

// Trajectories are grouped into fixed index blocks; each block is reduced in
// index order and blocks are merged pairwise, so the schedule never matters.
constexpr std::size_t kBlockSize = 16;

struct Moments
{
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x)
    {
        count += 1.0;
        const double delta = x - mean;
        mean += delta / count;
        m2 += delta * (x - mean);
    }

    static Moments merge(const Moments& a, const Moments& b)
    {
        if (a.count == 0.0) return b;
        if (b.count == 0.0) return a;
        Moments out;
        out.count = a.count + b.count;
        const double delta = b.mean - a.mean;
        out.mean = a.mean + delta * (b.count / out.count);
        out.m2 = a.m2 + b.m2 + delta * delta * (a.count * b.count / out.count);
        return out;
    }

    double standard_error() const { return count > 1.0 ? std::sqrt(m2 / (count - 1.0) / count) : 0.0; }
};

struct BlockResult
{
    std::size_t completed = 0;
    std::vector<Operator> state_sum;
    std::vector<std::vector<Moments>> observables;  // [observable][time]
    std::vector<Moments> purity;
    std::vector<std::vector<double>> localization_rows;
    std::vector<TrajectoryFailure> failures;
};

BlockResult empty_block(std::size_t dim, std::size_t n_times, std::size_t n_obs)
{
    BlockResult b;
    b.state_sum.assign(n_times, zeros(dim));
    b.observables.assign(n_obs, std::vector<Moments>(n_times));
    b.purity.assign(n_times, Moments{});
    return b;
}

BlockResult merge(BlockResult a, BlockResult b)
{
    a.completed += b.completed;
    for (std::size_t t = 0; t < a.state_sum.size(); ++t) {
        a.state_sum[t] += b.state_sum[t];
        a.purity[t] = Moments::merge(a.purity[t], b.purity[t]);
    }
    for (std::size_t k = 0; k < a.observables.size(); ++k) {
        for (std::size_t t = 0; t < a.observables[k].size(); ++t) {
            a.observables[k][t] = Moments::merge(a.observables[k][t], b.observables[k][t]);
        }
    }
    for (auto& row : b.localization_rows) {
        a.localization_rows.push_back(std::move(row));
    }
    for (auto& f : b.failures) {
        a.failures.push_back(std::move(f));
    }
    return a;
}

BlockResult merge_range(std::vector<BlockResult>& blocks, std::size_t lo, std::size_t hi)
{
    if (hi - lo == 1) {
        return std::move(blocks[lo]);
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return merge(merge_range(blocks, lo, mid), merge_range(blocks, mid, hi));
}

std::size_t localization_index(const EnsembleConfig& config)
{
    if (config.localization_observable.empty()) {
        return 0;
    }
    for (std::size_t k = 0; k < config.observables.size(); ++k) {
        if (config.observables[k].name == config.localization_observable) {
            return k;
        }
    }
    throw UnknownObservable("localization observable '" + config.localization_observable +
                            "' is not among the ensemble observables");
}

}  // namespace

void EnsembleConfig::validate(std::size_t dim) const
{
    if (n_trajectories < 1) {
        throw RangeError("n_trajectories must be >= 1");
    }
    trajectory.validate();
    if (observables.empty()) {
        throw ValidationError("ensemble needs at least one observable");
    }
    std::set<std::string, std::less<>> names;
    for (const auto& o : observables) {
        if (!names.insert(o.name).second) {
            throw ValidationError("duplicate observable name '" + o.name + "'");
        }
        if (require_square(o.op, "observable " + o.name) != dim) {
            throw DimensionMismatch(dim, static_cast<std::size_t>(o.op.rows()), "observable " + o.name);
        }
        if ((o.op - o.op.adjoint()).norm() > 1e-12 * std::max(1.0, o.op.norm())) {
            throw ValidationError("observable '" + o.name + "' is not Hermitian");
        }
    }
    localization_index(*this);
    if (histogram_bins < 1) {
        throw RangeError("histogram_bins must be >= 1");
    }
    if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0)) {
        throw RangeError("max_failure_fraction must lie in [0, 1]");
    }
}

const ObservableSeries& EnsembleStats::observable(std::string_view name) const
{
    for (const auto& o : observables) {
        if (o.name == name) {
            return o;
        }
    }
    throw UnknownObservable("no observable named '" + std::string(name) + "' in ensemble statistics");
}

std::size_t EnsembleStats::dim() const
{
    return mean_state.empty() ? 0 : mean_state.front().dim();
}

bool identical(const EnsembleStats& a, const EnsembleStats& b)
{
    auto same_ops = [](const std::vector<DensityMatrix>& x, const std::vector<DensityMatrix>& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i].op().rows() != y[i].op().rows() || x[i].op() != y[i].op()) return false;
        }
        return true;
    };
    if (a.times != b.times || !same_ops(a.mean_state, b.mean_state) || a.purity_mean != b.purity_mean ||
        a.purity_standard_error != b.purity_standard_error || a.localization_observable != b.localization_observable ||
        a.n_requested != b.n_requested || a.n_completed != b.n_completed || a.failures.size() != b.failures.size()) {
        return false;
    }
    if (a.localization.rows() != b.localization.rows() || a.localization.cols() != b.localization.cols() ||
        a.localization != b.localization) {
        return false;
    }
    if (a.observables.size() != b.observables.size()) return false;
    for (std::size_t k = 0; k < a.observables.size(); ++k) {
        if (a.observables[k].name != b.observables[k].name || a.observables[k].mean != b.observables[k].mean ||
            a.observables[k].standard_error != b.observables[k].standard_error) {
            return false;
        }
    }
    for (std::size_t k = 0; k < a.failures.size(); ++k) {
        if (a.failures[k].index != b.failures[k].index || a.failures[k].message != b.failures[k].message) return false;
    }
    if (a.localization_histogram.size() != b.localization_histogram.size()) return false;
    for (std::size_t k = 0; k < a.localization_histogram.size(); ++k) {
        const auto& ha = a.localization_histogram[k];
        const auto& hb = b.localization_histogram[k];
        if (ha.time != hb.time || ha.edges != hb.edges || ha.counts != hb.counts) return false;
    }
    return true;
}

EnsembleStats run_ensemble(const DensityMatrix& rho0,
                           const LindbladModel& model,
                           const MonitoringSpec& spec,
                           const EnsembleConfig& config)
{
    spec.validate();
    config.validate(model.dim());
    if (rho0.dim() != model.dim()) {
        throw DimensionMismatch(model.dim(), rho0.dim(), "run_ensemble initial state");
    }
    if (static_cast<std::size_t>(spec.c.rows()) != model.dim()) {
        throw DimensionMismatch(model.dim(), static_cast<std::size_t>(spec.c.rows()), "run_ensemble monitoring");
    }

    const std::size_t dim = model.dim();
    const std::size_t n_obs = config.observables.size();
    const std::size_t loc = localization_index(config);
    const auto steps = sample_steps(config.trajectory.n_steps(), config.trajectory.sample_stride);
    const std::size_t n_times = steps.size();
    const std::size_t n_blocks = (config.n_trajectories + kBlockSize - 1) / kBlockSize;

    std::vector<BlockResult> blocks(n_blocks);
    auto run_block = [&](std::size_t b) {
        BlockResult out = empty_block(dim, n_times, n_obs);
        const std::size_t first = b * kBlockSize;
        const std::size_t last = std::min(first + kBlockSize, config.n_trajectories);
        for (std::size_t i = first; i < last; ++i) {
            TrajectoryConfig tc = config.trajectory;
            tc.seed = config.base_seed;
            tc.stream = i;
            tc.store_record = false;
            try {
                const auto path = simulate_trajectory(rho0, model, spec, tc);
                std::vector<double> row(n_times);
                for (std::size_t t = 0; t < n_times; ++t) {
                    const auto& rho = path.states[t];
                    out.state_sum[t] += rho.op();
                    out.purity[t].push(rho.purity());
                    for (std::size_t k = 0; k < n_obs; ++k) {
                        const double v = rho.expectation(config.observables[k].op);
                        out.observables[k][t].push(v);
                        if (k == loc) row[t] = v;
                    }
                }
                out.localization_rows.push_back(std::move(row));
                ++out.completed;
            } catch (const NumericalError& e) {
                out.failures.push_back({i, e.what()});
            }
        }
        blocks[b] = std::move(out);
    };

    unsigned n_threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_blocks));
    if (n_threads <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) {
            run_block(b);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        {
            std::vector<std::jthread> workers;
            workers.reserve(n_threads);
            for (unsigned w = 0; w < n_threads; ++w) {
                workers.emplace_back([&] {
                    for (std::size_t b = next++; b < n_blocks; b = next++) {
                        try {
                            run_block(b);
                        } catch (...) {
                            const std::lock_guard lock(error_mutex);
                            if (!error) error = std::current_exception();
                        }
                    }
                });
            }
        }
        if (error) {
            std::rethrow_exception(error);
        }
    }

    BlockResult total = merge_range(blocks, 0, n_blocks);

    const double allowed = config.max_failure_fraction * static_cast<double>(config.n_trajectories);
    if (total.completed == 0 || static_cast<double>(total.failures.size()) > allowed) {
        std::string msg = std::to_string(total.failures.size()) + " of " + std::to_string(config.n_trajectories) +
                          " trajectories aborted";
        if (!total.failures.empty()) {
            msg += "; first: trajectory " + std::to_string(total.failures.front().index) + ": " +
                   total.failures.front().message;
        }
        throw EnsembleFailure(msg);
    }

    EnsembleStats stats;
    stats.n_requested = config.n_trajectories;
    stats.n_completed = total.completed;
    stats.failures = std::move(total.failures);
    stats.times.reserve(n_times);
    for (const auto s : steps) {
        stats.times.push_back(static_cast<double>(s) * config.trajectory.dt);
    }
    const double n = static_cast<double>(total.completed);
    const StateTolerances tol{1e-12, config.trajectory.renormalize ? 1e-10 : 1e-2, 1e-4};
    for (std::size_t t = 0; t < n_times; ++t) {
        Operator mean = total.state_sum[t] / n;
        const auto diag = diagnose_state(mean, tol);
        if (!diag.ok()) {
            throw NumericalError("ensemble mean state at t = " + std::to_string(stats.times[t]) +
                                 " is not a density matrix: " + diag.describe());
        }
        stats.mean_state.push_back(DensityMatrix::unchecked(std::move(mean)));
        stats.purity_mean.push_back(total.purity[t].mean);
        stats.purity_standard_error.push_back(total.purity[t].standard_error());
    }
    for (std::size_t k = 0; k < n_obs; ++k) {
        ObservableSeries series;
        series.name = config.observables[k].name;
        for (const auto& m : total.observables[k]) {
            series.mean.push_back(m.mean);
            series.standard_error.push_back(m.standard_error());
        }
        stats.observables.push_back(std::move(series));
    }
    stats.localization_observable = config.observables[loc].name;
    stats.localization.resize(static_cast<Eigen::Index>(total.localization_rows.size()),
                              static_cast<Eigen::Index>(n_times));
    for (std::size_t r = 0; r < total.localization_rows.size(); ++r) {
        for (std::size_t t = 0; t < n_times; ++t) {
            stats.localization(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) =
                total.localization_rows[r][t];
        }
    }

    // Bin over the observable's spectral range.
    Eigen::SelfAdjointEigenSolver<Operator> eig(config.observables[loc].op, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    std::vector<std::size_t> picks{0, (n_times - 1) / 2, n_times - 1};
    picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
    for (const auto t : picks) {
        Histogram h;
        h.time = stats.times[t];
        const std::size_t bins = config.histogram_bins;
        const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
        for (std::size_t e = 0; e <= bins; ++e) {
            h.edges.push_back(lo + width * static_cast<double>(e));
        }
        h.counts.assign(bins, 0);
        for (Eigen::Index r = 0; r < stats.localization.rows(); ++r) {
            const double x = stats.localization(r, static_cast<Eigen::Index>(t));
            auto bin = static_cast<std::ptrdiff_t>(std::floor((x - lo) / width));
            bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(bins) - 1);
            ++h.counts[static_cast<std::size_t>(bin)];
        }
        stats.localization_histogram.push_back(std::move(h));
    }
    return stats;
}

std::vector<double> dissipative_uncollapse_metric(const EnsembleStats& stats, const DensityMatrix& rho_ss)
{
    if (rho_ss.dim() != stats.dim()) {
        throw GridMismatch("uncollapse metric: steady state has dim " + std::to_string(rho_ss.dim()) +
                           " but the ensemble has dim " + std::to_string(stats.dim()));
    }
    std::vector<double> out;
    out.reserve(stats.mean_state.size());
    for (const auto& m : stats.mean_state) {
        out.push_back(frobenius_norm(m.op() - rho_ss.op()));
    }
    return out;
}

std::vector<double> distance_to_reference(const EnsembleStats& stats, const std::vector<DensityMatrix>& reference)
{
    if (reference.size() != stats.mean_state.size()) {
        throw GridMismatch("reference has " + std::to_string(reference.size()) + " states, ensemble grid has " +
                           std::to_string(stats.mean_state.size()));
    }
    std::vector<double> out;
    out.reserve(reference.size());
    for (std::size_t t = 0; t < reference.size(); ++t) {
        if (reference[t].dim() != stats.mean_state[t].dim()) {
            throw GridMismatch("reference state dimension differs from ensemble");
        }
        out.push_back(frobenius_norm(stats.mean_state[t].op() - reference[t].op()));
    }
    return out;
}

std::vector<double> bimodality_report(const EnsembleStats& stats, double threshold)
{
    if (stats.localization_observable.empty()) {
        throw UnknownObservable("ensemble statistics carry no localization observable");
    }
    const auto rows = stats.localization.rows();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(stats.localization.cols()));
    for (Eigen::Index t = 0; t < stats.localization.cols(); ++t) {
        std::size_t hits = 0;
        for (Eigen::Index r = 0; r < rows; ++r) {
            if (std::abs(stats.localization(r, t)) > threshold) ++hits;
        }
        out.push_back(rows > 0 ? static_cast<double>(hits) / static_cast<double>(rows) : 0.0);
    }
    return out;
}

Histogram localization_histogram(const EnsembleStats& stats, std::size_t time_index, std::size_t bins)
{
    if (time_index >= stats.times.size()) {
        throw GridMismatch("histogram time index " + std::to_string(time_index) + " is outside the sampled grid");
    }
    if (bins < 1) {
        throw RangeError("histogram needs at least one bin");
    }
    const auto col = stats.localization.col(static_cast<Eigen::Index>(time_index));
    const double lo = std::min(-1.0, col.size() ? col.minCoeff() : -1.0);
    const double hi = std::max(1.0, col.size() ? col.maxCoeff() : 1.0);
    const double width = (hi - lo) / static_cast<double>(bins);
    Histogram h;
    h.time = stats.times[time_index];
    for (std::size_t e = 0; e <= bins; ++e) {
        h.edges.push_back(lo + width * static_cast<double>(e));
    }
    h.counts.assign(bins, 0);
    for (Eigen::Index r = 0; r < col.size(); ++r) {
        auto bin = static_cast<std::ptrdiff_t>(std::floor((col(r) - lo) / width));
        bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(bins) - 1);
        ++h.counts[static_cast<std::size_t>(bin)];
    }
    return h;
}

DwellStatistics dwell_statistics(const EnsembleStats& stats, double threshold)
{
    DwellStatistics out;
    if (stats.times.size() < 2 || stats.localization.rows() == 0) {
        return out;
    }
    const double sample_dt = stats.times[1] - stats.times[0];
    double total_len = 0.0;
    double total_switches = 0.0;
    for (Eigen::Index r = 0; r < stats.localization.rows(); ++r) {
        int current = 0;      // sign of the ongoing episode, 0 when delocalized
        int last_episode = 0;
        std::size_t len = 0;
        auto close = [&] {
            if (current != 0) {
                total_len += static_cast<double>(len) * sample_dt;
                ++out.episodes;
                if (last_episode != 0 && last_episode != current) total_switches += 1.0;
                last_episode = current;
            }
            current = 0;
            len = 0;
        };
        for (Eigen::Index t = 0; t < stats.localization.cols(); ++t) {
            const double x = stats.localization(r, t);
            const int sign = std::abs(x) > threshold ? (x > 0 ? 1 : -1) : 0;
            if (sign != current) {
                close();
                current = sign;
            }
            if (current != 0) ++len;
        }
        close();
    }
    out.mean_dwell_time = out.episodes ? total_len / static_cast<double>(out.episodes) : 0.0;
    out.mean_switches = total_switches / static_cast<double>(stats.localization.rows());
    return out;
}

std::vector<double> mean_state_expectation(const EnsembleStats& stats, const Operator& a)
{
    std::vector<double> out;
    out.reserve(stats.mean_state.size());
    for (const auto& m : stats.mean_state) {
        out.push_back(m.expectation(a));
    }
    return out;
}

}  // namespace contmeas
