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

#include "contmeas/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <thread>

#include "contmeas/version.hpp"
#include "json.hpp"

namespace contmeas {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json matrix_json(const Operator& m)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

json number_or_null(double x)
{
    return std::isfinite(x) ? json(x) : json(nullptr);
}

double finite_max(const std::vector<double>& xs)
{
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs) {
        if (std::isnan(x)) return kNaN;
        m = std::max(m, x);
    }
    return m;
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        throw ValidationError("cannot write " + path.string());
    }
}

class CsvTable
{
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void row(const std::vector<double>& values) { rows_.push_back(values); }

    std::string str() const
    {
        std::string out;
        for (std::size_t k = 0; k < header_.size(); ++k) {
            out += (k ? "," : "") + header_[k];
        }
        out += '\n';
        for (const auto& r : rows_) {
            for (std::size_t k = 0; k < r.size(); ++k) {
                out += (k ? "," : "") + fmt(r[k]);
            }
            out += '\n';
        }
        return out;
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

struct AssertionOutcome
{
    std::string name;
    json bound;
    double value;
    bool passed;
};

struct Context
{
    const ExperimentConfig& cfg;
    const RunOptions& options;
    fs::path out;
    std::optional<ResolvedExperiment> resolved;
    json results = json::object();
    std::vector<AssertionOutcome> assertions;
    std::vector<std::string> files;
    std::string stage = "configuration";

    Context(const ExperimentConfig& c, const RunOptions& o, fs::path dir) : cfg(c), options(o), out(std::move(dir)) {}

    void log(int level, const std::string& msg) const
    {
        if (options.verbosity >= level) std::cerr << "[contmeas] " << msg << '\n';
    }

    void emit(const std::string& name, const std::string& text)
    {
        write_file(out / name, text);
        files.push_back(name);
    }

    void check(std::string name, json bound, double value, bool passed)
    {
        log(1, "assertion " + name + ": " + (passed ? "pass" : "FAIL") + " (value " + fmt(value) + ")");
        assertions.push_back({std::move(name), std::move(bound), value, passed});
    }
};

void run_invariance(Context& ctx)
{
    const auto& r = *ctx.resolved;
    ctx.stage = "invariance check";
    const auto report = invariance_check(r.model, r.monitoring.c, ctx.cfg.invariance_tolerance);
    ctx.results["residual_norm"] = report.residual_norm;
    ctx.results["tolerance"] = report.tolerance;
    ctx.results["invariant"] = report.invariant;
    ctx.results["verdict"] = report.invariant ? "invariant" : "not invariant";
    ctx.results["steady_state"] = matrix_json(report.steady_state_used.op());
    if (r.preset) {
        if (r.preset->analytic_steady_state) {
            if (const auto exact = r.preset->analytic_steady_state(r.params)) {
                ctx.results["analytic_steady_state_error"] = (report.steady_state_used.op() - exact->op()).norm();
            }
        }
        if (!ctx.cfg.measurement.matrix) {
            if (const auto* bundled = r.preset->measurement(ctx.cfg.measurement.name)) {
                ctx.results["preset_expects_invariant"] = bundled->expected_invariant(r.params);
            }
        }
    }
    if (const auto& want = ctx.cfg.assertions.expect_invariant) {
        ctx.check("expect_invariant", *want, report.invariant ? 1.0 : 0.0, report.invariant == *want);
    }
}

void run_sweep(Context& ctx)
{
    const auto& r = *ctx.resolved;
    ctx.stage = "gamma sweep";
    std::vector<double> gammas = ctx.cfg.sweep_gammas;
    if (gammas.empty()) {
        gammas.push_back(0.0);
        const auto tail = default_sweep_gammas(r.model);
        gammas.insert(gammas.end(), tail.begin(), tail.end());
    }
    const auto points = gamma_sweep(r.model, r.monitoring.c, gammas);

    std::optional<QubitThermalParams> rate_oracle;
    if (r.preset && r.preset->name == "thermal_qubit" && !ctx.cfg.measurement.matrix &&
        parse_pauli(ctx.cfg.measurement.name) == Pauli::x) {
        rate_oracle = QubitThermalParams{r.params.at("gamma_down"), r.params.at("gamma_up"), r.params.at("detuning")};
    }

    const std::size_t d = r.model.dim();
    std::vector<std::string> header{"gamma_m[rate]", "drift[1]"};
    for (std::size_t k = 0; k < d; ++k) header.push_back("p_" + std::to_string(k) + "[1]");
    if (rate_oracle) header.push_back("rate_equation_p_1[1]");
    CsvTable table(header);

    json rows = json::array();
    double max_drift = 0.0;
    double oracle_error = 0.0;
    bool monotone = true;
    double previous_drift = -1.0;
    std::size_t failed = 0;
    for (const auto& p : points) {
        std::vector<double> row{p.gamma_m, p.drift};
        json jp{{"gamma_m", p.gamma_m}, {"drift", number_or_null(p.drift)}};
        json pops = json::array();
        for (std::size_t k = 0; k < d; ++k) {
            const double pk = p.steady_state ? p.steady_state->op()(static_cast<Eigen::Index>(k),
                                                                     static_cast<Eigen::Index>(k)).real()
                                             : kNaN;
            row.push_back(pk);
            pops.push_back(number_or_null(pk));
        }
        jp["populations"] = pops;
        if (rate_oracle) {
            const double expect = sigma_x_monitored_excited_population(*rate_oracle, p.gamma_m);
            row.push_back(expect);
            jp["rate_equation_p_1"] = expect;
            if (p.ok()) oracle_error = std::max(oracle_error, std::abs(row[3] - expect));
        }
        if (p.ok()) {
            max_drift = std::max(max_drift, p.drift);
            monotone = monotone && p.drift >= previous_drift;
            previous_drift = p.drift;
        } else {
            ++failed;
            jp["error"] = p.error;
        }
        table.row(row);
        rows.push_back(std::move(jp));
    }
    ctx.results["points"] = rows;
    ctx.results["max_drift"] = max_drift;
    ctx.results["drift_monotone"] = monotone;
    ctx.results["failed_points"] = failed;
    if (rate_oracle) ctx.results["rate_equation_max_error"] = oracle_error;
    ctx.stage = "writing sweep table";
    ctx.emit("sweep.csv", table.str());

    if (const auto& bound = ctx.cfg.assertions.max_drift) {
        ctx.check("max_drift", *bound, max_drift, failed == 0 && max_drift <= *bound);
    }
}

void run_trajectories(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const auto& r = *ctx.resolved;
    const bool single = cfg.kind == ExperimentKind::trajectory;

    EnsembleConfig ec;
    ec.n_trajectories = single ? 1 : cfg.n_trajectories;
    ec.base_seed = single ? cfg.trajectory.seed : cfg.base_seed;
    ec.trajectory = cfg.trajectory;
    ec.observables = r.observables;
    ec.localization_observable = cfg.localization_observable;
    ec.histogram_bins = cfg.histogram_bins;
    ec.threads = ctx.options.threads;

    ctx.stage = single ? "trajectory" : "ensemble";
    ctx.log(1, "running " + std::to_string(ec.n_trajectories) + " trajectories, " +
                   std::to_string(cfg.trajectory.n_steps()) + " steps each");
    const auto stats = run_ensemble(r.initial_state, r.model, r.monitoring, ec);

    ctx.stage = "steady state reference";
    std::optional<DensityMatrix> rho_ss;
    try {
        rho_ss = steady_state(r.model);
    } catch (const NumericalError& e) {
        ctx.results["steady_state_unavailable"] = e.what();
    }
    const std::size_t n_times = stats.times.size();
    const auto uncollapse = rho_ss ? dissipative_uncollapse_metric(stats, *rho_ss) : std::vector<double>(n_times, kNaN);

    ctx.stage = "master equation reference";
    const auto me_states = propagate_sampled(measured_liouvillian(r.model, r.monitoring), r.initial_state,
                                             cfg.trajectory.dt, cfg.trajectory.n_steps(),
                                             cfg.trajectory.sample_stride);
    const auto me_distance = distance_to_reference(stats, me_states);
    const auto localized = bimodality_report(stats, cfg.bimodality_threshold);

    std::vector<std::string> header{"time[1/rate]"};
    for (const auto& o : stats.observables) {
        header.push_back("mean_" + o.name + "[1]");
        header.push_back("stderr_" + o.name + "[1]");
        header.push_back("master_eq_" + o.name + "[1]");
    }
    for (const char* h : {"purity_mean[1]", "purity_stderr[1]", "uncollapse_distance[1]", "master_eq_distance[1]",
                          "localized_fraction[1]"}) {
        header.emplace_back(h);
    }
    CsvTable table(header);

    double max_me_ratio = 0.0;
    double max_me_abs = 0.0;
    bool me_within_k = true;
    const double k_bound = cfg.assertions.master_equation_k.value_or(0.0);
    for (std::size_t t = 0; t < n_times; ++t) {
        std::vector<double> row{stats.times[t]};
        for (std::size_t k = 0; k < stats.observables.size(); ++k) {
            const auto& o = stats.observables[k];
            const double me = real_trace_product(r.observables[k].op, me_states[t].op());
            const double diff = std::abs(o.mean[t] - me);
            row.push_back(o.mean[t]);
            row.push_back(o.standard_error[t]);
            row.push_back(me);
            max_me_abs = std::max(max_me_abs, diff);
            if (o.standard_error[t] > 0.0) max_me_ratio = std::max(max_me_ratio, diff / o.standard_error[t]);
            me_within_k = me_within_k && diff <= k_bound * o.standard_error[t] + 1e-12;
        }
        row.push_back(stats.purity_mean[t]);
        row.push_back(stats.purity_standard_error[t]);
        row.push_back(uncollapse[t]);
        row.push_back(me_distance[t]);
        row.push_back(localized[t]);
        table.row(row);
    }

    auto& res = ctx.results;
    res["n_requested"] = stats.n_requested;
    res["n_completed"] = stats.n_completed;
    json failures = json::array();
    for (const auto& f : stats.failures) failures.push_back({{"index", f.index}, {"message", f.message}});
    res["failures"] = failures;
    res["n_samples"] = n_times;
    res["final_time"] = stats.times.back();
    res["final_mean_state"] = matrix_json(stats.mean_state.back().op());
    json finals = json::object();
    for (const auto& o : stats.observables) {
        finals[o.name] = {{"mean", o.mean.back()}, {"standard_error", o.standard_error.back()}};
    }
    res["final_observables"] = finals;
    res["final_purity_mean"] = stats.purity_mean.back();
    const double noise_floor = 4.0 * std::sqrt(2.0) / std::sqrt(static_cast<double>(stats.n_completed));
    double purity_gain = kNaN;
    if (rho_ss) {
        res["steady_state"] = matrix_json(rho_ss->op());
        res["steady_state_purity"] = rho_ss->purity();
        purity_gain = stats.purity_mean.back() - rho_ss->purity();
        res["purity_gain"] = purity_gain;
        res["max_uncollapse_distance"] = finite_max(uncollapse);
        res["uncollapse_noise_floor"] = noise_floor;
    }
    res["max_master_eq_abs_deviation"] = max_me_abs;
    res["max_master_eq_deviation_in_stderr"] = max_me_ratio;
    res["max_master_eq_distance"] = finite_max(me_distance);
    res["localization_observable"] = stats.localization_observable;
    res["bimodality_threshold"] = cfg.bimodality_threshold;
    res["final_localized_fraction"] = localized.back();
    const auto dwell = dwell_statistics(stats, cfg.bimodality_threshold);
    res["dwell"] = {{"mean_dwell_time", dwell.mean_dwell_time},
                    {"mean_switches", dwell.mean_switches},
                    {"episodes", dwell.episodes}};
    json hists = json::array();
    for (const auto& h : stats.localization_histogram) {
        hists.push_back({{"time", h.time}, {"edges", h.edges}, {"counts", h.counts}});
    }
    res["localization_histograms"] = hists;

    ctx.stage = "writing time series";
    ctx.emit("timeseries.csv", table.str());

    if (single) {
        ctx.stage = "trajectory record";
        TrajectoryConfig tc = cfg.trajectory;
        tc.stream = 0;
        tc.store_record = true;
        const auto path = simulate_trajectory(r.initial_state, r.model, r.monitoring, tc);
        CsvTable record({"t_start[1/rate]", "dY[sqrt(1/rate)]"});
        for (std::size_t k = 0; k < path.record.increments.size(); ++k) {
            record.row({static_cast<double>(k) * tc.dt, path.record.increments[k]});
        }
        res["record_steps"] = path.record.increments.size();
        ctx.emit("record.csv", record.str());
    }

    const auto& a = cfg.assertions;
    if (a.max_uncollapse) {
        const double bound = std::holds_alternative<double>(*a.max_uncollapse) ? std::get<double>(*a.max_uncollapse)
                                                                                : noise_floor;
        const double value = finite_max(uncollapse);
        json jb = std::holds_alternative<double>(*a.max_uncollapse) ? json(bound)
                                                                      : json{{"noise_floor", bound}};
        ctx.check("max_uncollapse", jb, value, std::isfinite(value) && value <= bound);
    }
    if (a.min_purity_gain) {
        ctx.check("min_purity_gain", *a.min_purity_gain, purity_gain,
                  std::isfinite(purity_gain) && purity_gain >= *a.min_purity_gain);
    }
    if (a.master_equation_k) {
        ctx.check("master_equation_k", *a.master_equation_k, max_me_ratio, me_within_k);
    }
    if (a.min_bimodality) {
        ctx.check("min_bimodality", *a.min_bimodality, localized.back(), localized.back() >= *a.min_bimodality);
    }
}

json resolved_json(const ResolvedExperiment& r)
{
    json j;
    j["dim"] = r.model.dim();
    if (r.preset) {
        j["preset"] = r.preset->name;
        json params = json::object();
        for (const auto& [k, v] : r.params) params[k] = v;
        j["params"] = params;
    }
    j["hamiltonian"] = matrix_json(r.model.hamiltonian());
    json jumps = json::array();
    for (const auto& l : r.model.jumps()) jumps.push_back(matrix_json(l));
    j["jumps"] = jumps;
    j["c"] = matrix_json(r.monitoring.c);
    j["gamma_m"] = r.monitoring.gamma_m;
    j["eta"] = r.monitoring.eta;
    j["initial_state"] = matrix_json(r.initial_state.op());
    json obs = json::array();
    for (const auto& o : r.observables) obs.push_back({{"name", o.name}, {"operator", matrix_json(o.op)}});
    j["observables"] = obs;
    return j;
}

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

ExperimentConfig apply_overrides(ExperimentConfig config, const RunOptions& options)
{
    if (options.n_trajectories) config.n_trajectories = *options.n_trajectories;
    if (options.seed) {
        config.trajectory.seed = *options.seed;
        config.base_seed = *options.seed;
    }
    if (!options.output_directory.empty()) config.output_directory = options.output_directory.string();
    return config;
}

RunResult run_experiment(const ExperimentConfig& input, const RunOptions& options)
{
    const ExperimentConfig cfg = apply_overrides(input, options);
    RunResult result;
    result.output_directory = cfg.output_directory;
    Context ctx(cfg, options, result.output_directory);

    try {
        fs::create_directories(ctx.out);
    } catch (const fs::filesystem_error& e) {
        result.exit_code = kExitValidation;
        result.status = "validation_error";
        result.message = "cannot create output directory: " + std::string(e.what());
        return result;
    }

    try {
        ctx.resolved = resolve_experiment(cfg);
        ctx.log(1, std::string(to_string(cfg.kind)) + " on a " + std::to_string(ctx.resolved->model.dim()) +
                       "-level model");
        switch (cfg.kind) {
            case ExperimentKind::invariance_check: run_invariance(ctx); break;
            case ExperimentKind::gamma_sweep: run_sweep(ctx); break;
            case ExperimentKind::trajectory:
            case ExperimentKind::ensemble: run_trajectories(ctx); break;
        }
        const bool all_pass =
            std::all_of(ctx.assertions.begin(), ctx.assertions.end(), [](const auto& a) { return a.passed; });
        result.exit_code = all_pass ? kExitOk : kExitAssertion;
        result.status = all_pass ? "ok" : "assertion_failed";
    } catch (const ValidationError& e) {
        result.exit_code = kExitValidation;
        result.status = "validation_error";
        result.message = ctx.stage + ": " + e.what();
    } catch (const NumericalError& e) {
        result.exit_code = kExitNumerical;
        result.status = "numerical_error";
        result.message = ctx.stage + ": " + e.what();
    }
    if (!result.message.empty()) ctx.log(0, "error: " + result.message);

    const std::string canonical = serialize_config(cfg);
    json summary;
    summary["kind"] = std::string(to_string(cfg.kind));
    summary["status"] = result.status;
    if (!result.message.empty()) summary["error"] = result.message;
    summary["config"] = json::parse(canonical);
    // where the files go is not part of the result
    summary["config"].erase("output");
    if (ctx.resolved) summary["resolved"] = resolved_json(*ctx.resolved);
    summary["results"] = ctx.results;
    json assertions = json::array();
    for (const auto& a : ctx.assertions) {
        assertions.push_back(
            {{"name", a.name}, {"bound", a.bound}, {"value", number_or_null(a.value)}, {"passed", a.passed}});
    }
    summary["assertions"] = assertions;
    summary["verdict"] = result.exit_code == kExitOk ? "pass" : result.exit_code == kExitAssertion ? "fail" : "error";

    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
    json meta;
    meta["config_hash"] = std::string("fnv1a64:") + hash;
    meta["seed"] = cfg.kind == ExperimentKind::ensemble ? cfg.base_seed : cfg.trajectory.seed;
    meta["version"] = kVersion;
    meta["timestamp"] = utc_timestamp();
    meta["threads"] = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
    json files = ctx.files;
    files.push_back("summary.json");
    meta["files"] = files;

    try {
        write_file(ctx.out / "summary.json", summary.dump(2) + "\n");
        write_file(ctx.out / "metadata.json", meta.dump(2) + "\n");
    } catch (const ValidationError& e) {
        result.exit_code = kExitValidation;
        result.status = "validation_error";
        result.message = e.what();
    }
    return result;
}

}  // namespace contmeas
