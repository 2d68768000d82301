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

#include "contmeas/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "json.hpp"

namespace contmeas {

using json = nlohmann::ordered_json;

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues)
{
    std::string out = "invalid configuration:";
    for (const auto& issue : issues) {
        out += "\n  ";
        if (issue.line > 0) out += "line " + std::to_string(issue.line) + ": ";
        if (!issue.field.empty()) out += issue.field + ": ";
        out += issue.message;
    }
    return out;
}

std::string join_path(const std::string& base, const std::string& key)
{
    return base.empty() ? key : base + "." + key;
}

class Reader
{
public:
    std::vector<ConfigIssue> issues;

    void error(const std::string& field, const std::string& message) { issues.push_back({field, 0, message}); }

    void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed)
    {
        for (const auto& [key, value] : obj.items()) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
                error(join_path(path, key), "unknown field");
            }
        }
    }

    const json* object(const json& parent, const std::string& path, const char* key)
    {
        if (!parent.contains(key)) return nullptr;
        const json& v = parent.at(key);
        if (!v.is_object()) {
            error(join_path(path, key), "expected an object");
            return nullptr;
        }
        return &v;
    }

    void number(const json& obj, const std::string& path, const char* key, double& out)
    {
        if (!obj.contains(key)) return;
        const json& v = obj.at(key);
        if (!v.is_number()) {
            error(join_path(path, key), "expected a number");
            return;
        }
        out = v.get<double>();
    }

    template <class T>
    void unsigned_integer(const json& obj, const std::string& path, const char* key, T& out)
    {
        if (!obj.contains(key)) return;
        const json& v = obj.at(key);
        if (v.is_number_unsigned()) {
            out = static_cast<T>(v.get<std::uint64_t>());
        } else if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
            out = static_cast<T>(v.get<std::int64_t>());
        } else {
            error(join_path(path, key), "expected a non-negative integer");
        }
    }

    void boolean(const json& obj, const std::string& path, const char* key, bool& out)
    {
        if (!obj.contains(key)) return;
        const json& v = obj.at(key);
        if (!v.is_boolean()) {
            error(join_path(path, key), "expected true or false");
            return;
        }
        out = v.get<bool>();
    }

    void string(const json& obj, const std::string& path, const char* key, std::string& out)
    {
        if (!obj.contains(key)) return;
        const json& v = obj.at(key);
        if (!v.is_string()) {
            error(join_path(path, key), "expected a string");
            return;
        }
        out = v.get<std::string>();
    }

    std::optional<Complex> complex_entry(const json& v, const std::string& path)
    {
        if (v.is_number()) {
            return Complex{v.get<double>(), 0.0};
        }
        if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
            return Complex{v[0].get<double>(), v[1].get<double>()};
        }
        error(path, "expected a complex number as [re, im]");
        return std::nullopt;
    }

    std::optional<Operator> matrix(const json& v, const std::string& path)
    {
        if (!v.is_array() || v.empty()) {
            error(path, "expected a non-empty list of rows");
            return std::nullopt;
        }
        const auto d = static_cast<Eigen::Index>(v.size());
        Operator m(d, d);
        bool ok = true;
        for (Eigen::Index r = 0; r < d; ++r) {
            const json& row = v[static_cast<std::size_t>(r)];
            const std::string row_path = path + "[" + std::to_string(r) + "]";
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) {
                error(row_path, "expected a row of " + std::to_string(d) + " entries (matrices must be square)");
                ok = false;
                continue;
            }
            for (Eigen::Index c = 0; c < d; ++c) {
                const auto z = complex_entry(row[static_cast<std::size_t>(c)], row_path + "[" + std::to_string(c) + "]");
                if (!z) {
                    ok = false;
                    continue;
                }
                m(r, c) = *z;
            }
        }
        if (!ok) return std::nullopt;
        return m;
    }

    void operator_ref(const json& obj, const std::string& path, const char* key, OperatorRef& out)
    {
        if (!obj.contains(key)) return;
        const json& v = obj.at(key);
        const std::string field = join_path(path, key);
        if (v.is_string()) {
            out = OperatorRef{v.get<std::string>(), std::nullopt};
        } else if (auto m = matrix(v, field)) {
            out = OperatorRef{"", std::move(m)};
        }
    }
};

json complex_to_json(Complex z)
{
    return json::array({z.real(), z.imag()});
}

json matrix_to_json(const Operator& m)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(complex_to_json(m(r, c)));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

json operator_ref_to_json(const OperatorRef& ref)
{
    if (ref.matrix) return matrix_to_json(*ref.matrix);
    return ref.name;
}

std::size_t line_of(std::string_view text, std::size_t byte)
{
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

std::string_view to_string(ExperimentKind kind)
{
    switch (kind) {
        case ExperimentKind::invariance_check: return "invariance-check";
        case ExperimentKind::gamma_sweep: return "gamma-sweep";
        case ExperimentKind::trajectory: return "trajectory";
        case ExperimentKind::ensemble: return "ensemble";
    }
    return "unknown";
}

std::optional<ExperimentKind> parse_kind(std::string_view text)
{
    for (auto k : {ExperimentKind::invariance_check, ExperimentKind::gamma_sweep, ExperimentKind::trajectory,
                   ExperimentKind::ensemble}) {
        if (to_string(k) == text) return k;
    }
    return std::nullopt;
}

bool Assertions::empty() const
{
    return !expect_invariant && !max_drift && !max_uncollapse && !min_purity_gain && !master_equation_k &&
           !min_bimodality;
}

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : ValidationError(join_issues(issues)), issues_(std::move(issues))
{
}

ExperimentConfig parse_config(std::string_view text, std::optional<ExperimentKind> kind_hint)
{
    json root;
    try {
        root = json::parse(text.begin(), text.end(), nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError({{"", line_of(text, e.byte > 0 ? e.byte - 1 : 0), e.what()}});
    }
    if (!root.is_object()) {
        throw ConfigError({{"", 1, "top level must be an object"}});
    }

    Reader in;
    ExperimentConfig cfg;
    in.check_keys(root, "",
                  {"kind", "model", "monitoring", "invariance", "sweep", "initial_state", "trajectory", "ensemble",
                   "observables", "assertions", "output"});

    // kind
    std::optional<ExperimentKind> kind = kind_hint;
    if (root.contains("kind")) {
        std::string k;
        in.string(root, "", "kind", k);
        const auto parsed = parse_kind(k);
        if (!parsed) {
            in.error("kind", "must be one of invariance-check, gamma-sweep, trajectory, ensemble (got '" + k + "')");
        } else if (kind_hint && *kind_hint != *parsed) {
            in.error("kind", "config says '" + k + "' but the command asked for '" + std::string(to_string(*kind_hint)) +
                                 "'");
        } else {
            kind = parsed;
        }
    } else if (!kind) {
        in.error("kind", "missing (set it in the file or pick a subcommand)");
    }
    if (kind) cfg.kind = *kind;

    // model
    if (const json* model = in.object(root, "", "model")) {
        in.check_keys(*model, "model", {"preset", "params", "hamiltonian", "jumps"});
        in.string(*model, "model", "preset", cfg.model.preset);
        if (const json* params = in.object(*model, "model", "params")) {
            for (const auto& [key, value] : params->items()) {
                if (!value.is_number()) {
                    in.error("model.params." + key, "expected a number");
                } else {
                    cfg.model.params[key] = value.get<double>();
                }
            }
        }
        if (model->contains("hamiltonian")) {
            cfg.model.hamiltonian = in.matrix(model->at("hamiltonian"), "model.hamiltonian");
        }
        if (model->contains("jumps")) {
            const json& jumps = model->at("jumps");
            if (!jumps.is_array()) {
                in.error("model.jumps", "expected a list of matrices");
            } else {
                for (std::size_t k = 0; k < jumps.size(); ++k) {
                    if (auto m = in.matrix(jumps[k], "model.jumps[" + std::to_string(k) + "]")) {
                        cfg.model.jumps.push_back(std::move(*m));
                    }
                }
            }
        }
        const bool explicit_model = cfg.model.hamiltonian.has_value() || model->contains("jumps");
        if (!cfg.model.preset.empty() && explicit_model) {
            in.error("model", "give either a preset or explicit hamiltonian/jumps, not both");
        }
        if (cfg.model.preset.empty() && !explicit_model) {
            in.error("model", "needs a preset name or explicit hamiltonian/jumps");
        }
        if (cfg.model.preset.empty() && !cfg.model.params.empty()) {
            in.error("model.params", "params only apply to presets");
        }
    } else {
        in.error("model", "missing");
    }

    if (const json* mon = in.object(root, "", "monitoring")) {
        in.check_keys(*mon, "monitoring", {"c", "gamma_m", "eta"});
        in.operator_ref(*mon, "monitoring", "c", cfg.measurement);
        in.number(*mon, "monitoring", "gamma_m", cfg.gamma_m);
        in.number(*mon, "monitoring", "eta", cfg.eta);
    }
    if (!(cfg.gamma_m >= 0.0) || !std::isfinite(cfg.gamma_m)) {
        in.error("monitoring.gamma_m", "must be >= 0 (got " + std::to_string(cfg.gamma_m) + ")");
    }
    if (!(cfg.eta >= 0.0 && cfg.eta <= 1.0)) {
        in.error("monitoring.eta", "must lie in [0, 1] (got " + std::to_string(cfg.eta) + ")");
    }

    if (const json* inv = in.object(root, "", "invariance")) {
        in.check_keys(*inv, "invariance", {"tolerance"});
        in.number(*inv, "invariance", "tolerance", cfg.invariance_tolerance);
        if (!(cfg.invariance_tolerance >= 0.0)) in.error("invariance.tolerance", "must be >= 0");
    }

    if (const json* sweep = in.object(root, "", "sweep")) {
        in.check_keys(*sweep, "sweep", {"gammas"});
        if (sweep->contains("gammas")) {
            const json& g = sweep->at("gammas");
            if (!g.is_array()) {
                in.error("sweep.gammas", "expected a list of rates");
            } else {
                for (std::size_t k = 0; k < g.size(); ++k) {
                    const std::string field = "sweep.gammas[" + std::to_string(k) + "]";
                    if (!g[k].is_number() || !(g[k].get<double>() >= 0.0)) {
                        in.error(field, "expected a rate >= 0");
                    } else {
                        cfg.sweep_gammas.push_back(g[k].get<double>());
                    }
                }
            }
        }
    }

    if (root.contains("initial_state")) {
        const json& s = root.at("initial_state");
        if (s.is_string()) {
            cfg.initial_state = StateRef{s.get<std::string>(), std::nullopt};
        } else if (auto m = in.matrix(s, "initial_state")) {
            cfg.initial_state = StateRef{"", std::move(m)};
        }
    }

    if (const json* traj = in.object(root, "", "trajectory")) {
        in.check_keys(*traj, "trajectory", {"dt", "t_final", "seed", "sample_stride", "renormalize", "psd_tol"});
        in.number(*traj, "trajectory", "dt", cfg.trajectory.dt);
        in.number(*traj, "trajectory", "t_final", cfg.trajectory.t_final);
        in.unsigned_integer(*traj, "trajectory", "seed", cfg.trajectory.seed);
        in.unsigned_integer(*traj, "trajectory", "sample_stride", cfg.trajectory.sample_stride);
        in.boolean(*traj, "trajectory", "renormalize", cfg.trajectory.renormalize);
        in.number(*traj, "trajectory", "psd_tol", cfg.trajectory.psd_tol);
    }
    if (!(cfg.trajectory.dt > 0.0) || !std::isfinite(cfg.trajectory.dt)) {
        in.error("trajectory.dt", "must be > 0");
    }
    if (!(cfg.trajectory.t_final >= 0.0) || !std::isfinite(cfg.trajectory.t_final)) {
        in.error("trajectory.t_final", "must be >= 0");
    }
    if (cfg.trajectory.sample_stride < 1) in.error("trajectory.sample_stride", "must be >= 1");
    if (cfg.trajectory.dt > 0.0 && cfg.trajectory.t_final > 0.0) {
        const double ratio = cfg.trajectory.t_final / cfg.trajectory.dt;
        if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio)) {
            in.error("trajectory.t_final", "must be an integer multiple of trajectory.dt");
        }
    }

    if (const json* ens = in.object(root, "", "ensemble")) {
        in.check_keys(*ens, "ensemble",
                      {"n_trajectories", "base_seed", "localization_observable", "bimodality_threshold",
                       "histogram_bins"});
        in.unsigned_integer(*ens, "ensemble", "n_trajectories", cfg.n_trajectories);
        in.unsigned_integer(*ens, "ensemble", "base_seed", cfg.base_seed);
        in.string(*ens, "ensemble", "localization_observable", cfg.localization_observable);
        in.number(*ens, "ensemble", "bimodality_threshold", cfg.bimodality_threshold);
        in.unsigned_integer(*ens, "ensemble", "histogram_bins", cfg.histogram_bins);
    }
    if (cfg.n_trajectories < 1) in.error("ensemble.n_trajectories", "must be >= 1");
    if (cfg.histogram_bins < 1) in.error("ensemble.histogram_bins", "must be >= 1");

    if (root.contains("observables")) {
        const json& obs = root.at("observables");
        if (!obs.is_array()) {
            in.error("observables", "expected a list of {name, operator} objects");
        } else {
            std::set<std::string, std::less<>> names;
            for (std::size_t k = 0; k < obs.size(); ++k) {
                const std::string path = "observables[" + std::to_string(k) + "]";
                if (!obs[k].is_object()) {
                    in.error(path, "expected an object with name and operator");
                    continue;
                }
                in.check_keys(obs[k], path, {"name", "operator"});
                ObservableRef ref;
                in.string(obs[k], path, "name", ref.name);
                in.operator_ref(obs[k], path, "operator", ref.op);
                if (ref.name.empty()) {
                    in.error(path + ".name", "missing");
                } else if (!names.insert(ref.name).second) {
                    in.error(path + ".name", "duplicate observable name '" + ref.name + "'");
                }
                if (!obs[k].contains("operator")) {
                    in.error(path + ".operator", "missing");
                }
                cfg.observables.push_back(std::move(ref));
            }
        }
    }

    if (const json* as = in.object(root, "", "assertions")) {
        in.check_keys(*as, "assertions",
                      {"expect_invariant", "max_drift", "max_uncollapse", "min_purity_gain", "master_equation_k",
                       "min_bimodality"});
        auto opt_number = [&](const char* key, std::optional<double>& out) {
            if (!as->contains(key)) return;
            double v = 0.0;
            in.number(*as, "assertions", key, v);
            out = v;
        };
        if (as->contains("expect_invariant")) {
            bool b = false;
            in.boolean(*as, "assertions", "expect_invariant", b);
            cfg.assertions.expect_invariant = b;
        }
        opt_number("max_drift", cfg.assertions.max_drift);
        opt_number("min_purity_gain", cfg.assertions.min_purity_gain);
        opt_number("master_equation_k", cfg.assertions.master_equation_k);
        opt_number("min_bimodality", cfg.assertions.min_bimodality);
        if (as->contains("max_uncollapse")) {
            const json& v = as->at("max_uncollapse");
            if (v.is_number()) {
                cfg.assertions.max_uncollapse = v.get<double>();
            } else if (v.is_string() && v.get<std::string>() == "noise_floor") {
                cfg.assertions.max_uncollapse = std::string("noise_floor");
            } else {
                in.error("assertions.max_uncollapse", "expected a number or \"noise_floor\"");
            }
        }
    }

    if (kind) {
        const auto only = [&](bool present, const char* name, std::initializer_list<ExperimentKind> kinds) {
            if (present && std::find(kinds.begin(), kinds.end(), *kind) == kinds.end()) {
                in.error(std::string("assertions.") + name,
                         "does not apply to a " + std::string(to_string(*kind)) + " run");
            }
        };
        const auto& a = cfg.assertions;
        using K = ExperimentKind;
        only(a.expect_invariant.has_value(), "expect_invariant", {K::invariance_check});
        only(a.max_drift.has_value(), "max_drift", {K::gamma_sweep});
        only(a.max_uncollapse.has_value(), "max_uncollapse", {K::ensemble});
        only(a.master_equation_k.has_value(), "master_equation_k", {K::ensemble});
        only(a.min_purity_gain.has_value(), "min_purity_gain", {K::trajectory, K::ensemble});
        only(a.min_bimodality.has_value(), "min_bimodality", {K::trajectory, K::ensemble});
    }

    if (const json* out = in.object(root, "", "output")) {
        in.check_keys(*out, "output", {"directory"});
        in.string(*out, "output", "directory", cfg.output_directory);
    }

    // Cross-field checks need a model; only attempt them on an otherwise clean parse.
    if (in.issues.empty()) {
        try {
            resolve_experiment(cfg);
        } catch (const ConfigError& e) {
            for (const auto& issue : e.issues()) in.issues.push_back(issue);
        } catch (const NumericalError&) {
            // e.g. a degenerate steady state; reported when the experiment runs
        }
    }

    if (!in.issues.empty()) {
        throw ConfigError(std::move(in.issues));
    }
    return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg)
{
    json root;
    root["kind"] = std::string(to_string(cfg.kind));
    json model = json::object();
    if (!cfg.model.preset.empty()) {
        model["preset"] = cfg.model.preset;
        json params = json::object();
        for (const auto& [k, v] : cfg.model.params) params[k] = v;
        model["params"] = params;
    } else {
        if (cfg.model.hamiltonian) model["hamiltonian"] = matrix_to_json(*cfg.model.hamiltonian);
        json jumps = json::array();
        for (const auto& j : cfg.model.jumps) jumps.push_back(matrix_to_json(j));
        model["jumps"] = jumps;
    }
    root["model"] = model;
    root["monitoring"] = {{"c", operator_ref_to_json(cfg.measurement)}, {"gamma_m", cfg.gamma_m}, {"eta", cfg.eta}};
    root["invariance"] = {{"tolerance", cfg.invariance_tolerance}};
    if (!cfg.sweep_gammas.empty()) root["sweep"] = {{"gammas", cfg.sweep_gammas}};
    root["initial_state"] =
        cfg.initial_state.matrix ? matrix_to_json(*cfg.initial_state.matrix) : json(cfg.initial_state.name);
    root["trajectory"] = {{"dt", cfg.trajectory.dt},
                          {"t_final", cfg.trajectory.t_final},
                          {"seed", cfg.trajectory.seed},
                          {"sample_stride", cfg.trajectory.sample_stride},
                          {"renormalize", cfg.trajectory.renormalize},
                          {"psd_tol", cfg.trajectory.psd_tol}};
    json ens = {{"n_trajectories", cfg.n_trajectories},
                {"base_seed", cfg.base_seed},
                {"bimodality_threshold", cfg.bimodality_threshold},
                {"histogram_bins", cfg.histogram_bins}};
    if (!cfg.localization_observable.empty()) ens["localization_observable"] = cfg.localization_observable;
    root["ensemble"] = ens;
    if (!cfg.observables.empty()) {
        json obs = json::array();
        for (const auto& o : cfg.observables) {
            obs.push_back({{"name", o.name}, {"operator", operator_ref_to_json(o.op)}});
        }
        root["observables"] = obs;
    }
    if (!cfg.assertions.empty()) {
        json as = json::object();
        const auto& a = cfg.assertions;
        if (a.expect_invariant) as["expect_invariant"] = *a.expect_invariant;
        if (a.max_drift) as["max_drift"] = *a.max_drift;
        if (a.max_uncollapse) {
            std::visit([&](const auto& v) { as["max_uncollapse"] = v; }, *a.max_uncollapse);
        }
        if (a.min_purity_gain) as["min_purity_gain"] = *a.min_purity_gain;
        if (a.master_equation_k) as["master_equation_k"] = *a.master_equation_k;
        if (a.min_bimodality) as["min_bimodality"] = *a.min_bimodality;
        root["assertions"] = as;
    }
    root["output"] = {{"directory", cfg.output_directory}};
    return root.dump(2) + "\n";
}

Operator resolve_operator(const OperatorRef& ref, std::size_t dim)
{
    if (ref.matrix) {
        if (static_cast<std::size_t>(ref.matrix->rows()) != dim) {
            throw DimensionMismatch(dim, static_cast<std::size_t>(ref.matrix->rows()), "operator");
        }
        return *ref.matrix;
    }
    if (ref.name == "identity" || ref.name == "id") {
        return identity(dim);
    }
    const Pauli p = parse_pauli(ref.name);
    if (dim != 2) {
        throw DimensionMismatch(2, dim, "Pauli operator '" + ref.name + "'");
    }
    return pauli(p);
}

ResolvedExperiment resolve_experiment(const ExperimentConfig& cfg)
{
    std::vector<ConfigIssue> issues;
    auto fail = [&](const std::string& field, const std::string& msg) { issues.push_back({field, 0, msg}); };

    std::optional<LindbladModel> model;
    const Preset* preset = nullptr;
    ParamMap params;
    try {
        if (!cfg.model.preset.empty()) {
            preset = &find_preset(cfg.model.preset);
            params = preset->resolve(cfg.model.params);
            model = preset->build(params);
        } else {
            if (cfg.model.hamiltonian) {
                model = LindbladModel(*cfg.model.hamiltonian, cfg.model.jumps);
            } else {
                model = LindbladModel::dissipative(cfg.model.jumps);
            }
        }
    } catch (const ValidationError& e) {
        fail("model", e.what());
    }
    if (!model) {
        throw ConfigError(std::move(issues));
    }
    const std::size_t dim = model->dim();

    std::optional<MonitoringSpec> spec;
    try {
        spec = make_monitoring(resolve_operator(cfg.measurement, dim), cfg.gamma_m, cfg.eta);
    } catch (const ValidationError& e) {
        fail("monitoring.c", e.what());
    }

    std::optional<DensityMatrix> rho0;
    try {
        const auto& s = cfg.initial_state;
        if (s.matrix) {
            if (static_cast<std::size_t>(s.matrix->rows()) != dim) {
                throw DimensionMismatch(dim, static_cast<std::size_t>(s.matrix->rows()), "initial_state");
            }
            rho0 = DensityMatrix(*s.matrix);
        } else if (s.name == "steady_state") {
            // Only the trajectory kinds need this, and it may legitimately be degenerate.
            if (cfg.kind == ExperimentKind::trajectory || cfg.kind == ExperimentKind::ensemble) {
                rho0 = steady_state(*model);
            } else {
                rho0 = DensityMatrix::maximally_mixed(dim);
            }
        } else if (s.name == "maximally_mixed") {
            rho0 = DensityMatrix::maximally_mixed(dim);
        } else if (s.name.starts_with("basis:")) {
            std::size_t k = 0;
            const auto digits = std::string_view(s.name).substr(6);
            const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
            if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
                throw ValidationError("malformed basis index in '" + s.name + "'");
            }
            rho0 = DensityMatrix::basis_state(dim, k);
        } else {
            throw UnknownName("unknown initial state '" + s.name +
                              "' (use steady_state, maximally_mixed, basis:<k> or a matrix)");
        }
    } catch (const ValidationError& e) {
        fail("initial_state", e.what());
    }

    std::vector<NamedObservable> observables;
    if (cfg.observables.empty()) {
        if (spec) {
            const std::string name = cfg.measurement.matrix ? "c" : cfg.measurement.name;
            observables.push_back({name, hermitize(spec->c)});
        }
    } else {
        for (std::size_t k = 0; k < cfg.observables.size(); ++k) {
            const auto& o = cfg.observables[k];
            try {
                Operator op = resolve_operator(o.op, dim);
                if ((op - op.adjoint()).norm() > 1e-12 * std::max(1.0, op.norm())) {
                    throw ValidationError("observable must be Hermitian");
                }
                observables.push_back({o.name, std::move(op)});
            } catch (const ValidationError& e) {
                fail("observables[" + std::to_string(k) + "]", e.what());
            }
        }
    }
    if (!cfg.localization_observable.empty()) {
        const bool found = std::any_of(observables.begin(), observables.end(),
                                       [&](const auto& o) { return o.name == cfg.localization_observable; });
        if (!found && issues.empty()) {
            fail("ensemble.localization_observable", "'" + cfg.localization_observable + "' is not an observable");
        }
    }

    if (!issues.empty()) {
        throw ConfigError(std::move(issues));
    }
    return ResolvedExperiment{std::move(*model), std::move(*spec), std::move(*rho0), std::move(observables), preset,
                              std::move(params)};
}

}  // namespace contmeas
