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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "contmeas/experiment.hpp"
#include "contmeas/version.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace contmeas;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "contmeas_tests" / name;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json summary_of(const fs::path& dir)
{
    return json::parse(slurp(dir / "summary.json"));
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

RunResult run(const std::string& text, const fs::path& out, RunOptions options = {})
{
    options.output_directory = out;
    return run_experiment(parse_config(text), options);
}

const std::string kThermal = R"("model": { "preset": "thermal_qubit", "params": { "gamma_down": 3, "gamma_up": 1 } })";

int shell(const std::string& cmd)
{
    const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("experiment")
{
    TEST_CASE("invariance check on the QND fixture")
    {
        const auto out = scratch("inv");
        const auto r = run(R"({ "kind": "invariance-check", )" + kThermal +
                               R"(, "monitoring": { "c": "sigma_z", "gamma_m": 2 }, "assertions": { "expect_invariant": true } })",
                           out);
        CHECK(r.exit_code == kExitOk);
        const auto s = summary_of(out);
        CHECK(s["results"]["residual_norm"].get<double>() <= 1e-12);
        CHECK(s["results"]["verdict"] == "invariant");
        CHECK(s["results"]["preset_expects_invariant"] == true);
        CHECK(s["results"]["analytic_steady_state_error"].get<double>() < 1e-12);
        CHECK(s["verdict"] == "pass");
        CHECK(s["config"]["monitoring"]["gamma_m"] == 2.0);
        CHECK(s["resolved"]["dim"] == 2);
        CHECK(s.contains("assertions"));

        const auto meta = json::parse(slurp(out / "metadata.json"));
        CHECK(meta["config_hash"].get<std::string>().rfind("fnv1a64:", 0) == 0);
        CHECK(meta.contains("seed"));
        CHECK(meta["version"] == std::string(kVersion));
        CHECK(meta.contains("timestamp"));
    }

    TEST_CASE("failed assertions exit with 3")
    {
        const auto out = scratch("inv_fail");
        const auto r = run(R"({ "kind": "invariance-check", )" + kThermal +
                               R"(, "monitoring": { "c": "sigma_x" }, "assertions": { "expect_invariant": true } })",
                           out);
        CHECK(r.exit_code == kExitAssertion);
        const auto s = summary_of(out);
        CHECK(s["verdict"] == "fail");
        CHECK(s["results"]["verdict"] == "not invariant");
        CHECK(s["results"]["residual_norm"].get<double>() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
        CHECK(s["assertions"][0]["passed"] == false);
    }

    TEST_CASE("gamma sweep on the counterexample")
    {
        const auto out = scratch("sweep");
        const auto r = run(R"({ "kind": "gamma-sweep", )" + kThermal +
                               R"(, "monitoring": { "c": "sigma_x" } })",
                           out);
        CHECK(r.exit_code == kExitOk);
        const auto rows = read_csv(out / "sweep.csv");
        REQUIRE(rows.size() == 10);  // header, 0, 8 default rates
        CHECK(rows[0][0] == "gamma_m[rate]");
        CHECK(rows[0][1] == "drift[1]");
        CHECK(rows[0].back() == "rate_equation_p_1[1]");
        double previous = -1.0;
        for (std::size_t k = 1; k < rows.size(); ++k) {
            const double gamma = std::stod(rows[k][0]);
            const double drift = std::stod(rows[k][1]);
            CHECK(drift >= previous);
            if (gamma > 0.0) CHECK(drift > 1e-3);
            else CHECK(drift < 1e-12);
            previous = drift;
            CHECK(std::stod(rows[k][3]) == doctest::Approx(std::stod(rows[k][4])).epsilon(1e-10));
        }
        const auto s = summary_of(out);
        CHECK(s["results"]["drift_monotone"] == true);
        CHECK(s["results"]["rate_equation_max_error"].get<double>() < 1e-10);
    }

    TEST_CASE("single-member ensemble matches the trajectory run")
    {
        const std::string body = kThermal + R"(, "monitoring": { "c": "sigma_z", "gamma_m": 4 },
            "initial_state": "maximally_mixed",
            "trajectory": { "dt": 0.001, "t_final": 0.5, "seed": 21, "sample_stride": 25 },
            "ensemble": { "n_trajectories": 1, "base_seed": 21 } })";
        const auto a = scratch("traj");
        const auto b = scratch("ens1");
        CHECK(run(R"({ "kind": "trajectory", )" + body, a).exit_code == kExitOk);
        CHECK(run(R"({ "kind": "ensemble", )" + body, b).exit_code == kExitOk);
        CHECK(slurp(a / "timeseries.csv") == slurp(b / "timeseries.csv"));
        CHECK(fs::exists(a / "record.csv"));
        CHECK_FALSE(fs::exists(b / "record.csv"));
        const auto record = read_csv(a / "record.csv");
        CHECK(record.size() == 501);
        CHECK(record[0][1] == "dY[sqrt(1/rate)]");
    }

    TEST_CASE("outputs are byte-identical across runs and thread counts")
    {
        const std::string text = R"({ "kind": "ensemble", )" + kThermal + R"(,
            "monitoring": { "c": "sigma_z", "gamma_m": 2 },
            "trajectory": { "dt": 0.001, "t_final": 0.4, "sample_stride": 40 },
            "ensemble": { "n_trajectories": 50, "base_seed": 5 },
            "assertions": { "max_uncollapse": "noise_floor", "master_equation_k": 5 } })";
        const auto a = scratch("det_a");
        const auto b = scratch("det_b");
        RunOptions one;
        one.threads = 1;
        RunOptions many;
        many.threads = 6;
        CHECK(run(text, a, one).exit_code == kExitOk);
        CHECK(run(text, b, many).exit_code == kExitOk);
        for (const char* f : {"summary.json", "timeseries.csv"}) {
            CAPTURE(f);
            CHECK(slurp(a / f) == slurp(b / f));
        }
        const auto header = read_csv(a / "timeseries.csv")[0];
        CHECK(header[0] == "time[1/rate]");
        for (const auto& h : header) CHECK(h.find('[') != std::string::npos);
        const auto meta = json::parse(slurp(b / "metadata.json"));
        CHECK(meta["threads"] == 6);
    }

    TEST_CASE("overrides")
    {
        const std::string text = R"({ "kind": "ensemble", )" + kThermal + R"(,
            "monitoring": { "c": "sigma_z", "gamma_m": 2 },
            "trajectory": { "dt": 0.001, "t_final": 0.1, "sample_stride": 50 },
            "ensemble": { "n_trajectories": 50 } })";
        const auto out = scratch("override");
        RunOptions o;
        o.n_trajectories = 3;
        o.seed = 99;
        CHECK(run(text, out, o).exit_code == kExitOk);
        const auto s = summary_of(out);
        CHECK(s["results"]["n_requested"] == 3);
        CHECK(s["config"]["ensemble"]["base_seed"] == 99);
        CHECK(json::parse(slurp(out / "metadata.json"))["seed"] == 99);
    }

    TEST_CASE("numerical failures exit with 2 and name the stage")
    {
        const auto out = scratch("degenerate");
        const auto r = run(R"({ "kind": "invariance-check",
            "model": { "hamiltonian": [[0, 0], [0, 0]], "jumps": [ [[1, 0], [0, -1]] ] },
            "monitoring": { "c": "sigma_x" } })",
                           out);
        CHECK(r.exit_code == kExitNumerical);
        const auto s = summary_of(out);
        CHECK(s["status"] == "numerical_error");
        CHECK(s["verdict"] == "error");
        CHECK(s["error"].get<std::string>().rfind("invariance check:", 0) == 0);
    }

    TEST_CASE("command line")
    {
        const std::string cli = CONTMEAS_CLI_PATH;
        const std::string configs = CONTMEAS_CONFIG_DIR;
        const auto out = scratch("cli");
        CHECK(shell(cli + " invariance-check -c " + configs + "/invariance_qnd.jsonc -o " + out.string()) == 0);
        CHECK(fs::exists(out / "summary.json"));
        CHECK(shell(cli + " gamma-sweep -c " + configs + "/sweep_counterexample.jsonc -o " + (out / "s").string()) == 0);
        // the file says invariance-check
        CHECK(shell(cli + " ensemble -c " + configs + "/invariance_qnd.jsonc -o " + out.string()) == 1);
        CHECK(shell(cli + " trajectory -c /nonexistent.jsonc") == 1);
        CHECK(shell(cli + " bogus") == 1);
        CHECK(shell(cli + " --version") == 0);
        CHECK(shell(cli + " ensemble -c " + configs + "/ensemble_uncollapse.jsonc -n 2 -s 4 -j 2 -o " +
                    (out / "e").string()) == kExitAssertion);
        // two trajectories cannot meet the configured bounds
        const auto s = summary_of(out / "e");
        CHECK(s["results"]["n_requested"] == 2);
        CHECK(s["verdict"] == "fail");

        // every shipped config parses
        for (const auto& entry : fs::directory_iterator(configs)) {
            CAPTURE(entry.path().string());
            CHECK_NOTHROW(parse_config(slurp(entry.path())));
        }
    }
}
