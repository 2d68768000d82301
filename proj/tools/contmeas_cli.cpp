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

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "contmeas/experiment.hpp"
#include "contmeas/version.hpp"

namespace {

struct Flags
{
    std::string config;
    std::string output;
    int verbosity = 0;
    std::size_t n_trajectories = 0;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

int run(contmeas::ExperimentKind kind, const Flags& flags, const CLI::App& sub)
{
    using namespace contmeas;
    std::ifstream in(flags.config, std::ios::binary);
    if (!in) {
        std::cerr << "contmeas: cannot read config '" << flags.config << "'\n";
        return kExitValidation;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    ExperimentConfig config;
    try {
        config = parse_config(buf.str(), kind);
    } catch (const ConfigError& e) {
        std::cerr << flags.config << ": " << e.what() << '\n';
        return kExitValidation;
    }

    RunOptions options;
    options.verbosity = flags.verbosity;
    options.threads = flags.threads;
    options.output_directory = flags.output;
    if (sub.count("--n-trajectories") > 0) options.n_trajectories = flags.n_trajectories;
    if (sub.count("--seed") > 0) options.seed = flags.seed;

    const RunResult result = run_experiment(config, options);
    if (result.exit_code == kExitOk || result.exit_code == kExitAssertion) {
        std::cout << to_string(kind) << ": " << result.status << " -> " << result.output_directory.string() << '\n';
    } else {
        std::cerr << "contmeas: " << result.message << '\n';
    }
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Continuous weak measurement experiments"};
    app.set_version_flag("--version", contmeas::kVersion);
    app.require_subcommand(1);

    Flags flags;
    const std::pair<const char*, const char*> kinds[] = {
        {"invariance-check", "check whether monitoring leaves the steady state unchanged"},
        {"gamma-sweep", "steady state of the measured master equation over a range of rates"},
        {"trajectory", "one conditioned trajectory and its measurement record"},
        {"ensemble", "ensemble statistics over many conditioned trajectories"},
    };
    for (const auto& [name, help] : kinds) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", flags.config, "experiment config (JSON, comments allowed)")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("-o,--output", flags.output, "output directory (overrides the config)");
        sub->add_flag("-v,--verbose", flags.verbosity, "more progress output on stderr (repeatable)");
        sub->add_option("-n,--n-trajectories", flags.n_trajectories, "override ensemble.n_trajectories")
            ->check(CLI::PositiveNumber);
        sub->add_option("-s,--seed", flags.seed, "override the trajectory seed and ensemble base seed");
        sub->add_option("-j,--threads", flags.threads, "ensemble worker threads, 0 = all cores; never changes results");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : contmeas::kExitValidation;
    }

    for (const auto& [name, help] : kinds) {
        const CLI::App* sub = app.get_subcommand(name);
        if (sub->parsed()) {
            return run(*contmeas::parse_kind(name), flags, *sub);
        }
    }
    return contmeas::kExitValidation;
}
