// SPDX-License-Identifier: Apache-2.0
//
// corzf - coordinated regularized zero-forcing precoding toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "corzf/corzf.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace
{

// A bare preset name ("fig3") resolves to the shipped preset file.
std::string resolve_config(const std::string &arg)
{
    namespace fs = std::filesystem;
    if (fs::exists(arg))
        return arg;
#ifdef CORZF_PRESET_DIR
    const auto preset = fs::path(CORZF_PRESET_DIR) / (arg + ".json");
    if (fs::exists(preset))
        return preset.string();
#endif
    return arg;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Coordinated RZF precoding: closed forms, bit allocation and Monte Carlo sweeps"};
    app.require_subcommand(1);
    app.set_version_flag("--version", corzf::kVersion);

    auto *run = app.add_subcommand("run", "run an experiment and write CSV results");
    std::string run_config, out_dir;
    long long trials = 0;
    long long seed = -1;
    int workers = 0;
    run->add_option("config", run_config, "config file or preset name")->required();
    run->add_option("--out,-o", out_dir, "output directory (default: results/<name>)");
    run->add_option("--trials,-n", trials, "override the trial count");
    run->add_option("--seed", seed, "override the RNG seed");
    run->add_option("--workers,-j", workers, "worker threads (default: CORZF_WORKERS or all cores)");

    auto *validate = app.add_subcommand("validate", "parse a config and print it with all defaults");
    std::string validate_config;
    validate->add_option("config", validate_config, "config file or preset name")->required();

    auto *oracle = app.add_subcommand("oracle", "compare closed forms with sampled and quadrature oracles");
    long long oracle_trials = 100000;
    long long oracle_seed = 2024;
    double z_limit = 4.0;
    oracle->add_option("--trials,-n", oracle_trials, "eigenvalue draws per M");
    oracle->add_option("--seed", oracle_seed, "RNG seed");
    oracle->add_option("--z-limit", z_limit, "largest tolerated |z| score");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*validate)
        {
            const auto cfg = corzf::parse_config(resolve_config(validate_config));
            std::cout << corzf::config_to_json(cfg).dump(2) << "\n";
            return 0;
        }
        if (*oracle)
        {
            if (oracle_trials < 1000)
                throw corzf::ConfigError("--trials: at least 1000 required");
            const auto rows = corzf::oracle_suite(static_cast<std::uint64_t>(oracle_trials),
                                                  static_cast<std::uint64_t>(oracle_seed));
            corzf::print_oracle_table(std::cout, rows);
            int bad = 0;
            for (const auto &r : rows)
                bad += (r.z_max() > z_limit || r.quad_rel_max() > 1e-9) ? 1 : 0;
            std::cout << (bad ? "oracle: FAILED " : "oracle: ok ") << rows.size() - bad << "/" << rows.size() << "\n";
            return bad ? 1 : 0;
        }
        corzf::RunManifest m;
        m.config_path = resolve_config(run_config);
        m.config = corzf::parse_config(m.config_path);
        if (trials > 0)
            m.config.trials = static_cast<std::uint64_t>(trials);
        if (seed >= 0)
            m.config.seed = static_cast<std::uint64_t>(seed);
        m.config.validate();
        m.seed = m.config.seed;
        m.output_dir = out_dir.empty() ? (std::filesystem::path("results") / m.config.name).string() : out_dir;
        const auto outcome = corzf::run(m, workers);
        for (const auto &f : outcome.files)
            std::cout << "wrote " << f << "\n";
        if (outcome.exit_code != 0)
            std::cerr << "self-check failures: " << outcome.result.self_check_failures << "\n";
        return outcome.exit_code;
    }
    catch (const corzf::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
