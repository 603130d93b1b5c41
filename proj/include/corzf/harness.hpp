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

#pragma once

#include "corzf/config.hpp"
#include "corzf/oracles.hpp"
#include "corzf/sim_engine.hpp"
#include "corzf/wishart_analytics.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace corzf
{

struct RunManifest
{
    std::string config_path;
    ExperimentConfig config;
    std::string output_dir;
    std::string version = kVersion;
    std::uint64_t seed = 0;
};

inline std::string format_number(double v)
{
    if (std::isnan(v))
        return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline const std::vector<std::string> &results_columns()
{
    static const std::vector<std::string> cols = {"series",  "scheme",      "feedback", "bits",      "rho0_db",
                                                  "mean_sinr", "mean_sinr_db", "stderr", "mean_se",  "se_stderr",
                                                  "analytic_sinr_db", "analytic_se", "trials", "seed"};
    return cols;
}

inline void write_results_csv(std::ostream &os, const ExperimentResult &res)
{
    const auto &cols = results_columns();
    for (std::size_t i = 0; i < cols.size(); ++i)
        os << (i ? "," : "") << cols[i];
    os << "\n";
    for (const auto &p : res.points)
        os << p.series << ',' << enum_name(p.scheme) << ',' << enum_name(p.feedback) << ',' << p.bits << ','
           << format_number(p.rho0_db) << ',' << format_number(p.mean_sinr) << ',' << format_number(p.mean_sinr_db)
           << ',' << format_number(p.stderr_sinr) << ',' << format_number(p.mean_se) << ','
           << format_number(p.se_stderr) << ',' << format_number(p.analytic_sinr_db) << ','
           << format_number(p.analytic_se) << ',' << p.trials << ',' << p.seed << "\n";
}

/// Simulated vs closed-form values for the series that request an overlay.
inline void write_overlay_csv(std::ostream &os, const ExperimentResult &res)
{
    os << "series,rho0_db,mean_sinr_db,analytic_sinr_db,delta_db,mean_se,analytic_se,trials,seed\n";
    for (const auto &p : res.points)
    {
        if (std::isnan(p.analytic_sinr_db))
            continue;
        os << p.series << ',' << format_number(p.rho0_db) << ',' << format_number(p.mean_sinr_db) << ','
           << format_number(p.analytic_sinr_db) << ',' << format_number(p.analytic_sinr_db - p.mean_sinr_db) << ','
           << format_number(p.mean_se) << ',' << format_number(p.analytic_se) << ',' << p.trials << ',' << p.seed
           << "\n";
    }
}

/// Mean cell-edge SE pivoted to one row per rho0 and one column per series.
inline void write_summary_csv(std::ostream &os, const ExperimentConfig &cfg, const ExperimentResult &res)
{
    os << "rho0_db";
    for (const auto &s : cfg.series)
        os << ',' << s.label;
    os << ",trials,seed\n";
    for (double r : cfg.rho0_db)
    {
        os << format_number(r);
        for (const auto &s : cfg.series)
            os << ',' << format_number(res.at(s.label, r).mean_se);
        os << ',' << cfg.trials << ',' << cfg.seed << "\n";
    }
}

inline Json manifest_to_json(const RunManifest &m)
{
    Json j;
    j["config_path"] = m.config_path;
    j["output_dir"] = m.output_dir;
    j["version"] = m.version;
    j["seed"] = m.seed;
    j["config"] = config_to_json(m.config);
    return j;
}

struct RunOutcome
{
    ExperimentResult result;
    std::vector<std::string> files;
    int exit_code = 0;
};

/// Runs the experiment and writes results.csv, summary.csv, manifest.json
/// and, when any series requests it, overlay.csv. Exit code 2 signals a
/// failed invariant self-check.
inline RunOutcome run(const RunManifest &m, int workers = 0)
{
    namespace fs = std::filesystem;
    RunOutcome out;
    out.result = run_experiment(m.config, workers);
    fs::create_directories(m.output_dir);
    auto open = [&](const std::string &name) {
        const auto path = (fs::path(m.output_dir) / name).string();
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot write '" + path + "'");
        out.files.push_back(path);
        return f;
    };
    {
        auto f = open("results.csv");
        write_results_csv(f, out.result);
    }
    {
        auto f = open("summary.csv");
        write_summary_csv(f, m.config, out.result);
    }
    bool any_overlay = false;
    for (const auto &s : m.config.series)
        any_overlay = any_overlay || s.overlay;
    if (any_overlay)
    {
        auto f = open("overlay.csv");
        write_overlay_csv(f, out.result);
    }
    {
        auto f = open("manifest.json");
        f << manifest_to_json(m).dump(2) << "\n";
    }
    out.exit_code = out.result.self_check_failures > 0 ? 2 : 0;
    return out;
}

struct OracleRow
{
    int M = 0;
    double alpha = 0.0;
    WishartTerms closed;
    OracleEstimate sampled;
    double quad_d1 = 0, quad_d2 = 0, quad_f = 0;

    double z_max() const
    {
        return std::max({std::abs(sampled.d1 - closed.d1) / sampled.se_d1, std::abs(sampled.d2 - closed.d2) / sampled.se_d2,
                         std::abs(sampled.f - closed.f) / sampled.se_f});
    }
    double quad_rel_max() const
    {
        return std::max({std::abs(quad_d1 / closed.d1 - 1), std::abs(quad_d2 / closed.d2 - 1), std::abs(quad_f / closed.f - 1)});
    }
};

/// Closed forms against the eigenvalue Monte Carlo and the quadrature oracle
/// over M in {2, 4, 6, 8} and alpha in {0.01, 0.1, 1, 10}.
inline std::vector<OracleRow> oracle_suite(std::uint64_t trials, std::uint64_t seed)
{
    const std::vector<double> alphas = {0.01, 0.1, 1.0, 10.0};
    std::vector<OracleRow> rows;
    for (int M : {2, 4, 6, 8})
    {
        const auto est = eigen_oracle(M, alphas, trials, seed);
        for (std::size_t i = 0; i < alphas.size(); ++i)
        {
            OracleRow r;
            r.M = M;
            r.alpha = alphas[i];
            r.closed = wishart_terms(M, alphas[i]);
            r.sampled = est[i];
            r.quad_d1 = quadrature::d_term(M, 1, alphas[i]);
            r.quad_d2 = quadrature::d_term(M, 2, alphas[i]);
            r.quad_f = quadrature::f_term(M, alphas[i]);
            rows.push_back(r);
        }
    }
    return rows;
}

inline void print_oracle_table(std::ostream &os, const std::vector<OracleRow> &rows)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "%3s %7s %14s %14s %14s %8s %10s\n", "M", "alpha", "D1", "D2", "F", "max|z|",
                  "quad_rel");
    os << buf;
    for (const auto &r : rows)
    {
        std::snprintf(buf, sizeof buf, "%3d %7.3g %14.9g %14.9g %14.9g %8.2f %10.2e\n", r.M, r.alpha, r.closed.d1,
                      r.closed.d2, r.closed.f, r.z_max(), r.quad_rel_max());
        os << buf;
    }
}

} // namespace corzf
