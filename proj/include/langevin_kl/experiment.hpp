// Copyright 2026 The langevin-kl Authors
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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "langevin_kl/chain.hpp"
#include "langevin_kl/grid_oracle.hpp"
#include "langevin_kl/planner.hpp"
#include "langevin_kl/potential.hpp"
#include "langevin_kl/verify.hpp"

namespace langevin
{

    inline constexpr const char *kVersion = "0.1.0";

    /// A weak-regime input is either a number or "estimate" (computed on the
    /// 1-D grid oracle).
    struct WeakValue
    {
        std::optional<double> value; // empty means estimate

        bool estimate() const { return !value.has_value(); }
    };

    struct InitConfig
    {
        std::string kind = "gaussian_1_over_m"; // gaussian_1_over_m | gaussian | point
        std::vector<double> mean;
        std::vector<double> var;
        std::vector<double> x;
    };

    struct RunConfig
    {
        PotentialSpec potential;
        InitConfig init;
        std::string regime = "strong"; // strong | weak | halving
        double epsilon = 0.1;
        Index n_chains = 1000;
        std::uint64_t seed = 1;
        std::uint64_t record_every = 100;
        std::optional<std::uint64_t> max_steps;

        WeakValue c1, c2, h_prime, kl0;

        bool gaussian_oracle = true;
        bool grid_oracle = true;
        std::optional<GridSpec> grid;

        std::filesystem::path output = "langevin_run";
    };

    /// Parses the JSON run configuration described in the README. Throws
    /// langevin::Error naming the offending key.
    RunConfig parse_run_config(const std::string &text);
    RunConfig load_run_config(const std::filesystem::path &path);

    /// Resolved weak-regime constants with their provenance.
    struct WeakResolution
    {
        WeakPlanInputs inputs;
        bool c1_estimated = false, c2_estimated = false, h_prime_estimated = false, kl0_estimated = false;
        std::vector<std::pair<double, double>> h_prime_scan;
    };

    struct RunReport
    {
        RunConfig config;
        std::vector<StepPlan> plans;
        std::optional<WeakResolution> weak;
        std::uint64_t steps_executed = 0;
        bool k_capped = false;
        std::vector<TraceRow> trace;
        std::vector<Verdict> verdicts;
        std::vector<std::string> files;

        bool passed() const;
    };

    /// Runs the configured experiment: plans the schedule, runs the chain
    /// ensemble and any enabled oracles in lockstep, checks the applicable
    /// inequalities, and writes report.json plus metric CSVs under
    /// config.output. On failure every file it wrote is removed.
    RunReport run_experiment(const RunConfig &config);

    /// JSON text of a report (stable key order, no timestamps).
    std::string report_json(const RunReport &report);

} // namespace langevin
