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
#include <string>
#include <vector>

namespace langevin
{

    /// Outcome of checking one inequality or identity. margin is
    /// (allowed - observed) for the worst case seen; negative means violated.
    struct Verdict
    {
        std::string name;
        std::string claim;
        double margin = 0.0;
        double tolerance = 0.0;
        bool passed = false;
        std::string detail;
    };

    struct SuiteResult
    {
        std::string suite;
        std::vector<Verdict> verdicts;

        bool passed() const;
        double worst_margin() const;
    };

    /// Known suite names, in the order "all" runs them.
    const std::vector<std::string> &suite_names();

    /// Runs a named suite ("all" runs every suite). Throws langevin::Error
    /// for an unknown name; the message lists the known suites.
    std::vector<SuiteResult> run_suite(const std::string &name, std::uint64_t seed);

    // Individual suites.
    SuiteResult verify_inequalities(std::uint64_t seed, int n_pairs = 100, int n_flows = 20);
    SuiteResult verify_oracle_equivalence();
    SuiteResult verify_contraction(std::uint64_t seed);
    SuiteResult verify_moments(std::uint64_t seed);
    SuiteResult verify_potentials(std::uint64_t seed);
    SuiteResult verify_planner();

} // namespace langevin
