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

#include <algorithm>

#include "doctest.h"
#include "langevin_kl/errors.hpp"
#include "langevin_kl/verify.hpp"

using namespace langevin;

namespace
{
    void check_suite(const SuiteResult &s)
    {
        INFO("suite " << s.suite);
        CHECK(!s.verdicts.empty());
        for (const auto &v : s.verdicts)
        {
            INFO(v.name << ": " << v.detail);
            CHECK(v.passed);
            CHECK(!v.claim.empty());
            CHECK(v.margin >= -v.tolerance);
        }
        CHECK(s.passed());
    }
} // namespace

TEST_SUITE("verify")
{
    TEST_CASE("suite names")
    {
        const auto &names = suite_names();
        for (const char *n : {"planner", "potentials", "inequalities", "contraction", "oracle-equivalence", "moments"})
            CHECK(std::find(names.begin(), names.end(), n) != names.end());
    }

    TEST_CASE("unknown suite lists the known ones")
    {
        std::string message;
        try
        {
            run_suite("nosuchsuite", 1);
        }
        catch (const Error &e)
        {
            message = e.what();
        }
        for (const auto &n : suite_names())
            CHECK(message.find(n) != std::string::npos);
    }

    TEST_CASE("planner suite")
    {
        check_suite(verify_planner());
    }

    TEST_CASE("potentials suite")
    {
        check_suite(verify_potentials(1));
    }

    TEST_CASE("inequality suite over several seeds")
    {
        for (std::uint64_t seed : {1, 2, 3})
            check_suite(verify_inequalities(seed));
    }

    TEST_CASE("oracle equivalence suite")
    {
        check_suite(verify_oracle_equivalence());
    }

    TEST_CASE("contraction suite")
    {
        check_suite(verify_contraction(1));
    }

    TEST_CASE("worst margin")
    {
        SuiteResult s;
        s.suite = "x";
        s.verdicts.push_back({"a", "claim", 0.5, 0.0, true, ""});
        s.verdicts.push_back({"b", "claim", -0.25, 0.0, false, ""});
        CHECK(s.worst_margin() == -0.25);
        CHECK(!s.passed());
    }
}
