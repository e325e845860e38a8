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

// Command-line front end: plan, run, verify.
//
// Exit codes: 0 success, 1 a planning error or a failed check, 2 bad usage.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "langevin_kl/errors.hpp"
#include "langevin_kl/experiment.hpp"
#include "langevin_kl/planner.hpp"
#include "langevin_kl/verify.hpp"

namespace
{
    using namespace langevin;

    struct PlanArgs
    {
        std::string regime = "strong";
        double m = std::numeric_limits<double>::quiet_NaN();
        double L = std::numeric_limits<double>::quiet_NaN();
        long d = 1;
        double eps = std::numeric_limits<double>::quiet_NaN();
        std::string target = "kl";
        double delta = std::numeric_limits<double>::quiet_NaN();
        double c1 = std::numeric_limits<double>::quiet_NaN();
        double c2 = std::numeric_limits<double>::quiet_NaN();
        std::string h_prime = "inf";
        double kl0 = std::numeric_limits<double>::quiet_NaN();
        bool json = false;
    };

    struct UsageError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    void require(bool ok, const std::string &what)
    {
        if (!ok)
            throw UsageError(what);
    }

    nlohmann::ordered_json plan_to_json(const StepPlan &p)
    {
        nlohmann::ordered_json j;
        j["regime"] = to_string(p.regime);
        j["h"] = p.h;
        j["k"] = p.k;
        j["epsilon"] = p.epsilon;
        if (p.loose_epsilon)
            j["loose_epsilon"] = *p.loose_epsilon;
        j["notes"] = p.notes;
        return j;
    }

    void print_plan(const StepPlan &p)
    {
        std::printf("%-14s h = %.10g  k = %llu  eps = %.10g\n", to_string(p.regime).c_str(), p.h,
                    (unsigned long long)p.k, p.epsilon);
        if (!p.notes.empty())
            std::printf("               %s\n", p.notes.c_str());
    }

    int do_plan(const PlanArgs &a)
    {
        std::vector<StepPlan> plans;
        if (a.regime == "weak")
        {
            require(!std::isnan(a.c1) && !std::isnan(a.c2) && !std::isnan(a.kl0) && !std::isnan(a.L) && !std::isnan(a.eps),
                    "plan --regime weak needs --c1 --c2 --kl0 --L --eps");
            WeakPlanInputs in;
            in.c1 = a.c1;
            in.c2 = a.c2;
            in.kl0 = a.kl0;
            if (a.h_prime == "inf")
                in.h_cap = std::numeric_limits<double>::infinity();
            else
            {
                try
                {
                    in.h_cap = std::stod(a.h_prime);
                }
                catch (const std::exception &)
                {
                    throw UsageError("--h-prime must be a number or inf");
                }
            }
            plans.push_back(plan_weak(in, a.L, a.d, a.eps));
        }
        else
        {
            require(!std::isnan(a.m) && !std::isnan(a.L), "plan --regime " + a.regime + " needs --m and --L");
            if (a.regime == "halving")
            {
                require(!std::isnan(a.eps), "plan --regime halving needs --eps");
                const double kl0 = std::isnan(a.kl0) ? kl_init_bound(a.m, a.L, a.d) : a.kl0;
                plans = plan_halving(a.m, a.L, a.d, a.eps, kl0);
            }
            else if (a.target == "kl")
            {
                require(!std::isnan(a.eps), "plan --target kl needs --eps");
                plans.push_back(plan_strong(a.m, a.L, a.d, a.eps));
            }
            else
            {
                require(!std::isnan(a.delta), "plan --target " + a.target + " needs --delta");
                plans.push_back(a.target == "tv" ? plan_strong_tv(a.m, a.L, a.d, a.delta)
                                                 : plan_strong_w2(a.m, a.L, a.d, a.delta));
            }
        }

        if (a.json)
        {
            nlohmann::ordered_json out = nlohmann::ordered_json::array();
            for (const auto &p : plans)
                out.push_back(plan_to_json(p));
            std::cout << out.dump(2) << '\n';
        }
        else
        {
            if (plans.empty())
                std::printf("nothing to do: kl0 is already within eps\n");
            std::uint64_t total = 0;
            for (const auto &p : plans)
            {
                print_plan(p);
                total += p.k;
            }
            if (plans.size() > 1)
                std::printf("total k = %llu\n", (unsigned long long)total);
        }
        return 0;
    }

    void print_verdict(const Verdict &v)
    {
        std::printf("  [%s] %-36s margin %+.3e  %s\n", v.passed ? "pass" : "FAIL", v.name.c_str(), v.margin,
                    v.detail.c_str());
    }

    int do_run(const std::string &path)
    {
        RunConfig cfg;
        try
        {
            cfg = load_run_config(path);
        }
        catch (const Error &e)
        {
            throw UsageError(e.what());
        }
        const RunReport r = run_experiment(cfg);
        std::printf("%zu stage(s), %llu steps%s, %lld chains\n", r.plans.size(), (unsigned long long)r.steps_executed,
                    r.k_capped ? " (capped)" : "", (long long)cfg.n_chains);
        for (const auto &p : r.plans)
            print_plan(p);
        for (const auto &v : r.verdicts)
            print_verdict(v);
        std::printf("wrote %s/report.json\n", cfg.output.string().c_str());
        return r.passed() ? 0 : 1;
    }

    int do_verify(const std::string &suite, std::uint64_t seed)
    {
        std::vector<SuiteResult> results;
        try
        {
            results = run_suite(suite, seed);
        }
        catch (const Error &e)
        {
            throw UsageError(e.what());
        }
        bool ok = true;
        for (const auto &s : results)
        {
            std::printf("%s: %s (worst margin %+.3e)\n", s.suite.c_str(), s.passed() ? "pass" : "FAIL",
                        s.worst_margin());
            for (const auto &v : s.verdicts)
                print_verdict(v);
            ok = ok && s.passed();
        }
        return ok ? 0 : 1;
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Unadjusted Langevin sampling with KL step-size planning"};
    app.set_version_flag("--version", std::string(langevin::kVersion));
    app.require_subcommand(1);

    PlanArgs pa;
    auto *plan = app.add_subcommand("plan", "step size and iteration count for a target accuracy");
    plan->add_option("--regime", pa.regime)->check(CLI::IsMember({"strong", "weak", "halving"}));
    plan->add_option("--m", pa.m, "strong convexity constant");
    plan->add_option("--L", pa.L, "gradient Lipschitz constant");
    plan->add_option("--d", pa.d, "dimension")->check(CLI::PositiveNumber);
    plan->add_option("--eps", pa.eps, "KL target");
    plan->add_option("--target", pa.target)->check(CLI::IsMember({"kl", "tv", "w2"}));
    plan->add_option("--delta", pa.delta, "TV or W2 target");
    plan->add_option("--c1", pa.c1, "W2(p0, p*) bound");
    plan->add_option("--c2", pa.c2, "sqrt of target second moment");
    plan->add_option("--h-prime", pa.h_prime, "step cap, or inf");
    plan->add_option("--kl0", pa.kl0, "initial KL");
    plan->add_flag("--json", pa.json);

    std::string config;
    auto *run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("config", config)->required();

    std::string suite;
    std::uint64_t seed = 1;
    auto *verify = app.add_subcommand("verify", "check the inequalities on random instances");
    verify->add_option("suite", suite, "suite name or all")->required();
    verify->add_option("--seed", seed);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try
    {
        if (*plan)
            return do_plan(pa);
        if (*run)
            return do_run(config);
        return do_verify(suite, seed);
    }
    catch (const UsageError &e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    catch (const std::exception &e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
