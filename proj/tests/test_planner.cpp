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

#include <cmath>
#include <limits>

#include "doctest.h"
#include "langevin_kl/errors.hpp"
#include "langevin_kl/planner.hpp"
#include "langevin_kl/random.hpp"

using namespace langevin;

namespace
{
    const double kInf = std::numeric_limits<double>::infinity();

    WeakPlanInputs weak(double c1, double c2, double h_cap, double kl0)
    {
        WeakPlanInputs in;
        in.c1 = c1;
        in.c2 = c2;
        in.h_cap = h_cap;
        in.kl0 = kl0;
        return in;
    }

    double uniform(NormalStream &s, double lo, double hi)
    {
        // Normal CDF of a normal draw is uniform; erfc keeps it in (0, 1).
        const double u = 0.5 * std::erfc(-s.next() / std::sqrt(2.0));
        return lo + (hi - lo) * u;
    }
} // namespace

TEST_SUITE("planner")
{
    TEST_CASE("strong plan values")
    {
        const StepPlan a = plan_strong(1, 2, 2, 0.1);
        CHECK(a.h == doctest::Approx(7.8125e-4).epsilon(1e-12));
        CHECK(a.k == 4722);
        CHECK(a.regime == Regime::Strong);
        // 1280 ln 40 = 4721.7...
        CHECK(a.k == std::uint64_t(std::ceil(1280.0 * std::log(40.0))));

        const StepPlan b = plan_strong(1, 1, 1, 0.05);
        CHECK(b.h == doctest::Approx(0.003125).epsilon(1e-12));
        CHECK(b.k == 959);
        CHECK(b.k == std::uint64_t(std::ceil(320.0 * std::log(20.0))));
    }

    TEST_CASE("strong plan errors")
    {
        CHECK_THROWS_AS(plan_strong(1, 1, 1, 2), PlanningError);
        CHECK_THROWS_AS(plan_strong(1, 1, 1, 1), PlanningError); // log is exactly 0
        CHECK_THROWS_AS(plan_strong(0, 1, 1, 0.1), PlanningError);
        CHECK_THROWS_AS(plan_strong(2, 1, 1, 0.1), PlanningError);
        CHECK_THROWS_AS(plan_strong(1, 1, 0, 0.1), PlanningError);
        CHECK_THROWS_AS(plan_strong(1, 1, 1, 0), PlanningError);
        CHECK_THROWS_AS(plan_strong(1, 1, 1, -0.1), PlanningError);
    }

    TEST_CASE("tv target squares delta")
    {
        const StepPlan tv = plan_strong_tv(1, 2, 2, 0.3);
        const StepPlan direct = plan_strong(1, 2, 2, 0.09);
        CHECK(tv.epsilon == doctest::Approx(0.09).epsilon(1e-15));
        CHECK(tv.h == doctest::Approx(direct.h).epsilon(1e-15));
        CHECK(tv.k == direct.k);
        CHECK(plan_strong_tv(1, 1, 1, 0.2).epsilon == doctest::Approx(0.04).epsilon(1e-15));
        CHECK_THROWS_AS(plan_strong_tv(1, 1, 1, 2), PlanningError);
        CHECK_THROWS_AS(plan_strong_tv(1, 1, 1, 0), PlanningError);
    }

    TEST_CASE("w2 target uses eps = m delta^2 / 2")
    {
        const StepPlan a = plan_strong_w2(1, 1, 1, 0.4);
        CHECK(a.epsilon == doctest::Approx(0.08).epsilon(1e-14));
        REQUIRE(a.loose_epsilon.has_value());
        CHECK(*a.loose_epsilon == doctest::Approx(0.16).epsilon(1e-14));
        // sqrt(2 eps / m) recovers delta.
        CHECK(std::sqrt(2.0 * a.epsilon / 1.0) == doctest::Approx(0.4).epsilon(1e-14));
        CHECK(plan_strong_w2(2, 2, 1, 0.1).epsilon == doctest::Approx(0.01).epsilon(1e-14));
        CHECK(plan_strong_w2(2, 5, 3, 0.1).epsilon == doctest::Approx(0.01).epsilon(1e-14));
        CHECK_THROWS_AS(plan_strong_w2(1, 1, 1, 0), PlanningError);
    }

    TEST_CASE("weak plan values")
    {
        const StepPlan a = plan_weak(weak(1, 1, kInf, std::exp(1.0)), 1, 1, 0.1);
        CHECK(a.h == doctest::Approx(0.01 / 48).epsilon(1e-12));
        CHECK(a.k == 105600);
        CHECK(a.regime == Regime::Weak);
        CHECK(a.notes.find("eps^2") != std::string::npos);

        const StepPlan b = plan_weak(weak(1, 10, 1e-6, std::exp(1.0)), 1, 1, 0.1);
        CHECK(b.h == doctest::Approx(1e-6 / 48).epsilon(1e-12));
        CHECK(b.notes.find("h'") != std::string::npos);

        const StepPlan c = plan_weak(weak(1, 1, kInf, 0.5), 1, 1, 0.1);
        CHECK(c.h == a.h);
        CHECK(c.k == 96000);
        CHECK(c.notes.find("clamped") != std::string::npos);
    }

    TEST_CASE("weak plan binding cap can be the first term")
    {
        // eps/(C1(C1+C2)L^2) = 0.5/(1*11) < eps^2/(C1^2 d L^2) = 0.25.
        const StepPlan p = plan_weak(weak(1, 10, kInf, 1), 1, 1, 0.5);
        CHECK(p.h == doctest::Approx(0.5 / 11.0 / 48.0).epsilon(1e-14));
        CHECK(p.notes.find("C1(C1+C2)") != std::string::npos);
    }

    TEST_CASE("weak plan errors")
    {
        CHECK_THROWS_AS(plan_weak(weak(0, 1, kInf, 1), 1, 1, 0.1), PlanningError);
        CHECK_THROWS_AS(plan_weak(weak(1, 0, kInf, 1), 1, 1, 0.1), PlanningError);
        CHECK_THROWS_AS(plan_weak(weak(1, 1, 0, 1), 1, 1, 0.1), PlanningError);
        CHECK_THROWS_AS(plan_weak(weak(1, 1, kInf, 0), 1, 1, 0.1), PlanningError);
        CHECK_THROWS_AS(plan_weak(weak(1, 1, kInf, 1), 0, 1, 0.1), PlanningError);
        CHECK_THROWS_AS(plan_weak(weak(1, 1, kInf, 1), 1, 1, 0), PlanningError);
    }

    TEST_CASE("halving schedule")
    {
        const auto stages = plan_halving(1, 1, 1, 0.25, 1.0);
        REQUIRE(stages.size() == 2);
        CHECK(stages[0].epsilon == 0.5);
        CHECK(stages[1].epsilon == 0.25);
        CHECK(stages[0].h == doctest::Approx(0.5 / 16));
        CHECK(stages[0].k == std::uint64_t(std::ceil(16 * std::log(2.0) / 0.5)));
        CHECK(stages[1].k == std::uint64_t(std::ceil(16 * std::log(2.0) / 0.25)));
        for (const auto &s : stages)
            CHECK(s.regime == Regime::HalvingStage);

        CHECK(plan_halving(1, 1, 1, 0.25, 0.25).empty());
        CHECK(plan_halving(1, 1, 1, 0.25, 0.1).empty());
    }

    TEST_CASE("halving total is below the single strong plan when kl0 = dL/m")
    {
        const double kl0 = kl_init_bound(1, 1, 1);
        std::uint64_t total = 0;
        for (const auto &s : plan_halving(1, 1, 1, 0.25, kl0))
            total += s.k;
        CHECK(total <= plan_strong(1, 1, 1, 0.25).k);
    }

    TEST_CASE("halving final stage reaches epsilon")
    {
        for (double eps : {0.3, 0.1, 0.013})
        {
            const auto stages = plan_halving(1, 2, 3, eps, 6.0);
            REQUIRE(!stages.empty());
            CHECK(stages.back().epsilon <= eps);
            if (stages.size() > 1)
                CHECK(stages[stages.size() - 2].epsilon > eps);
        }
    }

    TEST_CASE("discretization error bound")
    {
        CHECK(discretization_error_bound(1, 0.01, 1, 4) == doctest::Approx(0.24).epsilon(1e-12));
        CHECK(discretization_error_bound(1, 0, 5, 7) == 0.0);

        // At the strong-plan step with sm = 4d/m the two terms are 2L^2 h sqrt(sm)
        // = 0.01 and 2L sqrt(hd) = 0.1, so the total 0.11 exceeds sqrt(m eps)/2 =
        // 0.1. The second term alone already equals that threshold.
        const double m = 1, L = 1, eps = 0.04;
        const long d = 1;
        const double h = plan_strong(m, L, d, eps).h;
        const double bound = discretization_error_bound(L, h, d, 4.0 * d / m);
        CHECK(bound == doctest::Approx(0.11).epsilon(1e-12));
        CHECK(bound > 0.5 * std::sqrt(m * eps));
        CHECK(2.0 * L * std::sqrt(h * d) == doctest::Approx(0.5 * std::sqrt(m * eps)).epsilon(1e-12));
        CHECK(bound <= 0.5 * std::sqrt(m * eps) * (1.0 + 0.5 * std::sqrt(eps / d)) + 1e-15);
    }

    TEST_CASE("initial KL bound")
    {
        CHECK(kl_init_bound(1, 2, 3) == 6.0);
        for (long d : {1, 4, 17})
            CHECK(kl_init_bound(2.5, 2.5, d) == double(d));
        CHECK_THROWS_AS(kl_init_bound(0, 1, 1), PlanningError);
        CHECK_THROWS_AS(kl_init_bound(2, 1, 1), PlanningError);
    }

    TEST_CASE("step plan invariant")
    {
        StepPlan p;
        p.h = 0.1;
        p.k = 0;
        p.epsilon = 0.1;
        CHECK_THROWS_AS(p.validate(), PlanningError);
        p.k = 1;
        CHECK_NOTHROW(p.validate());
        p.h = 0;
        CHECK_THROWS_AS(p.validate(), PlanningError);
    }

    TEST_CASE("strong plan properties on random inputs")
    {
        NormalStream s(2024, 0, 0);
        for (int trial = 0; trial < 500; ++trial)
        {
            const double m = uniform(s, 0.05, 3.0);
            const double L = m * uniform(s, 1.0, 20.0);
            const long d = 1 + long(uniform(s, 0, 50));
            const double eps = uniform(s, 1e-3, 0.9) * d * L / m;
            const StepPlan p = plan_strong(m, L, d, eps);
            CHECK(p.h <= 1.0 / L);
            CHECK(p.h * double(p.k) >= (1.0 / m) * std::log(d * L / (m * eps)) * (1 - 1e-12));

            // Halving eps at most doubles k per unit of log factor (up to one step of rounding).
            const StepPlan q = plan_strong(m, L, d, 0.5 * eps);
            const double per_log_p = double(p.k) / std::log(d * L / (m * eps));
            const double per_log_q = double(q.k) / std::log(d * L / (m * 0.5 * eps));
            CHECK(per_log_q <= 2.0 * per_log_p + 1.0 / std::log(d * L / (m * 0.5 * eps)) + 1e-9);
        }
    }

    TEST_CASE("weak plan properties on random inputs")
    {
        NormalStream s(7, 0, 0);
        for (int trial = 0; trial < 500; ++trial)
        {
            const WeakPlanInputs in = weak(uniform(s, 0.1, 5), uniform(s, 0.1, 5),
                                           trial % 3 == 0 ? kInf : uniform(s, 1e-5, 1), uniform(s, 0.01, 50));
            const double L = uniform(s, 0.1, 4);
            const long d = 1 + long(uniform(s, 0, 10));
            const double eps = uniform(s, 0.01, 1);
            const StepPlan p = plan_weak(in, L, d, eps);
            const double cap = std::min({eps / (in.c1 * (in.c1 + in.c2) * L * L),
                                         eps * eps / (in.c1 * in.c1 * d * L * L), in.h_cap});
            CHECK(p.h <= in.h_cap);
            CHECK(p.h == doctest::Approx(cap / 48).epsilon(1e-14));
            const double k_real = 2 * in.c1 * in.c1 / (eps * p.h) + 2 * in.c1 * in.c1 * std::max(0.0, std::log(in.kl0)) / p.h;
            CHECK(double(p.k) >= k_real * (1 - 1e-9));
            CHECK(double(p.k) < k_real + 1);
        }
    }
}
