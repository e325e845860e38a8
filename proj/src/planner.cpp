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

#include "langevin_kl/planner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "langevin_kl/errors.hpp"

namespace langevin
{
    namespace
    {
        // Values that land on an integer up to roundoff are not bumped up.
        double tolerant_ceil(double x)
        {
            const double nearest = std::round(x);
            if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x)))
                return nearest;
            return std::ceil(x);
        }

        std::uint64_t ceil_count(double x, const char *what)
        {
            if (!std::isfinite(x) || x > 9.0e18)
                throw PlanningError(std::string(what) + ": iteration count overflows");
            return std::max<std::uint64_t>(1, std::uint64_t(tolerant_ceil(x)));
        }

        void check_strong_inputs(double m, double L, long d, const char *what)
        {
            if (!(m > 0.0) || !(L >= m) || !std::isfinite(L))
                throw PlanningError(std::string(what) + ": need 0 < m <= L");
            if (d < 1)
                throw PlanningError(std::string(what) + ": need d >= 1");
        }
    } // namespace

    std::string to_string(Regime regime)
    {
        switch (regime)
        {
        case Regime::Strong:
            return "strong";
        case Regime::Weak:
            return "weak";
        case Regime::HalvingStage:
            return "halving-stage";
        }
        return "unknown";
    }

    void StepPlan::validate() const
    {
        if (!(h > 0.0) || !std::isfinite(h))
            throw PlanningError("step plan: h must be positive and finite");
        if (k < 1)
            throw PlanningError("step plan: k must be >= 1");
        if (!(epsilon > 0.0))
            throw PlanningError("step plan: epsilon must be positive");
    }

    StepPlan plan_strong(double m, double L, long d, double epsilon)
    {
        check_strong_inputs(m, L, d, "plan_strong");
        if (!(epsilon > 0.0) || !std::isfinite(epsilon))
            throw PlanningError("plan_strong: epsilon must be positive");
        const double ratio = double(d) * L / (m * epsilon);
        if (!(ratio > 1.0))
            throw PlanningError("plan_strong: epsilon too large, log(dL/(m eps)) = " + std::to_string(std::log(ratio))
                                + " is not positive");

        StepPlan plan;
        plan.regime = Regime::Strong;
        plan.epsilon = epsilon;
        plan.h = m * epsilon / (16.0 * double(d) * L * L);
        plan.k = ceil_count(16.0 * (L * L) / (m * m) * double(d) * std::log(ratio) / epsilon, "plan_strong");
        plan.notes = "KL(p_kh || p*) <= eps from p0 = N(0, I/m)";
        return plan;
    }

    StepPlan plan_strong_tv(double m, double L, long d, double delta)
    {
        if (!(delta > 0.0))
            throw PlanningError("plan_strong_tv: delta must be positive");
        StepPlan plan = plan_strong(m, L, d, delta * delta);
        std::ostringstream os;
        os << "TV(p_kh, p*) <= sqrt(eps) = " << delta << " via Pinsker";
        plan.notes = os.str();
        return plan;
    }

    StepPlan plan_strong_w2(double m, double L, long d, double delta)
    {
        if (!(delta > 0.0))
            throw PlanningError("plan_strong_w2: delta must be positive");
        if (!(m > 0.0))
            throw PlanningError("plan_strong_w2: need m > 0");
        StepPlan plan = plan_strong(m, L, d, 0.5 * m * delta * delta);
        plan.loose_epsilon = m * delta * delta;
        std::ostringstream os;
        os << "W2(p_kh, p*) <= sqrt(2 eps / m) = " << delta << "; eps = m delta^2 / 2 (recipe value m delta^2 = "
           << *plan.loose_epsilon << " only guarantees sqrt(2) delta)";
        plan.notes = os.str();
        return plan;
    }

    StepPlan plan_weak(const WeakPlanInputs &in, double L, long d, double epsilon)
    {
        if (!(in.c1 > 0.0) || !(in.c2 > 0.0) || !(in.h_cap > 0.0) || !(in.kl0 > 0.0))
            throw PlanningError("plan_weak: C1, C2, h' and kl0 must all be positive");
        if (!(L > 0.0) || d < 1 || !(epsilon > 0.0))
            throw PlanningError("plan_weak: need L > 0, d >= 1, eps > 0");

        const double L2 = L * L;
        const double caps[3] = {
            epsilon / (in.c1 * (in.c1 + in.c2) * L2),
            epsilon * epsilon / (in.c1 * in.c1 * double(d) * L2),
            in.h_cap,
        };
        static const char *cap_names[3] = {"eps/(C1(C1+C2)L^2)", "eps^2/(C1^2 d L^2)", "h'"};
        const auto binding = std::min_element(caps, caps + 3) - caps;

        StepPlan plan;
        plan.regime = Regime::Weak;
        plan.epsilon = epsilon;
        plan.h = caps[binding] / 48.0;

        const double c1sq = in.c1 * in.c1;
        const double log_term = std::max(0.0, std::log(in.kl0));
        plan.k = ceil_count(2.0 * c1sq / (epsilon * plan.h) + 2.0 * c1sq * log_term / plan.h, "plan_weak");

        std::ostringstream os;
        os << "binding cap: " << cap_names[binding];
        if (in.kl0 <= 1.0)
            os << "; ln(kl0) term clamped at 0 (kl0 = " << in.kl0 << ")";
        plan.notes = os.str();
        return plan;
    }

    std::vector<StepPlan> plan_halving(double m, double L, long d, double epsilon, double kl0)
    {
        check_strong_inputs(m, L, d, "plan_halving");
        if (!(epsilon > 0.0))
            throw PlanningError("plan_halving: epsilon must be positive");
        std::vector<StepPlan> stages;
        if (!(kl0 > epsilon))
            return stages;

        const int n_stages = int(tolerant_ceil(std::log2(kl0 / epsilon)));
        const double rate = 16.0 * (L * L) / (m * m) * double(d);
        for (int j = 0; j < n_stages; ++j)
        {
            StepPlan s;
            s.regime = Regime::HalvingStage;
            s.epsilon = kl0 / std::ldexp(1.0, j + 1);
            s.h = m * s.epsilon / (16.0 * double(d) * L * L);
            s.k = ceil_count(rate * std::log(2.0) / s.epsilon, "plan_halving");
            s.notes = "stage " + std::to_string(j) + " of " + std::to_string(n_stages) + ": halve the KL gap";
            stages.push_back(std::move(s));
        }
        return stages;
    }

    double discretization_error_bound(double L, double h, long d, double second_moment)
    {
        return 2.0 * L * L * h * std::sqrt(second_moment) + 2.0 * L * std::sqrt(h * double(d));
    }

    double kl_init_bound(double m, double L, long d)
    {
        if (!(m > 0.0) || m > L)
            throw PlanningError("kl_init_bound: need 0 < m <= L");
        return double(d) * L / m;
    }

} // namespace langevin
