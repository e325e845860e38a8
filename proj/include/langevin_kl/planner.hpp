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
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace langevin
{

    enum class Regime
    {
        Strong,
        Weak,
        HalvingStage
    };

    std::string to_string(Regime regime);

    /// A step size and iteration count for the unadjusted Langevin chain,
    /// together with the KL accuracy (nats) they were derived for.
    struct StepPlan
    {
        double h = 0.0;
        std::uint64_t k = 0;
        double epsilon = 0.0;
        Regime regime = Regime::Strong;
        std::string notes;
        /// plan_strong_w2 only: the looser accuracy eps = m delta^2 that the
        /// recipe prints, kept next to the self-consistent value actually used.
        std::optional<double> loose_epsilon;

        /// Throws PlanningError unless h > 0, k >= 1 and epsilon > 0.
        void validate() const;
    };

    struct WeakPlanInputs
    {
        /// W2 distance between the initial law and the target.
        double c1 = 0.0;
        /// Root second moment of the target.
        double c2 = 0.0;
        /// Largest step size for which the h-chain's stationary law stays
        /// within W2 distance c1 of the target. Infinity means "no cap".
        double h_cap = std::numeric_limits<double>::infinity();
        /// Initial KL gap KL(p0 || p*).
        double kl0 = 0.0;
    };

    /// h = m eps / (16 d L^2), k = ceil(16 (L/m)^2 d ln(dL/(m eps)) / eps).
    StepPlan plan_strong(double m, double L, long d, double epsilon);

    /// Plan for total-variation accuracy delta (runs plan_strong at eps = delta^2).
    StepPlan plan_strong_tv(double m, double L, long d, double delta);

    /// Plan for W2 accuracy delta. Uses eps = m delta^2 / 2, which makes
    /// sqrt(2 eps / m) = delta; the looser m delta^2 is kept in loose_epsilon.
    StepPlan plan_strong_w2(double m, double L, long d, double delta);

    /// Weakly convex (m = 0) schedule:
    ///   h = (1/48) min{ eps / (C1 (C1 + C2) L^2), eps^2 / (C1^2 d L^2), h' }
    ///   k = ceil( 2 C1^2 / (eps h) + 2 C1^2 max(0, ln kl0) / h )
    StepPlan plan_weak(const WeakPlanInputs &inputs, double L, long d, double epsilon);

    /// Restart schedule that halves the KL gap in each stage. Stage j targets
    /// eps_j = kl0 / 2^(j+1) and pays only ln 2 in its iteration count.
    /// Empty when kl0 <= epsilon.
    std::vector<StepPlan> plan_halving(double m, double L, long d, double epsilon, double kl0);

    /// 2 L^2 h sqrt(second_moment) + 2 L sqrt(h d): the multiplier of the
    /// Fisher-information norm in the per-step discretization error.
    double discretization_error_bound(double L, double h, long d, double second_moment);

    /// Upper bound d L / m on KL(N(0, I/m) || p*).
    double kl_init_bound(double m, double L, long d);

} // namespace langevin
