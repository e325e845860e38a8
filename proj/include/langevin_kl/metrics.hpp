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

#include <vector>

#include "langevin_kl/gaussian_oracle.hpp"
#include "langevin_kl/types.hpp"

namespace langevin
{

    /// Sample moments of an ensemble (one chain per row) with standard errors.
    struct MomentSummary
    {
        Vector mean;
        Matrix cov; // unbiased, divides by n - 1
        double second_moment = 0.0; // tr(cov) + |mean|^2
        Index n = 0;

        Vector mean_se;
        Matrix cov_se;
        double second_moment_se = 0.0;
    };

    /// Requires at least two rows. Sums run in row order, so the result does
    /// not depend on how the ensemble was produced.
    MomentSummary summarize(const Eigen::Ref<const StateMatrix> &states);

    /// W2 between two equal-size 1-D samples via the sorted (quantile) coupling.
    double empirical_w2_1d(std::vector<double> a, std::vector<double> b);

    struct ZScores
    {
        Vector mean;
        Matrix cov;
        double second_moment = 0.0;

        /// Largest |z| over all fields.
        double max_abs() const;
    };

    /// (estimate - oracle) / SE for every field. A zero SE gives z = 0 when the
    /// estimate matches exactly and +-inf otherwise.
    ZScores z_scores_vs_oracle(const MomentSummary &s, const GaussianLawd &law);

} // namespace langevin
