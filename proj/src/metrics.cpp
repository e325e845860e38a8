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

#include "langevin_kl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "langevin_kl/errors.hpp"

namespace langevin
{
    namespace
    {
        double z_of(double estimate, double truth, double se)
        {
            const double diff = estimate - truth;
            if (se > 0.0)
                return diff / se;
            if (diff == 0.0)
                return 0.0;
            return diff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        }
    } // namespace

    MomentSummary summarize(const Eigen::Ref<const StateMatrix> &states)
    {
        const Index n = states.rows();
        const Index d = states.cols();
        if (n < 2)
            throw Error("summarize: need at least two chains, got " + std::to_string(n));
        const double nd = double(n);

        MomentSummary s;
        s.n = n;
        s.mean = states.colwise().sum().transpose() / nd;

        const Matrix centered = states.rowwise() - s.mean.transpose();
        s.cov = centered.transpose() * centered / (nd - 1.0);
        s.second_moment = s.cov.trace() + s.mean.squaredNorm();

        s.mean_se = (s.cov.diagonal() / nd).cwiseSqrt();

        // SE of each covariance entry from the spread of the centered products,
        // floored at the normal-theory value. The floor keeps tiny ensembles
        // (n = 2 makes every centered product equal) from reporting zero.
        s.cov_se.resize(d, d);
        for (Index j = 0; j < d; ++j)
        {
            for (Index k = j; k < d; ++k)
            {
                const Eigen::ArrayXd prod = centered.col(j).array() * centered.col(k).array();
                const double var = (prod - prod.mean()).square().sum() / (nd - 1.0);
                const double normal = (s.cov(j, j) * s.cov(k, k) + s.cov(j, k) * s.cov(j, k)) / (nd - 1.0);
                s.cov_se(j, k) = s.cov_se(k, j) = std::sqrt(std::max(var / nd, normal));
            }
        }

        const Eigen::ArrayXd sq = states.rowwise().squaredNorm().array();
        const double sq_var = (sq - sq.mean()).square().sum() / (nd - 1.0);
        s.second_moment_se = std::sqrt(sq_var / nd);
        return s;
    }

    double empirical_w2_1d(std::vector<double> a, std::vector<double> b)
    {
        if (a.size() != b.size())
            throw DimensionError("empirical_w2_1d: sample counts differ (" + std::to_string(a.size()) + " vs "
                                 + std::to_string(b.size()) + ")");
        if (a.empty())
            return 0.0;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            acc += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(acc / double(a.size()));
    }

    double ZScores::max_abs() const
    {
        double worst = std::abs(second_moment);
        if (mean.size() > 0)
            worst = std::max(worst, mean.cwiseAbs().maxCoeff());
        if (cov.size() > 0)
            worst = std::max(worst, cov.cwiseAbs().maxCoeff());
        return worst;
    }

    ZScores z_scores_vs_oracle(const MomentSummary &s, const GaussianLawd &law)
    {
        const Index d = s.mean.size();
        if (law.dim() != d || law.cov.rows() != d)
            throw DimensionError("z_scores_vs_oracle: dimension mismatch");
        ZScores z;
        z.mean.resize(d);
        z.cov.resize(d, d);
        for (Index j = 0; j < d; ++j)
        {
            z.mean[j] = z_of(s.mean[j], law.mean[j], s.mean_se[j]);
            for (Index k = 0; k < d; ++k)
                z.cov(j, k) = z_of(s.cov(j, k), law.cov(j, k), s.cov_se(j, k));
        }
        z.second_moment = z_of(s.second_moment, law.second_moment(), s.second_moment_se);
        return z;
    }

} // namespace langevin
