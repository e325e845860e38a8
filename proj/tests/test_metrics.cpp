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
#include <cmath>

#include "doctest.h"
#include "langevin_kl/chain.hpp"
#include "langevin_kl/errors.hpp"
#include "langevin_kl/gaussian_oracle.hpp"
#include "langevin_kl/metrics.hpp"
#include "langevin_kl/random.hpp"

using namespace langevin;

namespace
{
    StateMatrix normal_states(Index n, Index d, std::uint64_t seed, double sd = 1.0)
    {
        StateMatrix s(n, d);
        NormalStream g(seed, 0, 0);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < d; ++j)
                s(i, j) = sd * g.next();
        return s;
    }

    std::vector<double> column(const StateMatrix &s)
    {
        return std::vector<double>(s.data(), s.data() + s.rows());
    }
} // namespace

TEST_SUITE("metrics")
{
    TEST_CASE("identical points")
    {
        StateMatrix s(5, 2);
        s.rowwise() = Eigen::RowVector2d(1.5, -2.0);
        const MomentSummary m = summarize(s);
        CHECK(m.mean == Vector(Eigen::Vector2d(1.5, -2.0)));
        CHECK(m.cov.isZero(0.0));
        CHECK(m.second_moment == doctest::Approx(1.5 * 1.5 + 4.0));
        CHECK(m.n == 5);
    }

    TEST_CASE("second moment identity")
    {
        const MomentSummary m = summarize(normal_states(1000, 3, 5, 1.7));
        CHECK(std::abs(m.second_moment - (m.cov.trace() + m.mean.squaredNorm())) <= 1e-9);
    }

    TEST_CASE("standard normal ensemble")
    {
        const MomentSummary m = summarize(normal_states(100000, 3, 1));
        CHECK(std::abs(m.second_moment - 3.0) <= 5 * m.second_moment_se);
        for (Index j = 0; j < 3; ++j)
            CHECK(std::abs(m.mean[j]) <= 5 * m.mean_se[j]);
    }

    TEST_CASE("unbiased covariance by hand")
    {
        StateMatrix s(3, 1);
        s << 1, 2, 6;
        const MomentSummary m = summarize(s);
        CHECK(m.mean[0] == 3.0);
        CHECK(m.cov(0, 0) == doctest::Approx(7.0)); // (4 + 1 + 9) / 2
    }

    TEST_CASE("needs two samples")
    {
        CHECK_THROWS_AS(summarize(StateMatrix(1, 2)), Error);
    }

    TEST_CASE("permutation invariance")
    {
        StateMatrix s = normal_states(257, 2, 9);
        const MomentSummary a = summarize(s);
        StateMatrix r = s.colwise().reverse();
        const MomentSummary b = summarize(r);
        CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((a.cov - b.cov).cwiseAbs().maxCoeff() < 1e-13);
    }

    TEST_CASE("empirical w2")
    {
        const std::vector<double> a{0.3, -1.0, 2.5, 0.0};
        CHECK(empirical_w2_1d(a, a) == 0.0);
        std::vector<double> b = a;
        for (double &x : b)
            x += 1.0;
        CHECK(empirical_w2_1d(a, b) == doctest::Approx(1.0).epsilon(1e-15));
        std::vector<double> shuffled{2.5, 0.0, 0.3, -1.0};
        CHECK(empirical_w2_1d(a, shuffled) == 0.0);
        CHECK_THROWS_AS(empirical_w2_1d(a, {1.0}), DimensionError);
    }

    TEST_CASE("empirical w2 of two normals")
    {
        const double w = empirical_w2_1d(column(normal_states(100000, 1, 2)), column(normal_states(100000, 1, 3, 2.0)));
        CHECK(std::abs(w - 1.0) <= 0.05);
    }

    TEST_CASE("empirical w2 symmetry and triangle inequality")
    {
        NormalStream g(44, 0, 0);
        for (int t = 0; t < 50; ++t)
        {
            std::vector<double> a(40), b(40), c(40);
            for (int i = 0; i < 40; ++i)
            {
                a[i] = g.next();
                b[i] = 2 * g.next() + 1;
                c[i] = g.next() * g.next();
            }
            const double ab = empirical_w2_1d(a, b), ba = empirical_w2_1d(b, a);
            CHECK(std::abs(ab - ba) <= 1e-12);
            CHECK(ab <= empirical_w2_1d(a, c) + empirical_w2_1d(c, b) + 1e-12);
        }
    }

    TEST_CASE("z scores against the true law")
    {
        const MomentSummary m = summarize(normal_states(50000, 2, 17));
        const ZScores z = z_scores_vs_oracle(m, GaussianLawd::isotropic(2, 1.0));
        CHECK(z.max_abs() <= 5.0);
    }

    TEST_CASE("z scores flag a wrong oracle")
    {
        const MomentSummary m = summarize(normal_states(50000, 2, 17));
        const ZScores z = z_scores_vs_oracle(m, GaussianLawd::isotropic(2, 2.0));
        CHECK(z.max_abs() > 50.0);
    }

    TEST_CASE("z scores with two samples are finite")
    {
        StateMatrix s(2, 1);
        s << -0.5, 1.0;
        const ZScores z = z_scores_vs_oracle(summarize(s), GaussianLawd::isotropic(1, 1.0));
        CHECK(std::isfinite(z.mean[0]));
        CHECK(std::isfinite(z.cov(0, 0)));
        CHECK(std::isfinite(z.second_moment));
    }

    TEST_CASE("zero standard error")
    {
        StateMatrix s(4, 1);
        s.setZero();
        const ZScores exact = z_scores_vs_oracle(summarize(s), GaussianLawd{Vector::Zero(1), Matrix::Zero(1, 1)});
        CHECK(exact.max_abs() == 0.0);
        const ZScores off = z_scores_vs_oracle(summarize(s), GaussianLawd::isotropic(1, 1.0));
        CHECK(std::isinf(off.max_abs()));
    }

    TEST_CASE("dimension mismatch")
    {
        CHECK_THROWS_AS(z_scores_vs_oracle(summarize(normal_states(10, 2, 1)), GaussianLawd::isotropic(3, 1.0)),
                        DimensionError);
    }

    TEST_CASE("ula ensemble matches the oracle recursion")
    {
        const Potential p = Potential::quadratic_diagonal(Eigen::Vector2d(1.0, 3.0));
        Ensemble e = init_ensemble(p, init::Gaussian{Vector::Constant(2, 1.0), Vector::Constant(2, 0.5)}, 20000, 3);
        GaussianLawd law = GaussianLawd::diagonal(Vector::Constant(2, 1.0), Vector::Constant(2, 0.5));
        for (int s = 0; s < 50; ++s)
        {
            step(e, 0.05);
            law = ula_step_law(law, p.hessian(), 0.05);
        }
        CHECK(z_scores_vs_oracle(summarize(e), law).max_abs() <= 5.0);
    }
}
