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
#include <sstream>

#include "doctest.h"
#include "langevin_kl/errors.hpp"
#include "langevin_kl/gaussian_oracle.hpp"
#include "langevin_kl/grid_oracle.hpp"
#include "langevin_kl/random.hpp"

using namespace langevin;

namespace
{
    const GridSpec kStd{-8.0, 8.0, 4096};

    GridDensity normal(double mean, double var, const GridSpec &g = kStd)
    {
        return discretize_law(grid_init::Gaussian{mean, var}, g);
    }

    Potential quad(double a)
    {
        return Potential::quadratic_diagonal(Vector::Constant(1, a));
    }

    double variance(const GridDensity &p)
    {
        const double mu = mean_grid(p);
        return second_moment_grid(p) - mu * mu;
    }

    GaussianLawd law1(double mean, double var)
    {
        return GaussianLawd::diagonal(Vector::Constant(1, mean), Vector::Constant(1, var));
    }
} // namespace

TEST_SUITE("grid_oracle")
{
    TEST_CASE("discretized normal")
    {
        const GridDensity p = normal(0, 1);
        CHECK(std::abs(p.mass.sum() - 1.0) <= 1e-9);
        double asym = 0;
        for (Index i = 0; i < p.mass.size(); ++i)
            asym = std::max(asym, std::abs(p.mass[i] - p.mass[p.mass.size() - 1 - i]));
        CHECK(asym <= 1e-12);
        CHECK((p.mass.array() >= 0).all());
        CHECK(second_moment_grid(p) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(std::abs(mean_grid(p)) < 1e-12);
    }

    TEST_CASE("point law is a single cell")
    {
        const GridDensity p = discretize_law(grid_init::Point{0.0}, GridSpec{-8, 8, 4097});
        CHECK(p.mass.sum() == 1.0);
        CHECK((p.mass.array() > 0).count() == 1);
        CHECK(p.mass[2048] == 1.0);
        CHECK(second_moment_grid(discretize_law(grid_init::Point{3.0}, GridSpec{-8, 8, 4097})) == 9.0);
        CHECK_THROWS_AS(discretize_law(grid_init::Point{9.0}, kStd), GridError);
    }

    TEST_CASE("coverage is enforced")
    {
        CHECK_THROWS_AS(normal(0, 1, GridSpec{-1, 1, 4096}), GridError);
        CHECK_THROWS_AS(normal(5, 1, kStd), GridError);
        CHECK_THROWS_AS(normal(0, -1, kStd), GridError);
        CHECK_THROWS_AS(normal(0, 1, GridSpec{-8, 8, 2}), GridError);
        CHECK_THROWS_AS(normal(0, 1, GridSpec{8, -8, 100}), GridError);
    }

    TEST_CASE("one quadratic step matches the exact variance")
    {
        const GridDensity next = ula_step_grid(normal(0, 1), quad(1), 0.1);
        CHECK(std::abs(mean_grid(next)) < 1e-10);
        CHECK(std::abs(variance(next) - 1.01) < 1e-4);
        CHECK(std::abs(next.mass.sum() - 1.0) < 1e-12);
        CHECK(std::abs(next.last_step_drift) < 1e-9);
    }

    TEST_CASE("a tiny step barely moves the density")
    {
        const GridDensity p = normal(0, 1);
        CHECK(tv_grid(p, ula_step_grid(p, quad(1), 1e-6)) < 1e-6);
    }

    TEST_CASE("huber tail drift is exactly delta times h")
    {
        const Potential hub = Potential::huber(1.0, 1);
        const GridSpec g = GridSpec::default_for(hub);
        const GridDensity p = discretize_law(grid_init::Point{5.0}, g);
        const GridDensity next = ula_step_grid(p, hub, 0.1);
        CHECK(mean_grid(next) - mean_grid(p) == doctest::Approx(-0.1).epsilon(1e-10));
    }

    TEST_CASE("default grid")
    {
        const GridSpec h = GridSpec::default_for(Potential::huber(1.0, 1));
        CHECK(h.x_min == -24.0);
        CHECK(h.x_max == 24.0);
        CHECK(h.n == 4096);
        const GridSpec q = GridSpec::default_for(quad(4));
        CHECK(q.x_max == 6.0);
    }

    TEST_CASE("non-monotone drift map is rejected")
    {
        CHECK_THROWS_AS(GridStepper(quad(1), kStd, 1.5), GridError);
        CHECK_THROWS_AS(GridStepper(quad(1), kStd, 0.0), GridError);
        CHECK_THROWS_AS(GridStepper(Potential::quadratic_diagonal(Vector::Ones(2)), kStd, 0.1), DimensionError);
    }

    TEST_CASE("mass leaving the grid is flagged")
    {
        // A wide law on a tight grid sheds mass through the boundary.
        const GridSpec g{-4, 4, 1024};
        GridDensity p = normal(0, 0.2, g);
        const GridStepper step(Potential::huber(0.01, 1), g, 0.5);
        CHECK_THROWS_AS(
            {
                for (int i = 0; i < 200; ++i)
                    p = step.step(p);
            },
            GridError);
    }

    TEST_CASE("kl values")
    {
        const GridDensity p = normal(0, 1);
        CHECK(kl_grid(p, p) == 0.0);
        const GridSpec wide{-10, 10, 8192};
        const double kl = kl_grid(normal(0, 8.0 / 7.0, wide), normal(0, 1, wide));
        CHECK(std::abs(kl - 0.5 * (std::log(7.0 / 8.0) + 8.0 / 7.0 - 1.0)) < 1e-5);
        const Potential hub = Potential::huber(1.0, 1);
        const GridDensity t = target_density_grid(hub, GridSpec::default_for(hub));
        CHECK(kl_grid(t, t) == 0.0);
        CHECK_THROWS_AS(kl_grid(p, normal(0, 1, wide)), GridError);

        GridDensity holes = p;
        holes.mass.setZero();
        holes.mass[2000] = 1.0;
        CHECK_THROWS_AS(kl_grid(p, holes), GridError);
        CHECK(kl_grid(holes, p) > 0.0);
    }

    TEST_CASE("target density")
    {
        const GridDensity t = target_density_grid(quad(1), kStd);
        const GridDensity n = normal(0, 1);
        CHECK((t.mass - n.mass).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK_THROWS_AS(target_density_grid(quad(1), GridSpec{-3, 3, 1000}), GridError);

        const Potential hub = Potential::huber(1.0, 1);
        const GridDensity h = target_density_grid(hub, GridSpec::default_for(hub));
        double asym = 0;
        for (Index i = 0; i < h.mass.size(); ++i)
            asym = std::max(asym, std::abs(h.mass[i] - h.mass[h.mass.size() - 1 - i]));
        CHECK(asym < 1e-14);
        // Unimodal: non-decreasing up to the middle.
        for (Index i = 1; i < h.mass.size() / 2; ++i)
            CHECK_MESSAGE(h.mass[i] >= h.mass[i - 1], "cell " << i);
    }

    TEST_CASE("huber target second moment against an independent integral")
    {
        // Z = 2 (sqrt(2 pi) (Phi(1) - 1/2) + e^{-1/2}); E x^2 from the same split.
        const double s2pi = std::sqrt(2 * std::numbers::pi);
        const double phi1 = 0.5 * std::erfc(-1 / std::sqrt(2.0));
        const double e = std::exp(-0.5);
        const double z = 2 * (s2pi * (phi1 - 0.5) + e);
        // inside: int_{-1}^{1} x^2 e^{-x^2/2} = s2pi (2 Phi(1) - 1) - 2 e^{-1/2}
        // outside: 2 int_1^inf x^2 e^{1/2 - x} = 2 e^{-1/2} (1 + 2 + 2) = 10 e^{-1/2}
        const double num = s2pi * (2 * phi1 - 1) - 2 * e + 10 * e;
        const Potential hub = Potential::huber(1.0, 1);
        const GridDensity t = target_density_grid(hub, GridSpec::default_for(hub));
        CHECK(second_moment_grid(t) == doctest::Approx(num / z).epsilon(1e-5));
    }

    TEST_CASE("w2 and tv between grids")
    {
        const GridDensity p = normal(0, 1, GridSpec{-10, 10, 4096});
        const GridDensity q = normal(1, 1, GridSpec{-10, 10, 4096});
        CHECK(w2_grid_1d(p, p) == 0.0);
        CHECK(tv_grid(p, p) == 0.0);
        CHECK(std::abs(w2_grid_1d(p, q) - 1.0) < 1e-3);
        CHECK(std::abs(tv_grid(p, q) - 0.38292) < 1e-4);
        CHECK(w2_grid_1d(p, q) == doctest::Approx(w2_grid_1d(q, p)).epsilon(1e-12));

        const GridDensity wide = normal(0, 4, GridSpec{-20, 20, 8192});
        const GridDensity narrow = normal(0, 1, GridSpec{-20, 20, 8192});
        CHECK(std::abs(w2_grid_1d(wide, narrow) - 1.0) < 1e-3);
    }

    TEST_CASE("grid pinsker on random pairs")
    {
        NormalStream s(31, 0, 0);
        // Narrow enough that no cell underflows to zero mass.
        const GridSpec g{-10, 10, 4096};
        auto u = [&] { return 0.5 * std::erfc(-s.next() / std::sqrt(2.0)); };
        for (int t = 0; t < 30; ++t)
        {
            const double m1 = 4 * u() - 2, m2 = 4 * u() - 2;
            const double v1 = 0.3 + 0.4 * u(), v2 = 0.3 + 0.4 * u();
            const GridDensity p = normal(m1, v1, g), q = normal(m2, v2, g);
            CHECK(tv_grid(p, q) <= std::sqrt(kl_grid(p, q) / 2) + 1e-6);
            CHECK(std::abs(tv_grid(p, q) - tv_gaussian_1d(law1(m1, v1), law1(m2, v2))) < 1e-3);
        }
    }

    TEST_CASE("grid chain tracks the gaussian oracle")
    {
        const Matrix A = Matrix::Identity(1, 1);
        const GaussianLawd target = target_law<double>(A);
        const GridDensity t = target_density_grid(quad(1), kStd);
        for (double h : {0.1, 0.25})
        {
            GridDensity p = normal(1, 0.25);
            GaussianLawd law = law1(1, 0.25);
            const GridStepper step(quad(1), kStd, h);
            for (int k = 0; k < 100; ++k)
            {
                p = step.step(p);
                law = ula_step_law(law, A, h);
                REQUIRE(std::abs(kl_grid(p, t) - kl_gaussian(law, target)) <= 1e-3);
                CHECK(std::abs(p.last_step_drift) < 1e-9);
            }
        }
    }

    TEST_CASE("huber kl strictly decreases at small h")
    {
        const Potential hub = Potential::huber(1.0, 1);
        const GridSpec g = GridSpec::default_for(hub);
        const GridDensity t = target_density_grid(hub, g);
        GridDensity p = discretize_law(grid_init::Gaussian{0.0, 4.0}, g);
        const GridStepper step(hub, g, 0.01);
        double prev = kl_grid(p, t);
        for (int k = 0; k < 200; ++k)
        {
            p = step.step(p);
            const double kl = kl_grid(p, t);
            REQUIRE(kl < prev);
            prev = kl;
        }
    }

    TEST_CASE("stationary law of the quadratic grid chain")
    {
        const StationaryEstimate est = stationary_grid(quad(1), kStd, 0.25);
        CHECK(est.converged);
        CHECK(est.last_tv < 1e-10);
        CHECK(std::abs(variance(est.density) - 8.0 / 7.0) < 1e-3);
    }

    TEST_CASE("step cap estimate")
    {
        const Potential hub = Potential::huber(1.0, 1);
        const GridSpec g = GridSpec::default_for(hub);
        const StepCapEstimate est = estimate_step_cap(hub, g, 1.0, 1.0);
        REQUIRE(!est.scan.empty());
        CHECK(est.h_cap == est.scan.back().first);
        CHECK(est.scan.back().second <= 1.0);
        for (std::size_t i = 0; i + 1 < est.scan.size(); ++i)
            CHECK(est.scan[i].second > 1.0);
        CHECK_THROWS_AS(estimate_step_cap(hub, g, 1e-9, 1.0, 2), GridError);
        CHECK_THROWS_AS(estimate_step_cap(hub, g, -1.0, 1.0), GridError);
    }

    TEST_CASE("csv output")
    {
        std::ostringstream os;
        write_grid_csv(os, normal(0, 1, GridSpec{-8, 8, 17}));
        const std::string s = os.str();
        CHECK(s.rfind("x,mass\n", 0) == 0);
        CHECK(std::count(s.begin(), s.end(), '\n') == 18);
    }
}
