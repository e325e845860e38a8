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

#include "langevin_kl/grid_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "langevin_kl/errors.hpp"

namespace langevin
{
    namespace
    {
        void check_grid(const GridSpec &g)
        {
            if (g.n < 3)
                throw GridError("grid needs at least 3 nodes");
            if (!(g.x_max > g.x_min) || !std::isfinite(g.x_min) || !std::isfinite(g.x_max))
                throw GridError("grid bounds must satisfy x_min < x_max");
        }

        void check_same_grid(const GridDensity &p, const GridDensity &q, const char *what)
        {
            if (!(p.grid == q.grid) || p.mass.size() != q.mass.size())
                throw GridError(std::string(what) + ": densities live on different grids");
        }

        void check_boundary(const GridDensity &p, const char *what)
        {
            const Index n = p.mass.size();
            const double edge = std::max(p.mass[0], p.mass[n - 1]);
            if (edge >= kBoundaryMassLimit)
            {
                std::ostringstream os;
                os << what << ": grid too small, boundary cell carries mass " << edge << " (limit "
                   << kBoundaryMassLimit << ")";
                throw GridError(os.str());
            }
        }

        // Renormalizes in place and returns 1 - (mass before renormalization).
        double renormalize(Eigen::VectorXd &mass, const char *what)
        {
            const double total = mass.sum();
            if (!(total > 0.0) || !std::isfinite(total))
                throw GridError(std::string(what) + ": all mass left the grid");
            mass /= total;
            return 1.0 - total;
        }

        // P(lo < X < hi) for X ~ N(0, 1), evaluated on the side of zero
        // where the tail probabilities do not cancel.
        double normal_interval(double lo, double hi)
        {
            constexpr double r = std::numbers::sqrt2;
            if (hi <= 0.0)
                return 0.5 * (std::erfc(-hi / r) - std::erfc(-lo / r));
            if (lo >= 0.0)
                return 0.5 * (std::erfc(lo / r) - std::erfc(hi / r));
            return 1.0 - 0.5 * std::erfc(-lo / r) - 0.5 * std::erfc(hi / r);
        }

        std::string fmt(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }
    } // namespace

    GridSpec GridSpec::default_for(const Potential &p)
    {
        const double half = 12.0 / std::sqrt(std::max(p.m(), 0.25));
        return {-half, half, 4096};
    }

    Eigen::VectorXd GridDensity::nodes() const
    {
        Eigen::VectorXd x(grid.n);
        for (Index i = 0; i < grid.n; ++i)
            x[i] = grid.node(i);
        return x;
    }

    GridDensity discretize_law(const GridInit &init, const GridSpec &grid)
    {
        check_grid(grid);
        GridDensity out{grid, Eigen::VectorXd::Zero(grid.n)};
        const double dx = grid.dx();

        if (const auto *pt = std::get_if<grid_init::Point>(&init))
        {
            if (!(pt->x >= grid.x_min && pt->x <= grid.x_max))
                throw GridError("discretize_law: point lies outside the grid");
            const auto i = Index(std::llround((pt->x - grid.x_min) / dx));
            out.mass[std::clamp<Index>(i, 0, grid.n - 1)] = 1.0;
            return out;
        }

        const auto &g = std::get<grid_init::Gaussian>(init);
        if (!(g.var > 0.0))
            throw GridError("discretize_law: variance must be positive");
        const double sd = std::sqrt(g.var);
        if (grid.x_min > g.mean - 8.0 * sd || grid.x_max < g.mean + 8.0 * sd)
            throw GridError("discretize_law: grid must cover 8 standard deviations on each side of the mean");

        for (Index i = 0; i < grid.n; ++i)
        {
            const double x = grid.node(i);
            out.mass[i] = normal_interval((x - 0.5 * dx - g.mean) / sd, (x + 0.5 * dx - g.mean) / sd);
        }
        out.mass_drift = renormalize(out.mass, "discretize_law");
        check_boundary(out, "discretize_law");
        return out;
    }

    GridDensity target_density_grid(const Potential &pot, const GridSpec &grid)
    {
        check_grid(grid);
        if (pot.dim() != 1)
            throw DimensionError("target_density_grid: potential must be one-dimensional");
        GridDensity out{grid, Eigen::VectorXd::Zero(grid.n)};
        const double dx = grid.dx();
        for (Index i = 0; i < grid.n; ++i)
        {
            const double x = grid.node(i);
            const double f_lo = std::exp(-pot.value_1d(x - 0.5 * dx));
            const double f_mid = std::exp(-pot.value_1d(x));
            const double f_hi = std::exp(-pot.value_1d(x + 0.5 * dx));
            out.mass[i] = dx / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
        }
        renormalize(out.mass, "target_density_grid");
        check_boundary(out, "target_density_grid");
        return out;
    }

    GridStepper::GridStepper(const Potential &pot, const GridSpec &grid, double h) : grid_(grid), h_(h)
    {
        check_grid(grid);
        if (pot.dim() != 1)
            throw DimensionError("GridStepper: potential must be one-dimensional");
        if (!(h > 0.0) || !std::isfinite(h))
            throw GridError("GridStepper: step size must be positive");

        const Index n = grid.n;
        const double dx = grid.dx();
        target_cell_.assign(std::size_t(n), -1);
        target_frac_.assign(std::size_t(n), 0.0);

        double prev = -std::numeric_limits<double>::infinity();
        for (Index i = 0; i < n; ++i)
        {
            const double x = grid.node(i);
            const double y = x - h * pot.derivative_1d(x);
            if (y < prev - 1e-12 * (1.0 + std::abs(prev)))
                throw GridError("GridStepper: drift map x - h U'(x) is not monotone on the grid (h too large)");
            prev = y;

            const double pos = (y - grid.x_min) / dx;
            if (pos < 0.0 || pos > double(n - 1))
                continue;
            auto j = Index(std::floor(pos));
            double frac = pos - double(j);
            if (j >= n - 1)
            {
                j = n - 2;
                frac = 1.0;
            }
            target_cell_[std::size_t(i)] = j;
            target_frac_[std::size_t(i)] = frac;
        }

        const double sigma = std::sqrt(2.0 * h);
        const auto radius = std::min<Index>(n - 1, Index(std::ceil(8.0 * sigma / dx)));
        kernel_.resize(std::size_t(radius) + 1);
        double total = 0.0;
        for (Index j = 0; j <= radius; ++j)
        {
            const double z = double(j) * dx / sigma;
            kernel_[std::size_t(j)] = std::exp(-0.5 * z * z);
            total += (j == 0 ? 1.0 : 2.0) * kernel_[std::size_t(j)];
        }
        for (auto &w : kernel_)
            w /= total;
    }

    GridDensity GridStepper::step(const GridDensity &p) const
    {
        if (!(p.grid == grid_))
            throw GridError("GridStepper::step: density lives on a different grid");
        const Index n = grid_.n;

        Eigen::VectorXd pushed = Eigen::VectorXd::Zero(n);
        for (Index i = 0; i < n; ++i)
        {
            const double m = p.mass[i];
            const Index j = target_cell_[std::size_t(i)];
            if (m == 0.0 || j < 0)
                continue;
            const double f = target_frac_[std::size_t(i)];
            pushed[j] += (1.0 - f) * m;
            pushed[j + 1] += f * m;
        }

        const auto radius = Index(kernel_.size()) - 1;
        GridDensity out{grid_, Eigen::VectorXd::Zero(n)};
        for (Index i = 0; i < n; ++i)
        {
            const double m = pushed[i];
            if (m == 0.0)
                continue;
            const Index lo = std::max<Index>(0, i - radius);
            const Index hi = std::min<Index>(n - 1, i + radius);
            for (Index t = lo; t <= hi; ++t)
                out.mass[t] += kernel_[std::size_t(std::abs(t - i))] * m;
        }

        const double input = p.mass.sum();
        const double output = out.mass.sum();
        if (!(output > 0.0))
            throw GridError("GridStepper::step: all mass left the grid");
        out.mass /= output;
        out.last_step_drift = input - output;
        out.mass_drift = p.mass_drift + out.last_step_drift;
        check_boundary(out, "ula_step_grid");
        return out;
    }

    GridDensity ula_step_grid(const GridDensity &p, const Potential &pot, double h)
    {
        return GridStepper(pot, p.grid, h).step(p);
    }

    double kl_grid(const GridDensity &p, const GridDensity &q)
    {
        check_same_grid(p, q, "kl_grid");
        double kl = 0.0;
        for (Index i = 0; i < p.mass.size(); ++i)
        {
            const double pi = p.mass[i];
            if (pi <= 0.0)
                continue;
            const double qi = q.mass[i];
            if (!(qi > 0.0))
                throw GridError("kl_grid: q vanishes at node " + std::to_string(i) + " where p has mass");
            kl += pi * std::log(pi / qi);
        }
        return kl;
    }

    double w2_grid_1d(const GridDensity &p, const GridDensity &q)
    {
        check_same_grid(p, q, "w2_grid_1d");
        const Index n = p.mass.size();
        const double dx = p.grid.dx();
        auto left_edge = [&](Index i) { return p.grid.node(i) - 0.5 * dx; };

        // Walk both quantile functions together. Inside a cell the quantile
        // function is linear, so each shared piece integrates exactly.
        Index i = 0, j = 0;
        double used_p = 0.0, used_q = 0.0;
        double acc = 0.0;
        while (true)
        {
            while (i < n && p.mass[i] - used_p <= 0.0)
            {
                ++i;
                used_p = 0.0;
            }
            while (j < n && q.mass[j] - used_q <= 0.0)
            {
                ++j;
                used_q = 0.0;
            }
            if (i >= n || j >= n)
                break;
            const double rem_p = p.mass[i] - used_p;
            const double rem_q = q.mass[j] - used_q;
            const double take = std::min(rem_p, rem_q);

            const double a0 = left_edge(i) + dx * used_p / p.mass[i];
            const double b0 = left_edge(j) + dx * used_q / q.mass[j];
            const bool p_done = take == rem_p;
            const bool q_done = take == rem_q;
            const double a1 = p_done ? left_edge(i) + dx : left_edge(i) + dx * (used_p + take) / p.mass[i];
            const double b1 = q_done ? left_edge(j) + dx : left_edge(j) + dx * (used_q + take) / q.mass[j];

            const double d0 = a0 - b0, d1 = a1 - b1;
            acc += take * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;

            if (p_done)
            {
                ++i;
                used_p = 0.0;
            }
            else
                used_p += take;
            if (q_done)
            {
                ++j;
                used_q = 0.0;
            }
            else
                used_q += take;
        }
        return std::sqrt(std::max(0.0, acc));
    }

    double tv_grid(const GridDensity &p, const GridDensity &q)
    {
        check_same_grid(p, q, "tv_grid");
        return 0.5 * (p.mass - q.mass).cwiseAbs().sum();
    }

    double mean_grid(const GridDensity &p)
    {
        return p.mass.dot(p.nodes());
    }

    double second_moment_grid(const GridDensity &p)
    {
        return p.mass.dot(p.nodes().cwiseAbs2());
    }

    StationaryEstimate stationary_grid(const Potential &pot, const GridSpec &grid, double h, double tol,
                                       std::uint64_t max_steps)
    {
        const GridStepper stepper(pot, grid, h);
        StationaryEstimate est{target_density_grid(pot, grid)};
        while (est.steps < max_steps)
        {
            GridDensity next = stepper.step(est.density);
            est.last_tv = tv_grid(next, est.density);
            est.density = std::move(next);
            ++est.steps;
            if (est.last_tv < tol)
            {
                est.converged = true;
                break;
            }
        }
        return est;
    }

    StepCapEstimate estimate_step_cap(const Potential &pot, const GridSpec &grid, double c1, double h_max,
                                      int max_halvings)
    {
        if (!(c1 > 0.0) || !(h_max > 0.0))
            throw GridError("estimate_step_cap: c1 and h_max must be positive");
        const GridDensity target = target_density_grid(pot, grid);
        StepCapEstimate out;
        double h = h_max;
        for (int i = 0; i <= max_halvings; ++i, h *= 0.5)
        {
            const StationaryEstimate pi_h = stationary_grid(pot, grid, h);
            const double w2 = w2_grid_1d(pi_h.density, target);
            out.scan.emplace_back(h, w2);
            if (w2 <= c1)
            {
                out.h_cap = h;
                return out;
            }
        }
        throw GridError("estimate_step_cap: no scanned step size keeps the stationary law within C1 of the target");
    }

    void write_grid_csv(std::ostream &os, const GridDensity &p)
    {
        os << "x,mass\n";
        for (Index i = 0; i < p.grid.n; ++i)
            os << fmt(p.grid.node(i)) << ',' << fmt(p.mass[i]) << '\n';
    }

} // namespace langevin
