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

// 1-D density propagation of the unadjusted Langevin chain on a uniform grid.
//
// Node i sits at x_min + i * dx and owns the cell [x_i - dx/2, x_i + dx/2].
// One chain step pushes every cell's mass through the drift map
// T(x) = x - h U'(x), splitting it linearly between the two nodes that
// bracket T(x_i), then convolves with a discrete N(0, 2h) kernel.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <variant>
#include <vector>

#include "langevin_kl/potential.hpp"
#include "langevin_kl/types.hpp"

namespace langevin
{

    struct GridSpec
    {
        double x_min = -8.0;
        double x_max = 8.0;
        Index n = 4096;

        double dx() const { return (x_max - x_min) / double(n - 1); }
        double node(Index i) const { return x_min + double(i) * dx(); }

        bool operator==(const GridSpec &) const = default;

        /// [-12/sqrt(max(m, 1/4)), +12/sqrt(max(m, 1/4))] with 4096 nodes.
        static GridSpec default_for(const Potential &p);
    };

    /// Mass boundary cells may carry before the grid counts as too small.
    inline constexpr double kBoundaryMassLimit = 1e-9;

    struct GridDensity
    {
        GridSpec grid;
        /// Cell probabilities, non-negative, summing to 1.
        Eigen::VectorXd mass;
        /// Total mass lost (or gained) before the last renormalization,
        /// accumulated over every operation that produced this density.
        double mass_drift = 0.0;
        /// Mass lost in the most recent step alone.
        double last_step_drift = 0.0;

        Eigen::VectorXd nodes() const;
    };

    namespace grid_init
    {
        struct Gaussian
        {
            double mean = 0.0;
            double var = 1.0;
        };

        struct Point
        {
            double x = 0.0;
        };
    } // namespace grid_init

    typedef std::variant<grid_init::Gaussian, grid_init::Point> GridInit;

    /// Gaussian laws get exact CDF differences per cell and must fit inside
    /// the grid with 8 standard deviations to spare. A point law puts unit
    /// mass on the nearest node.
    GridDensity discretize_law(const GridInit &init, const GridSpec &grid);

    /// Normalized cell masses of exp(-U), by Simpson's rule per cell.
    GridDensity target_density_grid(const Potential &pot, const GridSpec &grid);

    /// Precomputed drift map and noise kernel for a fixed (potential, grid, h).
    class GridStepper
    {
    public:
        GridStepper(const Potential &pot, const GridSpec &grid, double h);

        GridDensity step(const GridDensity &p) const;

        double h() const { return h_; }
        const GridSpec &grid() const { return grid_; }
        /// Kernel half-width in cells.
        Index kernel_radius() const { return Index(kernel_.size()) - 1; }

    private:
        GridSpec grid_;
        double h_;
        std::vector<Index> target_cell_; // -1: mass leaves the grid
        std::vector<double> target_frac_;
        std::vector<double> kernel_; // kernel_[j] = weight at offset +-j
    };

    /// One chain step on a grid density. Requires a monotone drift map
    /// (guaranteed when h <= 1/L).
    GridDensity ula_step_grid(const GridDensity &p, const Potential &pot, double h);

    /// sum p_i ln(p_i / q_i) with 0 ln 0 = 0.
    double kl_grid(const GridDensity &p, const GridDensity &q);

    /// W2 between the piecewise-uniform densities, through the quantile coupling.
    double w2_grid_1d(const GridDensity &p, const GridDensity &q);

    /// 1/2 sum |p_i - q_i|.
    double tv_grid(const GridDensity &p, const GridDensity &q);

    double mean_grid(const GridDensity &p);
    double second_moment_grid(const GridDensity &p);

    struct StationaryEstimate
    {
        GridDensity density;
        std::uint64_t steps = 0;
        bool converged = false;
        double last_tv = 0.0;
    };

    /// Fixed point of the grid chain at step h, iterating from the target
    /// until successive densities differ by less than tol in TV.
    StationaryEstimate stationary_grid(const Potential &pot, const GridSpec &grid, double h, double tol = 1e-10,
                                       std::uint64_t max_steps = 200000);

    struct StepCapEstimate
    {
        double h_cap = 0.0;
        /// Scanned (h, W2(pi_h, p*)) pairs, largest h first.
        std::vector<std::pair<double, double>> scan;
    };

    /// Empirical estimate of the largest step size h' whose stationary law
    /// stays within W2 distance c1 of the target. Scans h = h_max, h_max/2,
    /// ... and returns the first h that passes. This is an estimate, not a
    /// certificate: it assumes W2(pi_h, p*) grows with h.
    StepCapEstimate estimate_step_cap(const Potential &pot, const GridSpec &grid, double c1, double h_max,
                                      int max_halvings = 12);

    /// CSV with header x,mass.
    void write_grid_csv(std::ostream &os, const GridDensity &p);

} // namespace langevin
