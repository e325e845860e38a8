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
#include <iosfwd>
#include <variant>
#include <vector>

#include "langevin_kl/metrics.hpp"
#include "langevin_kl/planner.hpp"
#include "langevin_kl/potential.hpp"
#include "langevin_kl/types.hpp"

namespace langevin
{

    namespace init
    {
        /// N(0, I/m); needs m > 0.
        struct GaussianOneOverM
        {
        };

        /// N(mean, diag(var)).
        struct Gaussian
        {
            Vector mean;
            Vector var;
        };

        struct Point
        {
            Vector x;
        };
    } // namespace init

    typedef std::variant<init::GaussianOneOverM, init::Gaussian, init::Point> InitSpec;

    /// n independent chains of x' = x - h grad U(x) + sqrt(2h) xi.
    ///
    /// Chain i at step s (1-based) draws its noise from NormalStream(seed, i, s);
    /// the initial draw uses substream 0. Results therefore depend only on the
    /// seed and configuration, never on the worker count.
    struct Ensemble
    {
        Potential potential;
        StateMatrix states;
        std::uint64_t step_index = 0;
        double h = 0.0;
        std::uint64_t seed = 0;

        Index n_chains() const { return states.rows(); }
        Index dim() const { return states.cols(); }
    };

    Ensemble init_ensemble(const Potential &p, const InitSpec &init, Index n, std::uint64_t seed);

    /// One ULA step for every chain, in place.
    void step(Ensemble &e, double h);

    /// One step with caller-supplied noise (one row per chain) instead of the
    /// per-chain streams.
    void step_with_noise(Ensemble &e, double h, const Eigen::Ref<const StateMatrix> &noise);

    struct TraceRow
    {
        std::uint64_t step = 0;
        double second_moment = 0.0;
        double second_moment_se = 0.0;
        double mean_norm = 0.0;
    };

    struct RunResult
    {
        Ensemble ensemble;
        std::vector<TraceRow> trace;
    };

    /// Applies plan.k steps at plan.h. Rows are recorded at step 0, every
    /// record_every steps, and at the final step.
    RunResult run(Ensemble e, const StepPlan &plan, std::uint64_t record_every);

    TraceRow trace_row(const Ensemble &e);

    MomentSummary summarize(const Ensemble &e);

    /// RMS distance between two synchronously coupled ensembles, per step.
    struct CoupledTrace
    {
        std::vector<double> rms;
        /// Delta-method standard error of each rms entry.
        std::vector<double> standard_error;
    };

    /// Runs two ensembles of n chains on the same noise streams for k steps.
    /// Entry 0 of the trace is the initial distance. Requires h <= 1/L.
    CoupledTrace coupled_run(const Potential &p, const InitSpec &init_a, const InitSpec &init_b, double h,
                             std::uint64_t k, Index n, std::uint64_t seed);

    /// Worker count for ensemble stepping: LANGEVIN_KL_THREADS when set,
    /// otherwise the hardware concurrency.
    unsigned worker_count();

    /// CSV with header step,second_moment,mean_norm[,coupled_rms].
    void write_trace_csv(std::ostream &os, const std::vector<TraceRow> &trace,
                         const std::vector<double> *coupled_rms = nullptr);

} // namespace langevin
