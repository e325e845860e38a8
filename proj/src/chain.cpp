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

#include "langevin_kl/chain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include "langevin_kl/errors.hpp"
#include "langevin_kl/random.hpp"

namespace langevin
{
    namespace
    {
        // Runs body(first, last) over contiguous chain blocks. Exceptions are
        // collected per block and the one from the lowest block is rethrown,
        // so the reported failure does not depend on thread timing.
        template <typename Body>
        void for_chain_blocks(Index n, Body body)
        {
            const unsigned workers = std::max(1u, std::min<unsigned>(worker_count(), unsigned(std::max<Index>(1, n / 256))));
            if (workers == 1)
            {
                body(Index(0), n);
                return;
            }
            std::vector<std::exception_ptr> errors(workers);
            std::vector<std::thread> threads;
            threads.reserve(workers);
            for (unsigned w = 0; w < workers; ++w)
            {
                const Index first = n * w / workers;
                const Index last = n * (w + 1) / workers;
                threads.emplace_back([&, w, first, last] {
                    try
                    {
                        body(first, last);
                    }
                    catch (...)
                    {
                        errors[w] = std::current_exception();
                    }
                });
            }
            for (auto &t : threads)
                t.join();
            for (auto &err : errors)
                if (err)
                    std::rethrow_exception(err);
        }

        std::uint32_t noise_substream(std::uint64_t step_index)
        {
            if (step_index >= std::numeric_limits<std::uint32_t>::max())
                throw ChainError("step index exceeds the noise counter range");
            return std::uint32_t(step_index + 1);
        }

        void check_finite_row(const Ensemble &e, Index i)
        {
            if (!e.states.row(i).allFinite())
                throw ChainError("non-finite state in chain " + std::to_string(i) + " at step "
                                 + std::to_string(e.step_index + 1));
        }

        void check_step_size(double h)
        {
            if (!(h > 0.0) || !std::isfinite(h))
                throw ChainError("step size must be positive and finite");
        }

        std::string fmt(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }
    } // namespace

    unsigned worker_count()
    {
        if (const char *env = std::getenv("LANGEVIN_KL_THREADS"))
        {
            const long v = std::strtol(env, nullptr, 10);
            if (v >= 1)
                return unsigned(v);
        }
        return std::max(1u, std::thread::hardware_concurrency());
    }

    Ensemble init_ensemble(const Potential &p, const InitSpec &init, Index n, std::uint64_t seed)
    {
        if (n < 1)
            throw ChainError("init_ensemble: need at least one chain");
        const Index d = p.dim();
        Ensemble e{p, StateMatrix(n, d), 0, 0.0, seed};

        Vector mean = Vector::Zero(d);
        Vector sd = Vector::Zero(d);
        if (std::holds_alternative<init::GaussianOneOverM>(init))
        {
            if (!(p.m() > 0.0))
                throw ChainError("init_ensemble: N(0, I/m) needs m > 0; this potential has m = 0, "
                                 "so pass an explicit Gaussian or point initialization");
            sd.setConstant(1.0 / std::sqrt(p.m()));
        }
        else if (const auto *g = std::get_if<init::Gaussian>(&init))
        {
            if (g->mean.size() != d || g->var.size() != d)
                throw DimensionError("init_ensemble: Gaussian init has the wrong dimension");
            if ((g->var.array() < 0.0).any())
                throw ChainError("init_ensemble: negative variance");
            mean = g->mean;
            sd = g->var.cwiseSqrt();
        }
        else
        {
            const auto &pt = std::get<init::Point>(init);
            if (pt.x.size() != d)
                throw DimensionError("init_ensemble: point init has the wrong dimension");
            e.states.rowwise() = pt.x.transpose();
            return e;
        }

        for_chain_blocks(n, [&](Index first, Index last) {
            Vector xi(d);
            for (Index i = first; i < last; ++i)
            {
                NormalStream noise(seed, std::uint64_t(i), 0);
                noise.fill(xi);
                e.states.row(i) = (mean + sd.cwiseProduct(xi)).transpose();
            }
        });
        return e;
    }

    void step(Ensemble &e, double h)
    {
        check_step_size(h);
        const std::uint32_t substream = noise_substream(e.step_index);
        const double scale = std::sqrt(2.0 * h);
        const Index d = e.dim();
        for_chain_blocks(e.n_chains(), [&](Index first, Index last) {
            Vector x(d), g(d), xi(d);
            for (Index i = first; i < last; ++i)
            {
                NormalStream noise(e.seed, std::uint64_t(i), substream);
                noise.fill(xi);
                x = e.states.row(i).transpose();
                e.potential.gradient_into(x, g);
                e.states.row(i) = (x - h * g + scale * xi).transpose();
                check_finite_row(e, i);
            }
        });
        e.h = h;
        ++e.step_index;
    }

    void step_with_noise(Ensemble &e, double h, const Eigen::Ref<const StateMatrix> &noise)
    {
        check_step_size(h);
        if (noise.rows() != e.n_chains() || noise.cols() != e.dim())
            throw DimensionError("step_with_noise: noise must have one row per chain");
        const double scale = std::sqrt(2.0 * h);
        Vector x(e.dim()), g(e.dim());
        for (Index i = 0; i < e.n_chains(); ++i)
        {
            x = e.states.row(i).transpose();
            e.potential.gradient_into(x, g);
            e.states.row(i) = (x - h * g + scale * noise.row(i).transpose()).transpose();
            check_finite_row(e, i);
        }
        e.h = h;
        ++e.step_index;
    }

    TraceRow trace_row(const Ensemble &e)
    {
        TraceRow row;
        row.step = e.step_index;
        const Eigen::ArrayXd sq = e.states.rowwise().squaredNorm().array();
        const double n = double(e.n_chains());
        row.second_moment = sq.sum() / n;
        if (e.n_chains() > 1)
            row.second_moment_se = std::sqrt((sq - row.second_moment).square().sum() / (n - 1.0) / n);
        row.mean_norm = (e.states.colwise().sum() / n).norm();
        return row;
    }

    MomentSummary summarize(const Ensemble &e)
    {
        return summarize(e.states);
    }

    RunResult run(Ensemble e, const StepPlan &plan, std::uint64_t record_every)
    {
        plan.validate();
        if (record_every < 1)
            throw ChainError("run: record_every must be >= 1");
        std::vector<TraceRow> trace{trace_row(e)};
        for (std::uint64_t s = 1; s <= plan.k; ++s)
        {
            step(e, plan.h);
            if (s % record_every == 0 || s == plan.k)
                trace.push_back(trace_row(e));
        }
        return RunResult{std::move(e), std::move(trace)};
    }

    CoupledTrace coupled_run(const Potential &p, const InitSpec &init_a, const InitSpec &init_b, double h,
                             std::uint64_t k, Index n, std::uint64_t seed)
    {
        check_step_size(h);
        if (h > 1.0 / p.L())
            throw ChainError("coupled_run: contraction needs h <= 1/L");
        if (k < 1)
            throw ChainError("coupled_run: need k >= 1");

        Ensemble a = init_ensemble(p, init_a, n, seed);
        Ensemble b = init_ensemble(p, init_b, n, seed);

        CoupledTrace trace;
        auto record = [&] {
            const Eigen::ArrayXd sq = (a.states - b.states).rowwise().squaredNorm().array();
            const double nd = double(n);
            const double msd = sq.sum() / nd;
            const double rms = std::sqrt(msd);
            double se = 0.0;
            if (n > 1 && rms > 0.0)
                se = std::sqrt((sq - msd).square().sum() / (nd - 1.0) / nd) / (2.0 * rms);
            trace.rms.push_back(rms);
            trace.standard_error.push_back(se);
        };

        record();
        for (std::uint64_t s = 0; s < k; ++s)
        {
            step(a, h);
            step(b, h);
            record();
        }
        return trace;
    }

    void write_trace_csv(std::ostream &os, const std::vector<TraceRow> &trace, const std::vector<double> *coupled_rms)
    {
        if (coupled_rms && coupled_rms->size() != trace.size())
            throw Error("write_trace_csv: coupled_rms must have one entry per row");
        os << "step,second_moment,mean_norm";
        if (coupled_rms)
            os << ",coupled_rms";
        os << '\n';
        for (std::size_t i = 0; i < trace.size(); ++i)
        {
            os << trace[i].step << ',' << fmt(trace[i].second_moment) << ',' << fmt(trace[i].mean_norm);
            if (coupled_rms)
                os << ',' << fmt((*coupled_rms)[i]);
            os << '\n';
        }
    }

} // namespace langevin
