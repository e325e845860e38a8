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

#include "langevin_kl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "langevin_kl/errors.hpp"
#include "langevin_kl/gaussian_oracle.hpp"

namespace langevin
{
    namespace
    {
        using ojson = nlohmann::ordered_json;

        std::string fmt(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }

        Vector to_vector(const std::vector<double> &v)
        {
            return Eigen::Map<const Vector>(v.data(), Index(v.size()));
        }

        InitSpec chain_init(const InitConfig &c, Index d)
        {
            if (c.kind == "gaussian_1_over_m")
                return init::GaussianOneOverM{};
            if (c.kind == "gaussian")
            {
                if (Index(c.mean.size()) != d || Index(c.var.size()) != d)
                    throw Error("config: init.mean and init.var need " + std::to_string(d) + " entries");
                return init::Gaussian{to_vector(c.mean), to_vector(c.var)};
            }
            if (Index(c.x.size()) != d)
                throw Error("config: init.x needs " + std::to_string(d) + " entries");
            return init::Point{to_vector(c.x)};
        }

        // Exact initial law for the Gaussian oracle; a point start has zero
        // covariance, which only the step-0 row cannot evaluate.
        GaussianLawd gaussian_init(const InitConfig &c, const Potential &pot)
        {
            const Index d = pot.dim();
            if (c.kind == "gaussian_1_over_m")
                return GaussianLawd::isotropic(d, 1.0 / pot.m());
            if (c.kind == "gaussian")
                return GaussianLawd::diagonal(to_vector(c.mean), to_vector(c.var));
            return {to_vector(c.x), Matrix::Zero(d, d)};
        }

        GridInit grid_init_of(const InitConfig &c, const Potential &pot)
        {
            if (c.kind == "gaussian_1_over_m")
                return grid_init::Gaussian{0.0, 1.0 / pot.m()};
            if (c.kind == "gaussian")
                return grid_init::Gaussian{c.mean[0], c.var[0]};
            return grid_init::Point{c.x[0]};
        }

        Verdict make_verdict(std::string name, std::string claim, double allowed, double observed, double tol,
                             std::string detail = {})
        {
            Verdict v;
            v.name = std::move(name);
            v.claim = std::move(claim);
            v.margin = allowed - observed;
            v.tolerance = tol;
            v.passed = v.margin >= -tol;
            std::ostringstream os;
            os.precision(10);
            os << "observed " << observed << ", allowed " << allowed;
            if (!detail.empty())
                os << "; " << detail;
            v.detail = os.str();
            return v;
        }

        // Files written so far; removed again if the run fails.
        class OutputSet
        {
        public:
            explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir))
            {
                created_dir_ = !std::filesystem::exists(dir_);
                std::filesystem::create_directories(dir_);
            }

            std::ofstream open(const std::string &name)
            {
                const auto path = dir_ / name;
                std::ofstream os(path, std::ios::binary);
                if (!os)
                    throw Error("cannot write " + path.string());
                files_.push_back(path);
                return os;
            }

            void discard() noexcept
            {
                std::error_code ec;
                for (const auto &f : files_)
                    std::filesystem::remove(f, ec);
                if (created_dir_)
                    std::filesystem::remove(dir_, ec);
                files_.clear();
            }

            std::vector<std::string> names() const
            {
                std::vector<std::string> out;
                for (const auto &f : files_)
                    out.push_back(f.filename().string());
                return out;
            }

        private:
            std::filesystem::path dir_;
            std::vector<std::filesystem::path> files_;
            bool created_dir_ = false;
        };

        struct GaussianRow
        {
            std::uint64_t step;
            double kl, w2, fisher, second_moment;
        };

        struct GridRow
        {
            std::uint64_t step;
            double kl, tv, w2, second_moment;
        };

        WeakResolution resolve_weak(const RunConfig &cfg, const Potential &pot, const GridSpec &grid,
                                    const GridInit &g_init, bool have_grid)
        {
            WeakResolution w;
            const bool needs_grid = cfg.c1.estimate() || cfg.c2.estimate() || cfg.h_prime.estimate() || cfg.kl0.estimate();
            if (needs_grid && !have_grid)
                throw Error("weak regime: \"estimate\" values need the grid oracle (1-D potential, oracles.grid = true)");

            std::optional<GridDensity> target, p0;
            if (needs_grid)
            {
                target = target_density_grid(pot, grid);
                p0 = discretize_law(g_init, grid);
            }
            w.c1_estimated = cfg.c1.estimate();
            w.inputs.c1 = w.c1_estimated ? w2_grid_1d(*p0, *target) : *cfg.c1.value;
            w.c2_estimated = cfg.c2.estimate();
            w.inputs.c2 = w.c2_estimated ? std::sqrt(second_moment_grid(*target)) : *cfg.c2.value;
            w.kl0_estimated = cfg.kl0.estimate();
            w.inputs.kl0 = w.kl0_estimated ? kl_grid(*p0, *target) : *cfg.kl0.value;
            w.h_prime_estimated = cfg.h_prime.estimate();
            if (w.h_prime_estimated)
            {
                const StepCapEstimate est = estimate_step_cap(pot, grid, w.inputs.c1, 1.0 / pot.L());
                w.inputs.h_cap = est.h_cap;
                w.h_prime_scan = est.scan;
            }
            else
                w.inputs.h_cap = *cfg.h_prime.value;
            return w;
        }

        ojson plan_json(const StepPlan &p)
        {
            ojson j;
            j["h"] = p.h;
            j["k"] = p.k;
            j["epsilon"] = p.epsilon;
            j["regime"] = to_string(p.regime);
            j["notes"] = p.notes;
            if (p.loose_epsilon)
                j["loose_epsilon"] = *p.loose_epsilon;
            return j;
        }

        ojson weak_value_json(const WeakValue &v)
        {
            if (v.estimate())
                return "estimate";
            if (std::isinf(*v.value))
                return "inf";
            return *v.value;
        }

        ojson config_json(const RunConfig &c)
        {
            ojson j;
            j["potential"] = {{"kind", c.potential.kind}, {"params", c.potential.params}, {"dim", c.potential.dim}};
            ojson in;
            in["kind"] = c.init.kind;
            if (c.init.kind == "gaussian")
            {
                in["mean"] = c.init.mean;
                in["var"] = c.init.var;
            }
            if (c.init.kind == "point")
                in["x"] = c.init.x;
            j["init"] = in;
            j["regime"] = c.regime;
            j["epsilon"] = c.epsilon;
            j["n_chains"] = c.n_chains;
            j["seed"] = c.seed;
            j["record_every"] = c.record_every;
            if (c.max_steps)
                j["max_steps"] = *c.max_steps;
            if (c.regime == "weak")
                j["weak"] = {{"c1", weak_value_json(c.c1)},
                             {"c2", weak_value_json(c.c2)},
                             {"h_prime", weak_value_json(c.h_prime)},
                             {"kl0", weak_value_json(c.kl0)}};
            j["oracles"] = {{"gaussian", c.gaussian_oracle}, {"grid", c.grid_oracle}};
            if (c.grid)
                j["grid"] = {{"x_min", c.grid->x_min}, {"x_max", c.grid->x_max}, {"n", c.grid->n}};
            j["output"] = c.output.string();
            return j;
        }

        RunReport execute(const RunConfig &cfg, OutputSet &out)
        {
            RunReport report;
            report.config = cfg;

            const Potential pot = construct_potential(cfg.potential);
            const Index d = pot.dim();
            const InitSpec init = chain_init(cfg.init, d);
            if (cfg.init.kind == "gaussian_1_over_m" && !(pot.m() > 0.0))
                throw Error("init gaussian_1_over_m needs m > 0; use a gaussian or point init for this potential");

            const bool use_gauss = cfg.gaussian_oracle && pot.is_quadratic();
            const bool use_grid = cfg.grid_oracle && d == 1;
            const GridSpec grid = cfg.grid.value_or(GridSpec::default_for(pot));
            const GridInit g_init = use_grid ? grid_init_of(cfg.init, pot) : GridInit{};

            // Initial laws under the oracles.
            std::optional<GaussianLawd> law, gauss_target;
            std::optional<GridDensity> grid_p, grid_target;
            if (use_gauss)
            {
                law = gaussian_init(cfg.init, pot);
                gauss_target = target_law<double>(pot.hessian());
            }
            if (use_grid)
            {
                grid_target = target_density_grid(pot, grid);
                grid_p = discretize_law(g_init, grid);
            }
            auto gauss_kl = [&](const GaussianLawd &l) {
                return (l.cov.diagonal().array() > 0.0).all() ? kl_gaussian(l, *gauss_target)
                                                              : std::numeric_limits<double>::quiet_NaN();
            };

            // Plans.
            if (cfg.regime == "strong")
            {
                if (!(pot.m() > 0.0))
                    throw Error("strong regime needs m > 0; this potential is only weakly convex");
                report.plans.push_back(plan_strong(pot.m(), pot.L(), long(d), cfg.epsilon));
            }
            else if (cfg.regime == "halving")
            {
                if (!(pot.m() > 0.0))
                    throw Error("halving regime needs m > 0");
                double kl0 = kl_init_bound(pot.m(), pot.L(), long(d));
                if (use_gauss && std::isfinite(gauss_kl(*law)))
                    kl0 = gauss_kl(*law);
                else if (use_grid)
                    kl0 = kl_grid(*grid_p, *grid_target);
                report.plans = plan_halving(pot.m(), pot.L(), long(d), cfg.epsilon, kl0);
            }
            else
            {
                report.weak = resolve_weak(cfg, pot, grid, g_init, use_grid);
                report.plans.push_back(plan_weak(report.weak->inputs, pot.L(), long(d), cfg.epsilon));
            }

            Ensemble ens = init_ensemble(pot, init, cfg.n_chains, cfg.seed);
            std::vector<GaussianRow> gauss_rows;
            std::vector<GridRow> grid_rows;

            const double moment_bound = pot.m() > 0.0 ? 4.0 * double(d) / pot.m() : 0.0;
            double max_exact_moment = 0.0;
            double grid_max_moment = 0.0;
            double worst_monotone = std::numeric_limits<double>::infinity();
            std::vector<double> stage_final_kl;

            auto record = [&](std::uint64_t step) {
                report.trace.push_back(trace_row(ens));
                if (use_gauss)
                {
                    const bool regular = (law->cov.diagonal().array() > 0.0).all();
                    const double nan = std::numeric_limits<double>::quiet_NaN();
                    gauss_rows.push_back({step, gauss_kl(*law), regular ? w2_gaussian(*law, *gauss_target) : nan,
                                          regular ? fisher_info_relative(*law, pot.hessian()) : nan,
                                          law->second_moment()});
                }
                if (use_grid)
                    grid_rows.push_back({step, kl_grid(*grid_p, *grid_target), tv_grid(*grid_p, *grid_target),
                                         w2_grid_1d(*grid_p, *grid_target), second_moment_grid(*grid_p)});
            };

            std::uint64_t global = 0;
            if (use_gauss)
                max_exact_moment = law->second_moment();
            if (use_grid)
                grid_max_moment = second_moment_grid(*grid_p);
            record(0);
            for (const StepPlan &plan : report.plans)
            {
                plan.validate();
                std::uint64_t k = plan.k;
                if (cfg.max_steps && k > *cfg.max_steps)
                {
                    k = *cfg.max_steps;
                    report.k_capped = true;
                }
                std::optional<GridStepper> stepper;
                if (use_grid)
                    stepper.emplace(pot, grid, plan.h);
                double prev_kl = use_gauss ? gauss_kl(*law) : use_grid ? kl_grid(*grid_p, *grid_target) : 0.0;

                for (std::uint64_t s = 1; s <= k; ++s)
                {
                    step(ens, plan.h);
                    ++global;
                    double kl_now = 0.0;
                    if (use_gauss)
                    {
                        *law = ula_step_law(*law, pot.hessian(), plan.h);
                        max_exact_moment = std::max(max_exact_moment, law->second_moment());
                        kl_now = gauss_kl(*law);
                    }
                    if (use_grid)
                    {
                        *grid_p = stepper->step(*grid_p);
                        grid_max_moment = std::max(grid_max_moment, second_moment_grid(*grid_p));
                        if (!use_gauss)
                            kl_now = kl_grid(*grid_p, *grid_target);
                    }
                    // KL may only rise once it is already below the stage target.
                    if ((use_gauss || use_grid) && std::isfinite(prev_kl) && prev_kl >= plan.epsilon)
                        worst_monotone = std::min(worst_monotone, prev_kl - kl_now);
                    prev_kl = kl_now;
                    if (global % cfg.record_every == 0 || s == k)
                        record(global);
                }
                if (use_gauss || use_grid)
                    stage_final_kl.push_back(prev_kl);
            }
            report.steps_executed = global;

            // Verdicts.
            const bool have_oracle = use_gauss || use_grid;
            const std::string oracle_name = use_gauss ? "gaussian oracle" : "grid oracle";
            const double final_kl = have_oracle && !stage_final_kl.empty() ? stage_final_kl.back()
                                    : use_gauss                            ? gauss_kl(*law)
                                    : use_grid                             ? kl_grid(*grid_p, *grid_target)
                                                                           : std::numeric_limits<double>::quiet_NaN();
            if (cfg.regime == "strong")
            {
                if (have_oracle)
                {
                    report.verdicts.push_back(make_verdict("strong_kl_final", "KL(p_kh || p*) <= eps under the strong-convexity plan",
                                                           cfg.epsilon, final_kl, 0.0, oracle_name));
                    if (std::isfinite(worst_monotone))
                        report.verdicts.push_back(make_verdict(
                            "strong_kl_nonincreasing_above_eps", "KL(p_t || p*) >= eps implies KL does not increase", 0.0,
                            -worst_monotone, 1e-12, oracle_name));
                }
                if (use_gauss)
                {
                    const double m0 = gaussian_init(cfg.init, pot).second_moment();
                    if (m0 <= moment_bound)
                        report.verdicts.push_back(make_verdict("second_moment_exact",
                                                               "E|x|^2 <= 4d/m for all t when E_p0|x|^2 <= 4d/m, h <= 1/L",
                                                               moment_bound, max_exact_moment, 1e-9));
                    if (cfg.init.kind == "gaussian_1_over_m")
                        report.verdicts.push_back(make_verdict("kl_init_bound", "KL(N(0, I/m) || p*) <= dL/m",
                                                               kl_init_bound(pot.m(), pot.L(), long(d)),
                                                               gauss_kl(gaussian_init(cfg.init, pot)), 1e-12));
                    report.verdicts.push_back(make_verdict("w2_from_kl", "W2(p_kh, p*) <= sqrt(2 eps / m)",
                                                           std::sqrt(2.0 * cfg.epsilon / pot.m()),
                                                           w2_gaussian(*law, *gauss_target), 0.0));
                    if (d == 1)
                        report.verdicts.push_back(make_verdict("tv_from_kl", "TV(p_kh, p*) <= sqrt(eps)",
                                                               std::sqrt(cfg.epsilon), tv_gaussian_1d(*law, *gauss_target),
                                                               0.0));
                }
                if (cfg.init.kind == "gaussian_1_over_m")
                {
                    // Largest recorded second moment, less five standard errors.
                    double worst = -std::numeric_limits<double>::infinity();
                    for (const auto &row : report.trace)
                        worst = std::max(worst, row.second_moment - 5.0 * row.second_moment_se);
                    report.verdicts.push_back(make_verdict("second_moment_empirical",
                                                           "empirical E|x|^2 - 5 SE <= 4d/m at every recorded step",
                                                           moment_bound, worst, 0.0, "chain ensemble"));
                }
            }
            else if (cfg.regime == "halving")
            {
                for (std::size_t j = 0; j < stage_final_kl.size(); ++j)
                    report.verdicts.push_back(make_verdict("halving_stage_" + std::to_string(j) + "_kl",
                                                           "each restart halves the KL gap", report.plans[j].epsilon,
                                                           stage_final_kl[j], 0.0, oracle_name));
            }
            else
            {
                if (use_grid)
                {
                    std::string detail = "grid oracle";
                    if (report.k_capped)
                        detail += ", k capped at max_steps";
                    report.verdicts.push_back(make_verdict("weak_kl_final", "KL(p_kh || p*) <= eps under the weak-convexity plan",
                                                           cfg.epsilon, final_kl, 0.0, detail));
                    const auto &in = report.weak->inputs;
                    report.verdicts.push_back(make_verdict("weak_second_moment", "E|x_kh|^2 <= 4 (C1^2 + C2^2)",
                                                           4.0 * (in.c1 * in.c1 + in.c2 * in.c2), grid_max_moment, 0.0,
                                                           "grid oracle"));
                }
            }

            // Outputs.
            {
                auto os = out.open("trace.csv");
                write_trace_csv(os, report.trace);
            }
            if (use_gauss)
            {
                auto os = out.open("gaussian_oracle.csv");
                os << "step,kl,w2,fisher,second_moment\n";
                for (const auto &r : gauss_rows)
                    os << r.step << ',' << fmt(r.kl) << ',' << fmt(r.w2) << ',' << fmt(r.fisher) << ','
                       << fmt(r.second_moment) << '\n';
            }
            if (use_grid)
            {
                {
                    auto os = out.open("grid_oracle.csv");
                    os << "step,kl,tv,w2,second_moment\n";
                    for (const auto &r : grid_rows)
                        os << r.step << ',' << fmt(r.kl) << ',' << fmt(r.tv) << ',' << fmt(r.w2) << ','
                           << fmt(r.second_moment) << '\n';
                }
                auto os = out.open("grid_final.csv");
                write_grid_csv(os, *grid_p);
            }
            report.files = out.names();
            report.files.push_back("report.json");
            {
                auto os = out.open("report.json");
                os << report_json(report) << '\n';
            }
            return report;
        }
    } // namespace

    bool RunReport::passed() const
    {
        return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict &v) { return v.passed; });
    }

    RunReport run_experiment(const RunConfig &config)
    {
        OutputSet out(config.output);
        try
        {
            return execute(config, out);
        }
        catch (...)
        {
            out.discard();
            throw;
        }
    }

    std::string report_json(const RunReport &r)
    {
        ojson j;
        j["version"] = kVersion;
        j["seed"] = r.config.seed;
        j["config"] = config_json(r.config);
        ojson plans = ojson::array();
        for (const auto &p : r.plans)
            plans.push_back(plan_json(p));
        j["plans"] = plans;
        if (r.weak)
        {
            const auto &w = *r.weak;
            ojson wj;
            wj["c1"] = {{"value", w.inputs.c1}, {"estimated", w.c1_estimated}};
            wj["c2"] = {{"value", w.inputs.c2}, {"estimated", w.c2_estimated}};
            wj["h_prime"] = {{"value", std::isinf(w.inputs.h_cap) ? ojson("inf") : ojson(w.inputs.h_cap)},
                             {"estimated", w.h_prime_estimated}};
            wj["kl0"] = {{"value", w.inputs.kl0}, {"estimated", w.kl0_estimated}};
            ojson scan = ojson::array();
            for (const auto &[h, w2] : w.h_prime_scan)
                scan.push_back({{"h", h}, {"w2_stationary_to_target", w2}});
            wj["h_prime_scan"] = scan;
            j["weak_inputs"] = wj;
        }
        j["steps_executed"] = r.steps_executed;
        j["k_capped"] = r.k_capped;
        ojson verdicts = ojson::array();
        for (const auto &v : r.verdicts)
            verdicts.push_back({{"name", v.name},
                                {"claim", v.claim},
                                {"margin", v.margin},
                                {"tolerance", v.tolerance},
                                {"result", v.passed ? "pass" : "fail"},
                                {"detail", v.detail}});
        j["verdicts"] = verdicts;
        ojson rows = ojson::array();
        for (const auto &t : r.trace)
            rows.push_back({{"step", t.step}, {"second_moment", t.second_moment}, {"mean_norm", t.mean_norm}});
        j["trace"] = rows;
        j["files"] = r.files;
        return j.dump(2);
    }

} // namespace langevin
