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

#include "langevin_kl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "langevin_kl/chain.hpp"
#include "langevin_kl/errors.hpp"
#include "langevin_kl/gaussian_oracle.hpp"
#include "langevin_kl/grid_oracle.hpp"
#include "langevin_kl/planner.hpp"
#include "langevin_kl/potential.hpp"
#include "langevin_kl/random.hpp"

namespace langevin
{
    namespace
    {
        // Tracks the worst margin of a family of checks.
        struct MarginTracker
        {
            double worst = std::numeric_limits<double>::infinity();
            std::string where;

            void add(double margin, const std::string &label)
            {
                if (margin < worst)
                {
                    worst = margin;
                    where = label;
                }
            }

            Verdict verdict(std::string name, std::string claim, double tolerance) const
            {
                Verdict v;
                v.name = std::move(name);
                v.claim = std::move(claim);
                v.margin = worst;
                v.tolerance = tolerance;
                v.passed = worst >= -tolerance;
                v.detail = "worst case: " + where;
                return v;
            }
        };

        // Deterministic random draws for property checks.
        class Draws
        {
        public:
            Draws(std::uint64_t seed, std::uint64_t stream) : normal_(seed, stream, 0) {}

            double normal() { return normal_.next(); }
            double uniform(double lo, double hi)
            {
                const double u = 0.5 * std::erfc(-normal() / std::numbers::sqrt2);
                return lo + (hi - lo) * u;
            }
            Index integer(Index lo, Index hi)
            {
                return std::min(hi, lo + Index(uniform(0.0, double(hi - lo + 1))));
            }

            Matrix spd(Index d, double lo, double hi)
            {
                Matrix g(d, d);
                for (Index i = 0; i < g.size(); ++i)
                    g.data()[i] = normal();
                const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
                Vector lambda(d);
                for (Index i = 0; i < d; ++i)
                    lambda[i] = uniform(lo, hi);
                Matrix a = q * lambda.asDiagonal() * q.transpose();
                return 0.5 * (a + a.transpose());
            }

            GaussianLawd law(Index d)
            {
                GaussianLawd p;
                p.mean.resize(d);
                for (Index i = 0; i < d; ++i)
                    p.mean[i] = normal();
                p.cov = spd(d, 0.2, 3.0);
                return p;
            }

        private:
            NormalStream normal_;
        };

        std::string label(const char *what, int i)
        {
            return std::string(what) + " #" + std::to_string(i);
        }

        double smallest_eigenvalue(const Matrix &a)
        {
            return Eigen::SelfAdjointEigenSolver<Matrix>(a, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
        }
    } // namespace

    bool SuiteResult::passed() const
    {
        return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict &v) { return v.passed; });
    }

    double SuiteResult::worst_margin() const
    {
        double w = std::numeric_limits<double>::infinity();
        for (const auto &v : verdicts)
            w = std::min(w, v.margin);
        return w;
    }

    const std::vector<std::string> &suite_names()
    {
        static const std::vector<std::string> names = {"planner",   "potentials",         "inequalities",
                                                       "contraction", "oracle-equivalence", "moments"};
        return names;
    }

    std::vector<SuiteResult> run_suite(const std::string &name, std::uint64_t seed)
    {
        if (name == "all")
        {
            std::vector<SuiteResult> out;
            for (const auto &n : suite_names())
                out.push_back(run_suite(n, seed).front());
            return out;
        }
        if (name == "planner")
            return {verify_planner()};
        if (name == "potentials")
            return {verify_potentials(seed)};
        if (name == "inequalities")
            return {verify_inequalities(seed)};
        if (name == "contraction")
            return {verify_contraction(seed)};
        if (name == "oracle-equivalence")
            return {verify_oracle_equivalence()};
        if (name == "moments")
            return {verify_moments(seed)};

        std::string known = "all";
        for (const auto &n : suite_names())
            known += ", " + n;
        throw Error("unknown suite '" + name + "'; known suites: " + known);
    }

    SuiteResult verify_inequalities(std::uint64_t seed, int n_pairs, int n_flows)
    {
        SuiteResult r{"inequalities", {}};
        constexpr double tol = 1e-9;

        MarginTracker pinsker;
        for (int i = 0; i < n_pairs; ++i)
        {
            Draws draw(seed, 1000 + std::uint64_t(i));
            const GaussianLawd p = GaussianLawd::diagonal(Vector::Constant(1, draw.normal()),
                                                          Vector::Constant(1, std::exp(draw.uniform(-1.5, 1.5))));
            const GaussianLawd q = GaussianLawd::diagonal(Vector::Constant(1, draw.normal()),
                                                          Vector::Constant(1, std::exp(draw.uniform(-1.5, 1.5))));
            pinsker.add(std::sqrt(kl_gaussian(p, q) / 2.0) - tv_gaussian_1d(p, q), label("1-D pair", i));
        }
        r.verdicts.push_back(pinsker.verdict("pinsker", "TV(p, q) <= sqrt(KL(p || q) / 2)", tol));

        MarginTracker talagrand, log_sobolev, weak;
        for (int i = 0; i < n_pairs; ++i)
        {
            Draws draw(seed, 2000 + std::uint64_t(i));
            const Index d = draw.integer(1, 4);
            const Matrix a = draw.spd(d, 0.5, 3.0);
            const double m = smallest_eigenvalue(a);
            const GaussianLawd p = draw.law(d);
            const GaussianLawd target = target_law<double>(a);

            const double kl = kl_gaussian(p, target);
            const double w2 = w2_gaussian(p, target);
            const double fisher = fisher_info_relative(p, a);
            talagrand.add(2.0 / m * kl - w2 * w2, label("pair", i));
            log_sobolev.add(fisher / (2.0 * m) - kl, label("pair", i));
            weak.add(std::sqrt(fisher) * w2 - kl, label("pair", i));
        }
        r.verdicts.push_back(talagrand.verdict("talagrand", "W2(p, p*)^2 <= (2/m) KL(p || p*)", tol));
        r.verdicts.push_back(
            log_sobolev.verdict("log_sobolev", "KL(p || p*) <= |D_p|^2 / (2m), relative Fisher information", tol));
        r.verdicts.push_back(weak.verdict("weak_convexity_bound", "KL(p || p*) <= |D_p| W2(p, p*)", tol));

        MarginTracker dissipation;
        constexpr double fd_step = 1e-5;
        constexpr double rel_tol = 1e-3;
        for (int i = 0; i < n_flows; ++i)
        {
            Draws draw(seed, 3000 + std::uint64_t(i));
            const Index d = draw.integer(1, 4);
            Vector a(d), mean(d), var(d);
            for (Index j = 0; j < d; ++j)
            {
                a[j] = draw.uniform(0.3, 3.0);
                mean[j] = draw.normal();
                var[j] = std::exp(draw.uniform(-1.5, 1.5));
            }
            const Matrix A = a.asDiagonal();
            const GaussianLawd init = GaussianLawd::diagonal(mean, var);
            const GaussianLawd target = target_law<double>(A);
            const double t = draw.uniform(0.05, 2.0);

            const double kl_up = kl_gaussian(exact_flow_law(A, init, t + fd_step), target);
            const double kl_down = kl_gaussian(exact_flow_law(A, init, t - fd_step), target);
            const double slope = (kl_up - kl_down) / (2.0 * fd_step);
            const double fisher = fisher_info_relative(exact_flow_law(A, init, t), A);
            dissipation.add(rel_tol - std::abs(slope + fisher) / fisher, label("flow", i));
        }
        r.verdicts.push_back(dissipation.verdict(
            "dissipation_identity", "d/dt KL(p_t || p*) = -|D_p_t|^2 along the exact flow (rel. err <= 1e-3)", tol));
        return r;
    }

    SuiteResult verify_oracle_equivalence()
    {
        SuiteResult r{"oracle-equivalence", {}};
        const Potential pot = Potential::quadratic_diagonal(Vector::Constant(1, 1.0));
        const Matrix A = pot.hessian();
        const GridSpec grid{-8.0, 8.0, 4096};
        constexpr double h = 0.1;
        constexpr int steps = 50;

        const grid_init::Gaussian inits[] = {{1.0, 0.25}, {0.0, 1.0}};
        for (const auto &init : inits)
        {
            const GridDensity target = target_density_grid(pot, grid);
            const GridStepper stepper(pot, grid, h);
            GridDensity p = discretize_law(init, grid);
            GaussianLawd law = GaussianLawd::diagonal(Vector::Constant(1, init.mean), Vector::Constant(1, init.var));
            const GaussianLawd target_law_ = target_law<double>(A);

            MarginTracker diff;
            for (int k = 0; k <= steps; ++k)
            {
                if (k > 0)
                {
                    p = stepper.step(p);
                    law = ula_step_law(law, A, h);
                }
                diff.add(1e-3 - std::abs(kl_grid(p, target) - kl_gaussian(law, target_law_)), label("step", k));
            }
            std::ostringstream name;
            name << "grid_vs_gaussian_kl[N(" << init.mean << "," << init.var << ")]";
            r.verdicts.push_back(diff.verdict(name.str(), "|KL_grid - KL_gauss| <= 1e-3 at every step", 0.0));
        }
        return r;
    }

    SuiteResult verify_contraction(std::uint64_t seed)
    {
        SuiteResult r{"contraction", {}};

        {
            const Potential pot = Potential::quadratic_diagonal((Vector(2) << 1.0, 2.0).finished());
            const StepPlan plan = plan_strong(pot.m(), pot.L(), pot.dim(), 0.1);
            const Matrix A = pot.hessian();
            const GaussianLawd pi_h = stationary_law(A, plan.h);
            GaussianLawd law = GaussianLawd::isotropic(2, 1.0 / pot.m());
            double prev = w2_gaussian(law, pi_h);
            MarginTracker mono;
            for (std::uint64_t k = 1; k <= plan.k; ++k)
            {
                law = ula_step_law(law, A, plan.h);
                const double w = w2_gaussian(law, pi_h);
                mono.add(prev - w, "step " + std::to_string(k));
                prev = w;
            }
            r.verdicts.push_back(mono.verdict("w2_to_stationary_nonincreasing",
                                              "W2(p_kh, pi_h) <= W2(p_(k-1)h, pi_h) along the exact law", 1e-12));
        }

        {
            const Potential pot = Potential::quadratic_diagonal(Vector::Constant(1, 1.0));
            const CoupledTrace t = coupled_run(pot, init::Point{Vector::Constant(1, 1.0)},
                                               init::Point{Vector::Constant(1, -1.0)}, 0.5, 10, 1, seed);
            MarginTracker halving;
            for (std::size_t k = 0; k < t.rms.size(); ++k)
                halving.add(1e-12 - std::abs(t.rms[k] - 2.0 * std::ldexp(1.0, -int(k))), "step " + std::to_string(k));
            r.verdicts.push_back(
                halving.verdict("coupled_quadratic_exact", "coupled distance obeys D' = (1 - h a) D exactly", 0.0));
        }

        {
            const Potential pot = Potential::huber(1.0, 1);
            const CoupledTrace t =
                coupled_run(pot, init::Gaussian{Vector::Constant(1, 0.0), Vector::Constant(1, 4.0)},
                            init::Gaussian{Vector::Constant(1, 2.0), Vector::Constant(1, 1.0)}, 0.1, 200, 10000, seed);
            MarginTracker mono;
            for (std::size_t k = 1; k < t.rms.size(); ++k)
                mono.add(t.rms[k - 1] - t.rms[k] + 5.0 * t.standard_error[k], "step " + std::to_string(k));
            r.verdicts.push_back(mono.verdict("coupled_huber_nonincreasing",
                                              "synchronous coupling RMS distance non-increasing (h <= 1/L)", 0.0));
        }
        return r;
    }

    SuiteResult verify_moments(std::uint64_t seed)
    {
        SuiteResult r{"moments", {}};
        const Potential pot = Potential::quadratic_diagonal((Vector(2) << 1.0, 2.0).finished());
        const StepPlan plan = plan_strong(pot.m(), pot.L(), pot.dim(), 0.1);
        const double bound = 4.0 * double(pot.dim()) / pot.m();

        {
            const auto laws = law_trajectory(pot.hessian(), GaussianLawd::isotropic(2, 1.0 / pot.m()), plan.h, plan.k);
            MarginTracker exact;
            for (std::size_t k = 0; k < laws.size(); ++k)
                exact.add(bound - laws[k].second_moment(), "step " + std::to_string(k));
            r.verdicts.push_back(exact.verdict("second_moment_bound_exact", "E|x|^2 <= 4d/m along the exact law", 1e-9));
        }

        {
            const Ensemble e = init_ensemble(pot, init::GaussianOneOverM{}, 20000, seed);
            const RunResult run_result = run(e, plan, 100);
            MarginTracker empirical;
            for (const auto &row : run_result.trace)
                empirical.add(bound + 5.0 * row.second_moment_se - row.second_moment, "step " + std::to_string(row.step));
            r.verdicts.push_back(empirical.verdict("second_moment_bound_empirical",
                                                   "empirical E|x|^2 <= 4d/m + 5 SE at every recorded step", 0.0));
        }
        return r;
    }

    SuiteResult verify_potentials(std::uint64_t seed)
    {
        SuiteResult r{"potentials", {}};
        Draws draw(seed, 4000);
        const Matrix full = draw.spd(3, 0.5, 2.0);
        const std::pair<std::string, Potential> cases[] = {
            {"quadratic-diagonal", Potential::quadratic_diagonal((Vector(2) << 1.0, 2.0).finished())},
            {"quadratic-full", Potential::quadratic_full(full)},
            {"huber", Potential::huber(1.0, 3)},
        };
        for (const auto &[name, pot] : cases)
        {
            const ConstantsReport rep = validate_constants(pot, 100, seed);
            Verdict v;
            v.name = "constants[" + name + "]";
            v.claim = "m I <= hess U <= L I, co-coercivity, and grad U matches finite differences";
            v.tolerance = 1e-9;
            v.margin = std::min(-rep.max_violation, 1e-6 - rep.max_gradient_error);
            v.passed = rep.passed();
            std::ostringstream os;
            os << "max violation " << rep.max_violation << " (" << rep.worst_check << "), gradient error "
               << rep.max_gradient_error;
            v.detail = os.str();
            r.verdicts.push_back(v);
        }
        return r;
    }

    SuiteResult verify_planner()
    {
        SuiteResult r{"planner", {}};
        auto check = [&](std::string name, std::string claim, double got, double want, double tol) {
            Verdict v;
            v.name = std::move(name);
            v.claim = std::move(claim);
            v.tolerance = tol;
            v.margin = tol - std::abs(got - want);
            v.passed = v.margin >= 0.0;
            std::ostringstream os;
            os.precision(17);
            os << "got " << got << ", expected " << want;
            v.detail = os.str();
            r.verdicts.push_back(std::move(v));
        };

        const StepPlan strong = plan_strong(1.0, 2.0, 2, 0.1);
        check("plan_strong.h", "h = m eps / (16 d L^2)", strong.h, 7.8125e-4, 1e-12);
        check("plan_strong.k", "k = ceil(16 (L/m)^2 d ln(dL/(m eps)) / eps)", double(strong.k), 4722.0, 0.0);

        const StepPlan weak = plan_weak({1.0, 1.0, std::numeric_limits<double>::infinity(), std::exp(1.0)}, 1.0, 1, 0.1);
        check("plan_weak.h", "h = (1/48) min{eps/(C1(C1+C2)L^2), eps^2/(C1^2 d L^2), h'}", weak.h, 0.01 / 48.0, 1e-12);
        check("plan_weak.k", "k = ceil(2 C1^2/(eps h) + 2 C1^2 ln(kl0)/h)", double(weak.k), 105600.0, 0.0);

        check("kl_init_bound", "KL(N(0, I/m) || p*) <= dL/m", kl_init_bound(1.0, 2.0, 3), 6.0, 1e-12);
        check("discretization_error_bound", "2 L^2 h sqrt(E|x|^2) + 2 L sqrt(h d)",
              discretization_error_bound(1.0, 0.01, 1, 4.0), 0.24, 1e-12);
        return r;
    }

} // namespace langevin
