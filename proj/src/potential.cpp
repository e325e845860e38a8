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

#include "langevin_kl/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "langevin_kl/errors.hpp"
#include "langevin_kl/random.hpp"

namespace langevin
{
    namespace
    {
        double huber_1d(double x, double delta)
        {
            const double ax = std::abs(x);
            return ax <= delta ? 0.5 * x * x : delta * ax - 0.5 * delta * delta;
        }

        double huber_grad_1d(double x, double delta)
        {
            return std::clamp(x, -delta, delta);
        }

        std::string fmt_double(double v)
        {
            std::ostringstream os;
            os << v;
            return os.str();
        }
    } // namespace

    std::string to_string(PotentialKind kind)
    {
        switch (kind)
        {
        case PotentialKind::QuadraticDiagonal:
            return "quadratic-diagonal";
        case PotentialKind::QuadraticFull:
            return "quadratic-full";
        case PotentialKind::Huber:
            return "huber";
        case PotentialKind::Custom:
            return "custom";
        }
        return "unknown";
    }

    Potential Potential::quadratic_diagonal(const Vector &a)
    {
        if (a.size() == 0)
            throw ConstructionError("quadratic-diagonal: need at least one diagonal entry");
        for (Index i = 0; i < a.size(); ++i)
        {
            if (!(a[i] > 0.0) || !std::isfinite(a[i]))
                throw ConstructionError("quadratic-diagonal: entry " + std::to_string(i) + " = " + fmt_double(a[i])
                                        + " is not a positive eigenvalue");
        }
        Potential p;
        p.kind_ = PotentialKind::QuadraticDiagonal;
        p.d_ = a.size();
        p.diag_ = a;
        p.A_ = a.asDiagonal();
        p.m_ = a.minCoeff();
        p.L_ = a.maxCoeff();
        return p;
    }

    Potential Potential::quadratic_full(const Matrix &A)
    {
        if (A.rows() == 0 || A.rows() != A.cols())
            throw ConstructionError("quadratic-full: matrix must be square and non-empty");
        if (!A.allFinite())
            throw ConstructionError("quadratic-full: matrix has non-finite entries");
        const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
        if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw ConstructionError("quadratic-full: matrix is not symmetric");

        Eigen::SelfAdjointEigenSolver<Matrix> eig(A, Eigen::EigenvaluesOnly);
        const Vector &ev = eig.eigenvalues();
        if (!(ev.minCoeff() > 0.0))
            throw ConstructionError("quadratic-full: non-positive eigenvalue " + fmt_double(ev.minCoeff())
                                    + " (matrix is not positive definite)");

        Potential p;
        p.kind_ = PotentialKind::QuadraticFull;
        p.d_ = A.rows();
        p.A_ = 0.5 * (A + A.transpose());
        p.m_ = ev.minCoeff();
        p.L_ = ev.maxCoeff();
        const bool diagonal = (p.A_ - Matrix(p.A_.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
        if (diagonal)
            p.diag_ = p.A_.diagonal();
        return p;
    }

    Potential Potential::huber(double delta, Index d)
    {
        if (!(delta > 0.0) || !std::isfinite(delta))
            throw ConstructionError("huber: threshold delta = " + fmt_double(delta) + " must be > 0");
        if (d < 1)
            throw ConstructionError("huber: dimension must be >= 1");
        Potential p;
        p.kind_ = PotentialKind::Huber;
        p.d_ = d;
        p.delta_ = delta;
        p.m_ = 0.0;
        p.L_ = 1.0;
        return p;
    }

    Potential Potential::custom(ValueFn value, GradientFn gradient, double m, double L, Index d)
    {
        if (!value || !gradient)
            throw ConstructionError("custom: value and gradient callbacks are required");
        if (d < 1)
            throw ConstructionError("custom: dimension must be >= 1");
        if (!(m >= 0.0) || !(L > 0.0) || m > L)
            throw ConstructionError("custom: constants must satisfy 0 <= m <= L, L > 0");
        Potential p;
        p.kind_ = PotentialKind::Custom;
        p.d_ = d;
        p.m_ = m;
        p.L_ = L;
        p.value_fn_ = std::make_shared<const ValueFn>(std::move(value));
        p.gradient_fn_ = std::make_shared<const GradientFn>(std::move(gradient));
        return p;
    }

    const Matrix &Potential::hessian() const
    {
        if (!is_quadratic())
            throw Error("hessian: only defined for quadratic potentials, got " + to_string(kind_));
        return A_;
    }

    bool Potential::is_diagonal_quadratic() const
    {
        return is_quadratic() && diag_.size() == d_;
    }

    void Potential::check_dim(Index n) const
    {
        if (n != d_)
            throw DimensionError("potential has dimension " + std::to_string(d_) + ", got a vector of length "
                                 + std::to_string(n));
    }

    double Potential::value(const Eigen::Ref<const Vector> &x) const
    {
        check_dim(x.size());
        switch (kind_)
        {
        case PotentialKind::QuadraticDiagonal:
            return 0.5 * (diag_.array() * x.array().square()).sum();
        case PotentialKind::QuadraticFull:
            return 0.5 * x.dot(A_ * x);
        case PotentialKind::Huber:
        {
            double s = 0.0;
            for (Index i = 0; i < d_; ++i)
                s += huber_1d(x[i], delta_);
            return s;
        }
        case PotentialKind::Custom:
            return (*value_fn_)(x);
        }
        return 0.0;
    }

    Vector Potential::gradient(const Eigen::Ref<const Vector> &x) const
    {
        Vector g(x.size());
        gradient_into(x, g);
        return g;
    }

    void Potential::gradient_into(const Eigen::Ref<const Vector> &x, Eigen::Ref<Vector> out) const
    {
        check_dim(x.size());
        check_dim(out.size());
        switch (kind_)
        {
        case PotentialKind::QuadraticDiagonal:
            out = diag_.cwiseProduct(x);
            return;
        case PotentialKind::QuadraticFull:
            out.noalias() = A_ * x;
            return;
        case PotentialKind::Huber:
            for (Index i = 0; i < d_; ++i)
                out[i] = huber_grad_1d(x[i], delta_);
            return;
        case PotentialKind::Custom:
        {
            const Vector g = (*gradient_fn_)(x);
            check_dim(g.size());
            out = g;
            return;
        }
        }
    }

    double Potential::value_1d(double x) const
    {
        check_dim(1);
        switch (kind_)
        {
        case PotentialKind::QuadraticDiagonal:
        case PotentialKind::QuadraticFull:
            return 0.5 * A_(0, 0) * x * x;
        case PotentialKind::Huber:
            return huber_1d(x, delta_);
        case PotentialKind::Custom:
            return (*value_fn_)(Vector::Constant(1, x));
        }
        return 0.0;
    }

    double Potential::derivative_1d(double x) const
    {
        check_dim(1);
        switch (kind_)
        {
        case PotentialKind::QuadraticDiagonal:
        case PotentialKind::QuadraticFull:
            return A_(0, 0) * x;
        case PotentialKind::Huber:
            return huber_grad_1d(x, delta_);
        case PotentialKind::Custom:
            return (*gradient_fn_)(Vector::Constant(1, x))[0];
        }
        return 0.0;
    }

    Potential Potential::with_declared_constants(double m, double L) const
    {
        Potential p = *this;
        p.m_ = m;
        p.L_ = L;
        return p;
    }

    Potential construct_potential(const PotentialSpec &spec)
    {
        const auto &v = spec.params;
        if (spec.kind == "quadratic-diagonal")
        {
            return Potential::quadratic_diagonal(Eigen::Map<const Vector>(v.data(), Index(v.size())));
        }
        if (spec.kind == "quadratic-full")
        {
            const auto d = Index(std::llround(std::sqrt(double(v.size()))));
            if (d * d != Index(v.size()) || d == 0)
                throw ConstructionError("quadratic-full: expected d*d parameters, got " + std::to_string(v.size()));
            return Potential::quadratic_full(
                Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(v.data(), d, d));
        }
        if (spec.kind == "huber")
        {
            if (v.size() != 1)
                throw ConstructionError("huber: expected a single threshold parameter, got "
                                        + std::to_string(v.size()));
            return Potential::huber(v[0], spec.dim);
        }
        if (spec.kind == "custom")
            throw ConstructionError("custom potentials cannot be built from a text spec");
        throw ConstructionError("unknown potential kind '" + spec.kind
                                + "' (expected quadratic-diagonal, quadratic-full or huber)");
    }

    ConstantsReport validate_constants(const Potential &p, int n_probes, std::uint64_t seed)
    {
        if (n_probes < 1)
            throw Error("validate_constants: n_probes must be >= 1");

        const Index d = p.dim();
        const double scale = p.m() > 0.0 ? 3.0 / std::sqrt(p.m()) : 3.0;
        constexpr double fd_step = 1e-5;

        ConstantsReport report;
        report.n_probes = n_probes;
        report.max_violation = -std::numeric_limits<double>::infinity();

        auto note = [&](double violation, const char *name) {
            if (violation > report.max_violation)
            {
                report.max_violation = violation;
                report.worst_check = name;
            }
        };

        Vector x(d), y(d), e(d);
        for (int probe = 0; probe < n_probes; ++probe)
        {
            NormalStream noise(seed, std::uint64_t(probe), 0);
            noise.fill(x);
            noise.fill(y);
            x *= scale;
            y *= scale;

            const Vector gx = p.gradient(x);
            const Vector gy = p.gradient(y);
            const Vector dx = x - y;
            const Vector dg = gx - gy;
            const double r2 = dx.squaredNorm();
            if (r2 == 0.0)
                continue;
            const double inner = dg.dot(dx);

            note((p.m() * r2 - inner) / r2, "strong-monotonicity");
            note((inner - p.L() * r2) / r2, "lipschitz-gradient");
            note((dg.squaredNorm() / p.L() - inner) / r2, "co-coercivity");

            const double gscale = std::max(1.0, gx.cwiseAbs().maxCoeff());
            for (Index i = 0; i < d; ++i)
            {
                e = x;
                e[i] += fd_step;
                const double up = p.value(e);
                e[i] = x[i] - fd_step;
                const double down = p.value(e);
                const double fd = (up - down) / (2.0 * fd_step);
                report.max_gradient_error = std::max(report.max_gradient_error, std::abs(fd - gx[i]) / gscale);
            }
        }
        return report;
    }

} // namespace langevin
