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
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "langevin_kl/types.hpp"

namespace langevin
{

    enum class PotentialKind
    {
        QuadraticDiagonal,
        QuadraticFull,
        Huber,
        Custom
    };

    std::string to_string(PotentialKind kind);

    /// Negative log-density U of a target p* ~ exp(-U), normalized so that
    /// U(0) = 0 and grad U(0) = 0, together with constants m and L such that
    /// m I <= hess U <= L I.
    ///
    /// Immutable after construction; copies share the custom callbacks.
    class Potential
    {
    public:
        typedef std::function<double(const Vector &)> ValueFn;
        typedef std::function<Vector(const Vector &)> GradientFn;

        /// U(x) = 1/2 sum_i a_i x_i^2, with every a_i > 0.
        static Potential quadratic_diagonal(const Vector &a);
        /// U(x) = 1/2 x^T A x for symmetric positive-definite A.
        static Potential quadratic_full(const Matrix &A);
        /// Coordinatewise Huber loss summed over d coordinates; m = 0, L = 1.
        static Potential huber(double delta, Index d);
        /// Caller-certified potential. The constants are taken on trust.
        static Potential custom(ValueFn value, GradientFn gradient, double m, double L, Index d);

        PotentialKind kind() const { return kind_; }
        double m() const { return m_; }
        double L() const { return L_; }
        Index dim() const { return d_; }

        /// Huber threshold; only meaningful for PotentialKind::Huber.
        double delta() const { return delta_; }

        /// Hessian of a quadratic potential. Throws for other kinds.
        const Matrix &hessian() const;
        bool is_quadratic() const
        {
            return kind_ == PotentialKind::QuadraticDiagonal || kind_ == PotentialKind::QuadraticFull;
        }
        /// True when the Hessian is constant and diagonal.
        bool is_diagonal_quadratic() const;

        double value(const Eigen::Ref<const Vector> &x) const;
        Vector gradient(const Eigen::Ref<const Vector> &x) const;

        /// Writes grad U(x) into out without allocating for the built-in kinds.
        void gradient_into(const Eigen::Ref<const Vector> &x, Eigen::Ref<Vector> out) const;

        /// U and U' for d == 1.
        double value_1d(double x) const;
        double derivative_1d(double x) const;

        /// Copy with different declared constants. Used to probe what
        /// validate_constants reports for mis-declared potentials.
        Potential with_declared_constants(double m, double L) const;

    private:
        Potential() = default;

        void check_dim(Index n) const;

        PotentialKind kind_ = PotentialKind::Custom;
        double m_ = 0.0;
        double L_ = 0.0;
        Index d_ = 0;
        double delta_ = 0.0;
        Vector diag_;
        Matrix A_;
        std::shared_ptr<const ValueFn> value_fn_;
        std::shared_ptr<const GradientFn> gradient_fn_;
    };

    /// Text form of a potential: a kind name plus a flat numeric array.
    ///
    ///   "quadratic-diagonal"  params = a_1..a_d
    ///   "quadratic-full"      params = A in row-major order (d*d entries)
    ///   "huber"               params = {delta}; dimension taken from `dim`
    struct PotentialSpec
    {
        std::string kind;
        std::vector<double> params;
        Index dim = 1;
    };

    Potential construct_potential(const PotentialSpec &spec);

    struct ConstantsReport
    {
        /// Largest signed violation of the monotonicity, smoothness and
        /// co-coercivity inequalities, each divided by |x - y|^2.
        /// Non-positive (up to roundoff) when the declared constants hold.
        double max_violation = 0.0;
        /// Largest central-difference mismatch between value() and
        /// gradient(), relative to max(1, |grad|_inf).
        double max_gradient_error = 0.0;
        std::string worst_check;
        int n_probes = 0;

        bool passed(double tol = 1e-9, double gradient_tol = 1e-6) const
        {
            return max_violation <= tol && max_gradient_error <= gradient_tol;
        }
    };

    /// Spot-checks the declared (m, L) on random point pairs drawn from
    /// N(0, s^2 I) with s = 3/sqrt(m), or s = 3 when m = 0.
    ConstantsReport validate_constants(const Potential &p, int n_probes, std::uint64_t seed);

} // namespace langevin
