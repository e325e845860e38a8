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

// Closed-form law propagation for quadratic potentials U(x) = 1/2 x^T A x.
//
// Under such a potential one unadjusted Langevin step is an affine map plus
// independent Gaussian noise, so Gaussian laws stay Gaussian and every
// quantity of interest (KL, W2, Fisher information) has a closed form. The
// target itself is N(0, A^-1).

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "langevin_kl/errors.hpp"

namespace langevin
{

    template <typename Scalar>
    struct GaussianLaw
    {
        typedef Eigen::Matrix<Scalar, Eigen::Dynamic, 1> VectorType;
        typedef Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> MatrixType;

        VectorType mean;
        MatrixType cov;

        Eigen::Index dim() const { return mean.size(); }

        static GaussianLaw diagonal(const VectorType &mean, const VectorType &var)
        {
            return {mean, var.asDiagonal()};
        }

        static GaussianLaw isotropic(Eigen::Index d, Scalar var)
        {
            return {VectorType::Zero(d), var * MatrixType::Identity(d, d)};
        }

        /// E|x|^2 = tr(cov) + |mean|^2.
        Scalar second_moment() const { return cov.trace() + mean.squaredNorm(); }
    };

    typedef GaussianLaw<double> GaussianLawd;

    namespace detail
    {
        template <typename Scalar>
        using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
        template <typename Scalar>
        using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

        template <typename Derived>
        bool is_diagonal(const Eigen::MatrixBase<Derived> &m)
        {
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                for (Eigen::Index i = 0; i < m.rows(); ++i)
                    if (i != j && m(i, j) != typename Derived::Scalar(0))
                        return false;
            return true;
        }

        template <typename Scalar>
        void check_same_dim(const GaussianLaw<Scalar> &p, const GaussianLaw<Scalar> &q, const char *what)
        {
            if (p.dim() != q.dim() || p.cov.rows() != p.dim() || q.cov.rows() != q.dim())
                throw DimensionError(std::string(what) + ": dimension mismatch");
        }

        /// Symmetric square root through the eigendecomposition; tiny negative
        /// eigenvalues from roundoff are clamped to zero.
        template <typename Scalar>
        Mat<Scalar> sqrtm_psd(const Mat<Scalar> &m)
        {
            Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(m);
            const Vec<Scalar> root = eig.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
            return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
        }

        template <typename Scalar>
        Eigen::LLT<Mat<Scalar>> checked_llt(const Mat<Scalar> &cov, const char *what)
        {
            Eigen::LLT<Mat<Scalar>> llt(cov);
            if (llt.info() != Eigen::Success)
                throw OracleError(std::string(what) + ": covariance is singular or not positive definite");
            const auto diag = llt.matrixLLT().diagonal();
            if (!(diag.minCoeff() > Scalar(0)))
                throw OracleError(std::string(what) + ": covariance is singular");
            return llt;
        }

        template <typename Scalar>
        Scalar largest_eigenvalue(const Mat<Scalar> &A)
        {
            if (is_diagonal(A))
                return A.diagonal().maxCoeff();
            Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(A, Eigen::EigenvaluesOnly);
            return eig.eigenvalues().maxCoeff();
        }

        template <typename Scalar>
        void check_stable(const Mat<Scalar> &A, Scalar h, const char *what)
        {
            if (!(h > Scalar(0)))
                throw OracleError(std::string(what) + ": step size must be positive");
            if (!(h * largest_eigenvalue(A) < Scalar(2)))
                throw OracleError(std::string(what) + ": h * L >= 2, the chain is unstable for this step size");
        }

        template <typename Scalar>
        Scalar normal_cdf(Scalar z)
        {
            return Scalar(0.5) * std::erfc(-z / std::numbers::sqrt2_v<Scalar>);
        }
    } // namespace detail

    /// Target law N(0, A^-1) of the quadratic potential with Hessian A.
    template <typename Scalar>
    GaussianLaw<Scalar> target_law(const detail::Mat<Scalar> &A)
    {
        const Eigen::Index d = A.rows();
        if (detail::is_diagonal(A))
            return {detail::Vec<Scalar>::Zero(d), A.diagonal().cwiseInverse().asDiagonal()};
        detail::Mat<Scalar> cov = detail::checked_llt<Scalar>(A, "target_law").solve(detail::Mat<Scalar>::Identity(d, d));
        return {detail::Vec<Scalar>::Zero(d), Scalar(0.5) * (cov + cov.transpose())};
    }

    /// Law after one step x' = (I - hA) x + sqrt(2h) xi.
    template <typename Scalar>
    GaussianLaw<Scalar> ula_step_law(const GaussianLaw<Scalar> &law, const detail::Mat<Scalar> &A, Scalar h)
    {
        if (A.rows() != law.dim() || A.cols() != law.dim())
            throw DimensionError("ula_step_law: dimension mismatch");
        detail::check_stable(A, h, "ula_step_law");
        const Eigen::Index d = law.dim();
        if (detail::is_diagonal(A) && detail::is_diagonal(law.cov))
        {
            const detail::Vec<Scalar> contraction = detail::Vec<Scalar>::Ones(d) - h * A.diagonal();
            GaussianLaw<Scalar> out;
            out.mean = contraction.cwiseProduct(law.mean);
            out.cov = (contraction.array().square() * law.cov.diagonal().array() + Scalar(2) * h).matrix().asDiagonal();
            return out;
        }
        const detail::Mat<Scalar> M = detail::Mat<Scalar>::Identity(d, d) - h * A;
        GaussianLaw<Scalar> out;
        out.mean = M * law.mean;
        out.cov = M * law.cov * M.transpose();
        out.cov.diagonal().array() += Scalar(2) * h;
        out.cov = Scalar(0.5) * (out.cov + out.cov.transpose()).eval();
        return out;
    }

    /// Stationary law of the h-chain: N(0, 2 (2A - hA^2)^-1), the fixed point
    /// of ula_step_law.
    template <typename Scalar>
    GaussianLaw<Scalar> stationary_law(const detail::Mat<Scalar> &A, Scalar h)
    {
        detail::check_stable(A, h, "stationary_law");
        const Eigen::Index d = A.rows();
        GaussianLaw<Scalar> out;
        out.mean = detail::Vec<Scalar>::Zero(d);
        if (detail::is_diagonal(A))
        {
            const auto a = A.diagonal().array();
            out.cov = (Scalar(2) / (a * (Scalar(2) - h * a))).matrix().asDiagonal();
            return out;
        }
        Eigen::SelfAdjointEigenSolver<detail::Mat<Scalar>> eig(A);
        const auto a = eig.eigenvalues().array();
        const detail::Vec<Scalar> var = Scalar(2) / (a * (Scalar(2) - h * a));
        out.cov = eig.eigenvectors() * var.asDiagonal() * eig.eigenvectors().transpose();
        return out;
    }

    /// Exact Ornstein-Uhlenbeck law at time t for diagonal A and a diagonal
    /// initial covariance.
    template <typename Scalar>
    GaussianLaw<Scalar> exact_flow_law(const detail::Mat<Scalar> &A, const GaussianLaw<Scalar> &init, Scalar t)
    {
        if (!detail::is_diagonal(A) || !detail::is_diagonal(init.cov))
            throw OracleError("exact_flow_law: only diagonal A and diagonal initial covariance are supported");
        if (A.rows() != init.dim())
            throw DimensionError("exact_flow_law: dimension mismatch");
        if (!(t >= Scalar(0)))
            throw OracleError("exact_flow_law: t must be >= 0");
        const auto a = A.diagonal().array();
        const auto decay = (-a * t).exp();
        GaussianLaw<Scalar> out;
        out.mean = (decay * init.mean.array()).matrix();
        const auto inv_a = a.inverse();
        out.cov = (inv_a + (init.cov.diagonal().array() - inv_a) * decay.square()).matrix().asDiagonal();
        return out;
    }

    /// KL(p || q) in nats.
    template <typename Scalar>
    Scalar kl_gaussian(const GaussianLaw<Scalar> &p, const GaussianLaw<Scalar> &q)
    {
        detail::check_same_dim(p, q, "kl_gaussian");
        const Eigen::Index d = p.dim();
        if (detail::is_diagonal(p.cov) && detail::is_diagonal(q.cov))
        {
            const auto vp = p.cov.diagonal().array();
            const auto vq = q.cov.diagonal().array();
            if (!(vp.minCoeff() > Scalar(0)) || !(vq.minCoeff() > Scalar(0)))
                throw OracleError("kl_gaussian: covariance is singular");
            const auto ratio = vp / vq;
            const auto dm = (p.mean - q.mean).array();
            return Scalar(0.5) * (ratio - Scalar(1) - ratio.log() + dm.square() / vq).sum();
        }
        const auto llt_p = detail::checked_llt(p.cov, "kl_gaussian");
        const auto llt_q = detail::checked_llt(q.cov, "kl_gaussian");
        const Scalar logdet_p = Scalar(2) * llt_p.matrixLLT().diagonal().array().log().sum();
        const Scalar logdet_q = Scalar(2) * llt_q.matrixLLT().diagonal().array().log().sum();
        const detail::Vec<Scalar> dm = q.mean - p.mean;
        const Scalar trace_term = llt_q.solve(p.cov).trace();
        const Scalar maha = dm.dot(llt_q.solve(dm));
        return Scalar(0.5) * (trace_term + maha - Scalar(d) + logdet_q - logdet_p);
    }

    /// W2 distance via the Bures formula.
    template <typename Scalar>
    Scalar w2_gaussian(const GaussianLaw<Scalar> &p, const GaussianLaw<Scalar> &q)
    {
        detail::check_same_dim(p, q, "w2_gaussian");
        const Scalar mean_part = (p.mean - q.mean).squaredNorm();
        if (detail::is_diagonal(p.cov) && detail::is_diagonal(q.cov))
        {
            const auto vp = p.cov.diagonal().array();
            const auto vq = q.cov.diagonal().array();
            if (!(vp.minCoeff() > Scalar(0)) || !(vq.minCoeff() > Scalar(0)))
                throw OracleError("w2_gaussian: covariance is singular");
            return std::sqrt(mean_part + (vp.sqrt() - vq.sqrt()).square().sum());
        }
        detail::checked_llt(p.cov, "w2_gaussian");
        detail::checked_llt(q.cov, "w2_gaussian");
        const detail::Mat<Scalar> root_q = detail::sqrtm_psd<Scalar>(q.cov);
        const detail::Mat<Scalar> cross = detail::sqrtm_psd<Scalar>(root_q * p.cov * root_q);
        const Scalar bures = p.cov.trace() + q.cov.trace() - Scalar(2) * cross.trace();
        return std::sqrt(std::max(Scalar(0), mean_part + bures));
    }

    /// Total variation between two 1-D Gaussians. The densities cross at most
    /// twice; between crossings the sign of p - q is fixed, so the integral of
    /// |p - q| is a sum of normal CDF differences.
    template <typename Scalar>
    Scalar tv_gaussian_1d(const GaussianLaw<Scalar> &p, const GaussianLaw<Scalar> &q)
    {
        detail::check_same_dim(p, q, "tv_gaussian_1d");
        if (p.dim() != 1)
            throw OracleError("tv_gaussian_1d: only d = 1 is supported");
        const Scalar m1 = p.mean[0], v1 = p.cov(0, 0);
        const Scalar m2 = q.mean[0], v2 = q.cov(0, 0);
        if (!(v1 > Scalar(0)) || !(v2 > Scalar(0)))
            throw OracleError("tv_gaussian_1d: variance must be positive");

        // log p - log q = a x^2 + b x + c
        const Scalar a = Scalar(0.5) / v2 - Scalar(0.5) / v1;
        const Scalar b = m1 / v1 - m2 / v2;
        const Scalar c = m2 * m2 / (Scalar(2) * v2) - m1 * m1 / (Scalar(2) * v1) - Scalar(0.5) * std::log(v1 / v2);

        std::vector<Scalar> cuts;
        const Scalar scale = std::max(std::abs(a), std::abs(b) / std::sqrt(std::max(v1, v2)));
        if (std::abs(a) <= Scalar(1e-14) * scale || (a == Scalar(0) && b != Scalar(0)))
        {
            if (b != Scalar(0))
                cuts.push_back(-c / b);
        }
        else if (a != Scalar(0))
        {
            const Scalar disc = b * b - Scalar(4) * a * c;
            if (disc > Scalar(0))
            {
                // Stable quadratic roots.
                const Scalar qroot = Scalar(-0.5) * (b + std::copysign(std::sqrt(disc), b));
                Scalar r1 = qroot / a;
                Scalar r2 = qroot != Scalar(0) ? c / qroot : r1;
                if (r1 > r2)
                    std::swap(r1, r2);
                cuts.push_back(r1);
                if (r2 != r1)
                    cuts.push_back(r2);
            }
        }

        const Scalar s1 = std::sqrt(v1), s2 = std::sqrt(v2);
        auto cdf_p = [&](Scalar x) { return detail::normal_cdf((x - m1) / s1); };
        auto cdf_q = [&](Scalar x) { return detail::normal_cdf((x - m2) / s2); };
        const Scalar inf = std::numeric_limits<Scalar>::infinity();

        std::vector<Scalar> edges{-inf};
        edges.insert(edges.end(), cuts.begin(), cuts.end());
        edges.push_back(inf);

        Scalar tv = 0;
        for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        {
            const Scalar lo = edges[i], hi = edges[i + 1];
            Scalar probe;
            if (std::isinf(lo) && std::isinf(hi))
                probe = m1;
            else if (std::isinf(lo))
                probe = hi - Scalar(1) - std::abs(hi);
            else if (std::isinf(hi))
                probe = lo + Scalar(1) + std::abs(lo);
            else
                probe = Scalar(0.5) * (lo + hi);
            if (a * probe * probe + b * probe + c > Scalar(0))
            {
                const Scalar mass_p = (std::isinf(hi) ? Scalar(1) : cdf_p(hi)) - (std::isinf(lo) ? Scalar(0) : cdf_p(lo));
                const Scalar mass_q = (std::isinf(hi) ? Scalar(1) : cdf_q(hi)) - (std::isinf(lo) ? Scalar(0) : cdf_q(lo));
                tv += mass_p - mass_q;
            }
        }
        return std::clamp(tv, Scalar(0), Scalar(1));
    }

    /// Relative Fisher information E_p |grad log(p / p*)|^2 against the target
    /// N(0, A^-1). With B = A - cov^-1 this is tr(B cov B) + |A mean|^2.
    template <typename Scalar>
    Scalar fisher_info_relative(const GaussianLaw<Scalar> &p, const detail::Mat<Scalar> &A)
    {
        if (A.rows() != p.dim() || A.cols() != p.dim())
            throw DimensionError("fisher_info_relative: dimension mismatch");
        const Scalar mean_part = (A * p.mean).squaredNorm();
        if (detail::is_diagonal(A) && detail::is_diagonal(p.cov))
        {
            const auto v = p.cov.diagonal().array();
            if (!(v.minCoeff() > Scalar(0)))
                throw OracleError("fisher_info_relative: covariance is singular");
            const auto b = A.diagonal().array() - v.inverse();
            return (b.square() * v).sum() + mean_part;
        }
        const auto llt = detail::checked_llt(p.cov, "fisher_info_relative");
        const Eigen::Index d = p.dim();
        const detail::Mat<Scalar> B = A - llt.solve(detail::Mat<Scalar>::Identity(d, d));
        return (B * p.cov * B.transpose()).trace() + mean_part;
    }

    /// Laws of the first k+1 iterates (index 0 is init).
    template <typename Scalar>
    std::vector<GaussianLaw<Scalar>> law_trajectory(const detail::Mat<Scalar> &A, const GaussianLaw<Scalar> &init,
                                                    Scalar h, std::size_t k)
    {
        detail::check_stable(A, h, "law_trajectory");
        std::vector<GaussianLaw<Scalar>> laws;
        laws.reserve(k + 1);
        laws.push_back(init);
        for (std::size_t i = 0; i < k; ++i)
            laws.push_back(ula_step_law(laws.back(), A, h));
        return laws;
    }

    /// KL(p_i || N(0, A^-1)) for i = 0..k along the exact law recursion.
    template <typename Scalar>
    std::vector<Scalar> kl_trajectory(const detail::Mat<Scalar> &A, const GaussianLaw<Scalar> &init, Scalar h,
                                      std::size_t k)
    {
        detail::check_stable(A, h, "kl_trajectory");
        const GaussianLaw<Scalar> target = target_law<Scalar>(A);
        std::vector<Scalar> kl;
        kl.reserve(k + 1);
        GaussianLaw<Scalar> law = init;
        kl.push_back(kl_gaussian(law, target));
        for (std::size_t i = 0; i < k; ++i)
        {
            law = ula_step_law(law, A, h);
            kl.push_back(kl_gaussian(law, target));
        }
        return kl;
    }

} // namespace langevin
