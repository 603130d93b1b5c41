// SPDX-License-Identifier: Apache-2.0
//
// corzf - coordinated regularized zero-forcing precoding toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Independent numerical oracles for the closed forms: sampled Wishart
// eigenvalues and adaptive quadrature over the eigenvalue densities.

#include "corzf/common.hpp"
#include "corzf/rng.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/laguerre.hpp>

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace corzf
{

struct OracleEstimate
{
    double alpha = 0.0;
    double d1 = 0.0, d2 = 0.0, f = 0.0;
    double se_d1 = 0.0, se_d2 = 0.0, se_f = 0.0;
    std::uint64_t trials = 0;
};

/// Monte Carlo estimates of D^(1), D^(2) and F. One eigenvalue draw is shared
/// by all entries of `alphas`; randomness is derived per block of 4096 trials.
inline std::vector<OracleEstimate> eigen_oracle(int M, std::span<const double> alphas, std::uint64_t trials,
                                                std::uint64_t seed)
{
    if (M < 1)
        throw DomainError("eigen_oracle: M must be >= 1");
    if (trials < 1000)
        throw ConfigError("eigen_oracle: at least 1000 trials required");
    for (double a : alphas)
        if (!(a > 0))
            throw DomainError("eigen_oracle: alpha must be positive");

    const std::size_t na = alphas.size();
    std::vector<double> s1(na), q1(na), s2(na), q2(na), sf(na), qf(na);
    ComplexNormal cn;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(M);
    constexpr std::uint64_t block = 4096;

    for (std::uint64_t start = 0; start < trials; start += block)
    {
        auto rng = make_rng(seed, {static_cast<std::uint64_t>(M), start / block});
        const std::uint64_t stop = std::min(trials, start + block);
        for (std::uint64_t t = start; t < stop; ++t)
        {
            const CMatrix H = cn.matrix(rng, M, M);
            es.compute(H * H.adjoint(), Eigen::EigenvaluesOnly);
            const auto &lam = es.eigenvalues();
            for (std::size_t a = 0; a < na; ++a)
            {
                const double al = alphas[a];
                double x1 = 0, x2 = 0, g = 0;
                for (int i = 0; i < M; ++i)
                {
                    const double l = std::max(lam(i), 0.0);
                    const double den = 1.0 / (l + al);
                    x1 += l * den * den;
                    x2 += l * l * den * den;
                    g += l * den;
                }
                s1[a] += x1, q1[a] += x1 * x1;
                s2[a] += x2, q2[a] += x2 * x2;
                sf[a] += g * g, qf[a] += g * g * g * g;
            }
        }
    }

    const double n = static_cast<double>(trials);
    auto se = [n](double s, double q) {
        const double m = s / n;
        return std::sqrt(std::max(q / n - m * m, 0.0) / (n - 1.0));
    };
    std::vector<OracleEstimate> out(na);
    for (std::size_t a = 0; a < na; ++a)
    {
        auto &o = out[a];
        o.alpha = alphas[a];
        o.d1 = s1[a] / n, o.se_d1 = se(s1[a], q1[a]);
        o.d2 = s2[a] / n, o.se_d2 = se(s2[a], q2[a]);
        o.f = sf[a] / n, o.se_f = se(sf[a], qf[a]);
        o.trials = trials;
    }
    return out;
}

inline OracleEstimate eigen_oracle(int M, double alpha, std::uint64_t trials, std::uint64_t seed)
{
    const double a[1] = {alpha};
    return eigen_oracle(M, a, trials, seed).front();
}

namespace quadrature
{

/// Gamma(b, alpha) = int_alpha^inf v^(b-1) e^-v dv by adaptive quadrature.
inline double upper_gamma(int b, double alpha)
{
    boost::math::quadrature::exp_sinh<double> integrator;
    auto f = [b](double u) { return std::exp((b - 1) * std::log(u) - u); };
    // substitute v = alpha + u so the singular lower end stays finite
    auto g = [&](double u) { return f(alpha + u); };
    return integrator.integrate(g);
}

// Orthonormal Laguerre functions phi_i(x) = L_i(x) e^{-x/2}: the eigenvalue
// kernel of the square complex Wishart ensemble is sum_i phi_i(x) phi_i(y).
inline double kernel_diag(int M, double x)
{
    double s = 0.0;
    for (int i = 0; i < M; ++i)
    {
        const double l = boost::math::laguerre(static_cast<unsigned>(i), x);
        s += l * l;
    }
    return s * std::exp(-x);
}

template <class F>
double integrate_half_line(F &&f)
{
    // split at x = 1: Gauss-Kronrod near the origin where alpha may make the
    // integrand sharp, exp-sinh for the exponentially decaying tail
    auto head = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-14);
    boost::math::quadrature::exp_sinh<double> tail;
    // e^-x underflows long before the polynomial factors overflow
    auto shifted = [&](double u) { return u < 800.0 ? f(1.0 + u) : 0.0; };
    return head + tail.integrate(shifted, 1e-14);
}

/// E[sum_i l_i^t / (l_i + alpha)^2] = int K(x, x) x^t / (x + alpha)^2 dx.
inline double d_term(int M, int t, double alpha)
{
    return integrate_half_line(
        [&](double x) { return kernel_diag(M, x) * std::pow(x, t) / ((x + alpha) * (x + alpha)); });
}

/// E[(sum_i g(l_i))^2] with g(x) = x / (x + alpha): one-point term plus the
/// determinantal two-point term (sum_i G_ii)^2 - sum_ij G_ij^2,
/// G_ij = int g phi_i phi_j.
inline double f_term(int M, double alpha)
{
    auto g = [alpha](double x) { return x / (x + alpha); };
    const double one = integrate_half_line([&](double x) { return kernel_diag(M, x) * g(x) * g(x); });
    std::vector<double> G(static_cast<std::size_t>(M * M));
    for (int i = 0; i < M; ++i)
        for (int j = i; j < M; ++j)
        {
            const double v = integrate_half_line([&](double x) {
                return boost::math::laguerre(static_cast<unsigned>(i), x) *
                       boost::math::laguerre(static_cast<unsigned>(j), x) * std::exp(-x) * g(x);
            });
            G[static_cast<std::size_t>(i * M + j)] = G[static_cast<std::size_t>(j * M + i)] = v;
        }
    double trace = 0.0, frob = 0.0;
    for (int i = 0; i < M; ++i)
        trace += G[static_cast<std::size_t>(i * M + i)];
    for (double v : G)
        frob += v * v;
    return one + trace * trace - frob;
}

} // namespace quadrature

} // namespace corzf
