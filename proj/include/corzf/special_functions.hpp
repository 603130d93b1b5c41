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

#include "corzf/common.hpp"

#include <boost/math/constants/constants.hpp>

#include <cmath>
#include <limits>
#include <vector>

namespace corzf
{

/// Exponential integral E1(x) = int_x^inf e^-t / t dt for x > 0.
///
/// Power series for x <= 1, modified Lentz continued fraction above. Generic
/// over the floating type so the Wishart closed forms can run in extended or
/// multiprecision arithmetic.
template <class Real>
Real expint_e1(const Real &x)
{
    using std::abs;
    using std::exp;
    using std::log;
    if (!(x > 0))
        throw DomainError("expint_e1: argument must be positive");

    const Real eps = std::numeric_limits<Real>::epsilon();
    if (x <= 1)
    {
        Real sum = 0;
        Real term = 1; // (-x)^k / k!
        for (int k = 1; k < 10000; ++k)
        {
            term *= -x / k;
            const Real c = term / k;
            sum += c;
            if (abs(c) <= eps * abs(sum))
                break;
        }
        return -boost::math::constants::euler<Real>() - log(x) - sum;
    }

    const Real tiny = Real(1e-300);
    Real b = x + 1;
    Real c = 1 / tiny;
    Real d = 1 / b;
    Real h = d;
    for (int i = 1; i < 100000; ++i)
    {
        const Real an = -Real(i) * i;
        b += 2;
        d = 1 / (an * d + b);
        c = b + an / c;
        const Real del = c * d;
        h *= del;
        if (abs(del - 1) <= eps)
            break;
    }
    return h * exp(-x);
}

/// Upper incomplete gamma values Gamma(b, alpha) for integer b = -1..b_max.
///
/// Element [b + 1] holds Gamma(b, alpha). b = 0 is E1, b = -1 uses
/// Gamma(-1, a) = e^-a / a - E1(a), b >= 1 follows the upward recurrence
/// Gamma(b + 1, a) = b Gamma(b, a) + a^b e^-a seeded at Gamma(1, a) = e^-a.
/// `magnitude` (optional) receives the absolute size of the summands that
/// produced each value, used for rounding-error bounds downstream.
template <class Real>
std::vector<Real> upper_gamma_table(int b_max, const Real &alpha, std::vector<Real> *magnitude = nullptr)
{
    using std::exp;
    if (!(alpha > 0))
        throw DomainError("upper_gamma_table: alpha must be positive");
    if (b_max < -1)
        throw DomainError("upper_gamma_table: b_max must be >= -1");

    const auto n = static_cast<std::size_t>(b_max + 2);
    std::vector<Real> g(n);
    std::vector<Real> mag(n);
    const Real e1 = expint_e1(alpha);
    const Real ea = exp(-alpha);
    g[0] = ea / alpha - e1;
    mag[0] = ea / alpha + e1;
    if (n > 1)
    {
        g[1] = e1;
        mag[1] = e1;
    }
    if (n > 2)
    {
        g[2] = ea;
        mag[2] = ea;
    }
    Real power = 1; // alpha^b
    for (std::size_t idx = 3; idx < n; ++idx)
    {
        const int b = static_cast<int>(idx) - 2; // g[idx] = Gamma(b + 1)
        power *= alpha;
        g[idx] = Real(b) * g[idx - 1] + power * ea;
        mag[idx] = g[idx];
    }
    if (magnitude)
        *magnitude = std::move(mag);
    return g;
}

/// int_alpha^inf v^(b-1) e^-v dv = Gamma(b, alpha) for integer b >= -1.
inline double tail_integral(int b, double alpha)
{
    if (!(alpha > 0))
        throw DomainError("tail_integral: alpha must be positive");
    if (b < -1)
        throw DomainError("tail_integral: exponent b - 1 below -2 is unsupported");
    const auto g = upper_gamma_table<long double>(b, static_cast<long double>(alpha));
    return static_cast<double>(g.back());
}

} // namespace corzf
