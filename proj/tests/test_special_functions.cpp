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

#include <corzf/oracles.hpp>
#include <corzf/special_functions.hpp>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace corzf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("tail integral with unit exponent is exp(-alpha)", "[special_functions]")
{
    for (double a : {1e-3, 0.1, 1.0, 7.5, 40.0})
        CHECK_THAT(tail_integral(1, a), WithinRel(std::exp(-a), 1e-14));
}

TEST_CASE("tail integral at b = 0 is E1", "[special_functions]")
{
    CHECK_THAT(tail_integral(0, 1.0), WithinAbs(0.219383934395520, 1e-14));
    CHECK_THAT(tail_integral(0, 1.0), WithinRel(quadrature::upper_gamma(0, 1.0), 1e-12));
    // both branches of the E1 evaluation
    for (double a : {0.01, 0.5, 0.999, 1.001, 3.0, 25.0})
        CHECK_THAT(tail_integral(0, a), WithinRel(quadrature::upper_gamma(0, a), 1e-12));
}

TEST_CASE("tail integral recurrence matches quadrature", "[special_functions]")
{
    const double g3 = (2.0 + 2.0 * 0.5 + 0.25) * std::exp(-0.5);
    CHECK_THAT(tail_integral(3, 0.5), WithinRel(g3, 1e-14));
    CHECK_THAT(tail_integral(3, 0.5), WithinRel(quadrature::upper_gamma(3, 0.5), 1e-12));
    for (int b = -1; b <= 12; ++b)
        for (double a : {0.01, 0.1, 1.0, 10.0})
            CHECK_THAT(tail_integral(b, a), WithinRel(quadrature::upper_gamma(b, a), 1e-12));
}

TEST_CASE("tail integral at b = -1", "[special_functions]")
{
    for (double a : {0.2, 1.0, 4.0})
        CHECK_THAT(tail_integral(-1, a), WithinRel(std::exp(-a) / a - tail_integral(0, a), 1e-13));
}

TEST_CASE("tail integral rejects invalid arguments", "[special_functions]")
{
    CHECK_THROWS_AS(tail_integral(1, 0.0), DomainError);
    CHECK_THROWS_AS(tail_integral(1, -1.0), DomainError);
    CHECK_THROWS_AS(tail_integral(-2, 1.0), DomainError);
}

TEST_CASE("high precision table agrees with long double", "[special_functions]")
{
    using boost::multiprecision::cpp_bin_float_50;
    const auto lo = upper_gamma_table<long double>(10, 0.3L);
    const auto hi = upper_gamma_table<cpp_bin_float_50>(10, cpp_bin_float_50("0.3"));
    for (std::size_t i = 0; i < lo.size(); ++i)
        CHECK_THAT(static_cast<double>(lo[i]), WithinRel(static_cast<double>(hi[i]), 1e-15));
}
