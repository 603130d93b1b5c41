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

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace corzf
{

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based stream derivation: every random quantity in a Monte Carlo run
// is a pure function of (seed, ids...), independent of execution order.
inline std::uint64_t stream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> ids)
{
    std::uint64_t h = splitmix64(seed);
    for (auto id : ids)
        h = splitmix64(h ^ splitmix64(id + 0x632be59bd9b4e019ULL));
    return h;
}

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> ids = {})
{
    return Rng(stream_seed(seed, ids));
}

/// Circularly-symmetric complex normal sampler, CN(0, variance).
class ComplexNormal
{
  public:
    explicit ComplexNormal(double variance = 1.0) : dist_(0.0, std::sqrt(variance / 2.0)) {}

    cdouble operator()(Rng &rng)
    {
        const double re = dist_(rng);
        const double im = dist_(rng);
        return {re, im};
    }

    CVector row(Rng &rng, Eigen::Index n)
    {
        CVector v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v(i) = (*this)(rng);
        return v;
    }

    CMatrix matrix(Rng &rng, Eigen::Index rows, Eigen::Index cols)
    {
        CMatrix m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c)
                m(r, c) = (*this)(rng);
        return m;
    }

  private:
    std::normal_distribution<double> dist_;
};

} // namespace corzf
