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
#include "corzf/wishart_analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace corzf
{

/// Weights of the modeled residual interference
///   sum_i w_i 2^(-B_i / (M - 1)) + P_I,
/// index 0 is the serving link, 1..K-1 the coordinated interferers.
struct AllocationInput
{
    int B_total = 0;
    int M = 2;
    std::vector<double> weights;
    double P_I = 0.0;

    int K() const { return static_cast<int>(weights.size()); }

    void validate() const
    {
        if (B_total < 0)
            throw ConfigError("allocation: B_total must be >= 0");
        if (M < 2)
            throw ConfigError("allocation: M >= 2 required");
        if (weights.empty())
            throw ConfigError("allocation: at least one link required");
        for (double w : weights)
            if (!(w >= 0) || !std::isfinite(w))
                throw DomainError("allocation: weights must be finite and non-negative");
    }
};

struct Allocation
{
    std::vector<int> bits;
    double objective = 0.0;

    int total() const { return std::accumulate(bits.begin(), bits.end(), 0); }
};

enum class Rounding
{
    floor_repair,
    nearest_repair,
};

/// Weights for user (l, k): the serving link carries (L - 1) intra-cell
/// interferers, each cross link L. `P_interf[j]` pairs with `ctx_interf[j]`.
inline AllocationInput make_allocation_input(double P_serving, std::span<const double> P_interf,
                                             const AnalyticsContext &ctx_own,
                                             std::span<const AnalyticsContext> ctx_interf, int L, int B_total)
{
    if (P_interf.size() != ctx_interf.size())
        throw ConfigError("allocation: one context per interfering BS required");
    AllocationInput in;
    in.B_total = B_total;
    in.M = ctx_own.M;
    in.weights.push_back(P_serving * (L - 1) * (1.0 - ctx_own.Delta));
    for (std::size_t j = 0; j < P_interf.size(); ++j)
        in.weights.push_back(P_interf[j] * L * (1.0 - ctx_interf[j].Delta));
    return in;
}

template <class Bits>
double model_objective(const AllocationInput &in, const Bits &bits)
{
    double s = in.P_I;
    for (std::size_t i = 0; i < in.weights.size(); ++i)
        s += in.weights[i] * std::exp2(-static_cast<double>(bits[i]) / (in.M - 1));
    return s;
}

/// Unclamped Lagrangian solution
///   B_i = B_total / K' + (M - 1) (log2 w_i - mean_j log2 w_j)
/// over the K' links with non-negligible weight; the rest get 0. With every
/// weight zero the budget is split evenly.
inline std::vector<double> adaptive_bits_real(const AllocationInput &in)
{
    in.validate();
    const int K = in.K();
    const double wmax = *std::max_element(in.weights.begin(), in.weights.end());
    std::vector<double> out(static_cast<std::size_t>(K), 0.0);
    std::vector<int> active;
    for (int i = 0; i < K; ++i)
        if (in.weights[static_cast<std::size_t>(i)] > 1e-12 * wmax)
            active.push_back(i);
    if (active.empty())
    {
        std::fill(out.begin(), out.end(), static_cast<double>(in.B_total) / K);
        return out;
    }
    double mean_log = 0.0;
    for (int i : active)
        mean_log += std::log2(in.weights[static_cast<std::size_t>(i)]);
    mean_log /= static_cast<double>(active.size());
    const double share = static_cast<double>(in.B_total) / static_cast<double>(active.size());
    for (int i : active)
        out[static_cast<std::size_t>(i)] = share + (in.M - 1) * (std::log2(in.weights[static_cast<std::size_t>(i)]) - mean_log);
    return out;
}

namespace detail
{
inline double marginal_gain(const AllocationInput &in, int i, int b)
{
    const double w = in.weights[static_cast<std::size_t>(i)];
    return w * (std::exp2(-static_cast<double>(b) / (in.M - 1)) - std::exp2(-static_cast<double>(b + 1) / (in.M - 1)));
}
} // namespace detail

/// Clamp to [0, B_total] after floor (or nearest) rounding, then repair
/// greedily: add bits where the modeled objective drops most while budget is
/// left, remove bits where it rises least while over budget.
inline Allocation integerize(std::span<const double> real_bits, const AllocationInput &in,
                             Rounding rounding = Rounding::floor_repair)
{
    in.validate();
    if (static_cast<int>(real_bits.size()) != in.K())
        throw ConfigError("integerize: bit vector length differs from link count");
    const int K = in.K();
    Allocation a;
    a.bits.resize(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i)
    {
        const double r = real_bits[static_cast<std::size_t>(i)];
        const double v = rounding == Rounding::floor_repair ? std::floor(r + 1e-9) : std::round(r);
        a.bits[static_cast<std::size_t>(i)] = static_cast<int>(std::clamp(v, 0.0, static_cast<double>(in.B_total)));
    }
    int total = a.total();
    while (total < in.B_total)
    {
        int best = 0;
        double best_g = -1.0;
        for (int i = 0; i < K; ++i)
        {
            const double g = detail::marginal_gain(in, i, a.bits[static_cast<std::size_t>(i)]);
            if (g > best_g)
                best_g = g, best = i;
        }
        ++a.bits[static_cast<std::size_t>(best)];
        ++total;
    }
    while (total > in.B_total)
    {
        int best = -1;
        double best_c = 0.0;
        for (int i = 0; i < K; ++i)
        {
            const int b = a.bits[static_cast<std::size_t>(i)];
            if (b == 0)
                continue;
            const double c = detail::marginal_gain(in, i, b - 1);
            if (best < 0 || c < best_c)
                best_c = c, best = i;
        }
        --a.bits[static_cast<std::size_t>(best)];
        --total;
    }
    a.objective = model_objective(in, a.bits);
    return a;
}

/// Closed-form allocation followed by integerization.
inline Allocation adaptive_bits(const AllocationInput &in, Rounding rounding = Rounding::floor_repair)
{
    const auto r = adaptive_bits_real(in);
    return integerize(r, in, rounding);
}

/// floor(B_total / K) per link, remainder one bit each from the serving link on.
inline Allocation uniform_bits(int B_total, int K)
{
    if (B_total < 0 || K < 1)
        throw ConfigError("uniform_bits: need B_total >= 0 and K >= 1");
    Allocation a;
    a.bits.assign(static_cast<std::size_t>(K), B_total / K);
    for (int i = 0; i < B_total % K; ++i)
        ++a.bits[static_cast<std::size_t>(i)];
    return a;
}

inline Allocation uniform_bits(const AllocationInput &in)
{
    auto a = uniform_bits(in.B_total, in.K());
    a.objective = model_objective(in, a.bits);
    return a;
}

inline constexpr int kExhaustiveMaxBits = 16;
inline constexpr int kExhaustiveMaxLinks = 3;

/// Visits every non-negative integer split of at most B_total bits over K
/// links, in lexicographic order.
template <class F>
void for_each_split(int K, int B_total, F &&visit)
{
    if (K < 1 || K > kExhaustiveMaxLinks || B_total < 0 || B_total > kExhaustiveMaxBits)
        throw ConfigError("exhaustive allocation: enumeration limited to K <= " + std::to_string(kExhaustiveMaxLinks) +
                          " and B_total <= " + std::to_string(kExhaustiveMaxBits));
    std::vector<int> b(static_cast<std::size_t>(K), 0);
    auto rec = [&](auto &&self, int i, int left) -> void {
        if (i == K)
        {
            visit(std::as_const(b));
            return;
        }
        for (int v = 0; v <= left; ++v)
        {
            b[static_cast<std::size_t>(i)] = v;
            self(self, i + 1, left - v);
        }
    };
    rec(rec, 0, B_total);
}

/// Exact optimum of `score` (minimized, or maximized when `maximize`); the
/// first optimum in enumeration order wins ties.
template <class F>
Allocation exhaustive_bits(int K, int B_total, F &&score, bool maximize)
{
    Allocation best;
    bool have = false;
    for_each_split(K, B_total, [&](const std::vector<int> &b) {
        const double v = score(b);
        if (!have || (maximize ? v > best.objective : v < best.objective))
        {
            best.bits = b;
            best.objective = v;
            have = true;
        }
    });
    return best;
}

/// Exhaustive minimizer of the modeled residual interference.
inline Allocation exhaustive_model_bits(const AllocationInput &in)
{
    in.validate();
    return exhaustive_bits(in.K(), in.B_total, [&](const std::vector<int> &b) { return model_objective(in, b); }, false);
}

} // namespace corzf
