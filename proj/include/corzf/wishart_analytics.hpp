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
#include "corzf/special_functions.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace corzf
{

/// Largest antenna count for which the closed forms are validated. The
/// binomial expansions cancel catastrophically as M and alpha grow; the
/// precision ladder below is verified up to this size.
inline constexpr int kMaxAntennas = 8;

/// Relative accuracy demanded from every closed-form evaluation.
inline constexpr double kClosedFormTolerance = 1e-12;

/// Expectations over the eigenvalues of W = H H^H, H an M x M matrix of
/// i.i.d. CN(0, 1) entries:
///   d1 = E[sum l / (l + a)^2],  d2 = E[sum l^2 / (l + a)^2],
///   f  = E[(sum l / (l + a))^2].
struct WishartTerms
{
    double d1 = 0.0;
    double d2 = 0.0;
    double f = 0.0;
    double rel_error = 0.0; ///< first-order rounding bound of the worst term
    int digits = 0;         ///< decimal digits of the arithmetic that was used
};

namespace detail
{

template <class Real>
struct TermsWithBounds
{
    Real d1, d2, f;
    Real d1_err, d2_err, f_err;
};

// Coefficients of the Laguerre polynomial L_n(x) = sum_j (-1)^j C(n, j) x^j / j!.
template <class Real>
std::vector<std::vector<Real>> laguerre_coefficients(int count)
{
    std::vector<std::vector<Real>> c(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n)
    {
        auto &row = c[static_cast<std::size_t>(n)];
        row.resize(static_cast<std::size_t>(n + 1));
        Real binom = 1;
        Real fact = 1;
        for (int j = 0; j <= n; ++j)
        {
            if (j > 0)
            {
                binom = binom * Real(n - j + 1) / Real(j);
                fact *= j;
            }
            row[static_cast<std::size_t>(j)] = ((j % 2) ? -binom : binom) / fact;
        }
    }
    return c;
}

// int_0^inf l^n e^-l / (l + a)^p dl for n = 0..n_max and p in {1, 2}, through
// the substitution v = l + a:
//   e^a sum_s C(n, s) (-a)^(n - s) Gamma(s - p + 1, a).
template <class Real>
void shifted_moments(int n_max, int p, const Real &alpha, const std::vector<Real> &gamma,
                     const std::vector<Real> &gamma_mag, std::vector<Real> &value, std::vector<Real> &error)
{
    using std::abs;
    using std::exp;
    const Real eps = std::numeric_limits<Real>::epsilon();
    const Real ea = exp(alpha);
    value.assign(static_cast<std::size_t>(n_max + 1), Real(0));
    error.assign(static_cast<std::size_t>(n_max + 1), Real(0));
    for (int n = 0; n <= n_max; ++n)
    {
        Real sum = 0;
        Real mag = 0;
        Real binom = 1;
        for (int s = 0; s <= n; ++s)
        {
            if (s > 0)
                binom = binom * Real(n - s + 1) / Real(s);
            Real power = 1;
            for (int q = 0; q < n - s; ++q)
                power *= alpha;
            const Real signed_power = ((n - s) % 2) ? -power : power;
            const auto idx = static_cast<std::size_t>(s - p + 2);
            sum += binom * signed_power * gamma[idx];
            mag += binom * power * gamma_mag[idx];
        }
        value[static_cast<std::size_t>(n)] = ea * sum;
        error[static_cast<std::size_t>(n)] = eps * Real(n + 4) * ea * mag;
    }
}

template <class Real>
TermsWithBounds<Real> evaluate_terms(int M, const Real &alpha)
{
    using std::abs;
    const Real eps = std::numeric_limits<Real>::epsilon();
    const int n_max = 2 * M; // covers t + j + l <= 2 + 2 (M - 1)
    std::vector<Real> gmag;
    const auto gamma = upper_gamma_table<Real>(n_max, alpha, &gmag);

    std::vector<Real> I, I_err, J, J_err;
    shifted_moments<Real>(n_max, 2, alpha, gamma, gmag, I, I_err);
    shifted_moments<Real>(n_max - 1, 1, alpha, gamma, gmag, J, J_err);

    const auto c = laguerre_coefficients<Real>(M);
    const Real slack = eps * Real(4 * M * M);

    // Result 1: D^(t) = sum_i sum_j sum_l c_{i-1,j} c_{i-1,l} I_{t+j+l}.
    auto d_term = [&](int t, Real &err) {
        Real d = 0;
        Real e = 0;
        for (int i = 0; i < M; ++i)
        {
            const auto &ci = c[static_cast<std::size_t>(i)];
            for (int j = 0; j <= i; ++j)
                for (int l = 0; l <= i; ++l)
                {
                    const auto n = static_cast<std::size_t>(t + j + l);
                    const Real w = ci[static_cast<std::size_t>(j)] * ci[static_cast<std::size_t>(l)];
                    d += w * I[n];
                    e += abs(w) * (I_err[n] + slack * abs(I[n]));
                }
        }
        err = e;
        return d;
    };

    TermsWithBounds<Real> out{};
    out.d1 = d_term(1, out.d1_err);
    out.d2 = d_term(2, out.d2_err);

    // Result 2: F = D^(2) + sum_{i != j} (G_ii G_jj - G_ij^2) where
    // G_ij = int l / (l + a) e^-l L_{i-1}(l) L_{j-1}(l) dl
    //      = sum_r sum_s c_{i-1,r} c_{j-1,s} J_{1+r+s}.
    std::vector<Real> G(static_cast<std::size_t>(M * M)), G_err(static_cast<std::size_t>(M * M));
    for (int i = 0; i < M; ++i)
        for (int j = i; j < M; ++j)
        {
            const auto &ci = c[static_cast<std::size_t>(i)];
            const auto &cj = c[static_cast<std::size_t>(j)];
            Real g = 0;
            Real e = 0;
            for (int r = 0; r <= i; ++r)
                for (int s = 0; s <= j; ++s)
                {
                    const auto n = static_cast<std::size_t>(1 + r + s);
                    const Real w = ci[static_cast<std::size_t>(r)] * cj[static_cast<std::size_t>(s)];
                    g += w * J[n];
                    e += abs(w) * (J_err[n] + slack * abs(J[n]));
                }
            G[static_cast<std::size_t>(i * M + j)] = G[static_cast<std::size_t>(j * M + i)] = g;
            G_err[static_cast<std::size_t>(i * M + j)] = G_err[static_cast<std::size_t>(j * M + i)] = e;
        }

    Real cross = 0;
    Real cross_err = 0;
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
        {
            if (i == j)
                continue;
            const auto ii = static_cast<std::size_t>(i * M + i);
            const auto jj = static_cast<std::size_t>(j * M + j);
            const auto ij = static_cast<std::size_t>(i * M + j);
            cross += G[ii] * G[jj] - G[ij] * G[ij];
            cross_err += abs(G[jj]) * G_err[ii] + abs(G[ii]) * G_err[jj] + 2 * abs(G[ij]) * G_err[ij] +
                         4 * eps * (abs(G[ii] * G[jj]) + G[ij] * G[ij]);
        }
    out.f = out.d2 + cross;
    out.f_err = out.d2_err + cross_err;
    return out;
}

template <class Real>
WishartTerms evaluate_with(int M, double alpha)
{
    const auto t = evaluate_terms<Real>(M, Real(alpha));
    WishartTerms w;
    w.d1 = static_cast<double>(t.d1);
    w.d2 = static_cast<double>(t.d2);
    w.f = static_cast<double>(t.f);
    auto rel = [](const Real &err, const Real &val) {
        using std::abs;
        return static_cast<double>(err / abs(val));
    };
    w.rel_error = std::max({rel(t.d1_err, t.d1), rel(t.d2_err, t.d2), rel(t.f_err, t.f)});
    w.digits = std::numeric_limits<Real>::digits10;
    return w;
}

} // namespace detail

/// D^(1), D^(2) and F for a square M x M complex Wishart matrix.
///
/// Evaluates the binomial / tail-integral closed forms in long double first
/// and escalates to 50 and then 100 decimal digits whenever the rounding
/// bound exceeds `tolerance`. Throws PrecisionError if even 100 digits do not
/// suffice, or if M is outside [1, kMaxAntennas].
inline WishartTerms wishart_terms(int M, double alpha, double tolerance = kClosedFormTolerance)
{
    if (!(alpha > 0) || !std::isfinite(alpha))
        throw DomainError("wishart_terms: alpha must be positive and finite");
    if (M < 1)
        throw DomainError("wishart_terms: M must be >= 1");
    if (M > kMaxAntennas)
        throw PrecisionError("wishart_terms: M = " + std::to_string(M) + " exceeds the validated precision range M <= " +
                             std::to_string(kMaxAntennas));

    using boost::multiprecision::cpp_bin_float_100;
    using boost::multiprecision::cpp_bin_float_50;

    auto w = detail::evaluate_with<long double>(M, alpha);
    if (w.rel_error <= tolerance)
        return w;
    w = detail::evaluate_with<cpp_bin_float_50>(M, alpha);
    if (w.rel_error <= tolerance)
        return w;
    w = detail::evaluate_with<cpp_bin_float_100>(M, alpha);
    if (w.rel_error <= tolerance)
        return w;
    throw PrecisionError("wishart_terms: cancellation at M = " + std::to_string(M) + ", alpha = " +
                         std::to_string(alpha) + " exceeds 100-digit arithmetic (estimated relative error " +
                         std::to_string(w.rel_error) + ")");
}

/// E[sum l^t / (l + alpha)^2], t in {1, 2}.
inline double d_term(int M, int t, double alpha)
{
    if (t != 1 && t != 2)
        throw DomainError("d_term: t must be 1 or 2");
    const auto w = wishart_terms(M, alpha);
    return t == 1 ? w.d1 : w.d2;
}

/// E[(sum l / (l + alpha))^2].
inline double f_term(int M, double alpha) { return wishart_terms(M, alpha).f; }

/// Cached expectation terms for one (M, alpha) pair, square case KL = M.
struct AnalyticsContext
{
    int M = 0;
    double alpha = 0.0;
    double D1 = 0.0;
    double D2 = 0.0;
    double F = 0.0;
    double delta = 0.0;     ///< expected desired-signal gain E|h_l w_l|^2
    double gamma_bar = 0.0; ///< expected normalization E[gamma]
    double xi = 0.0;        ///< expected total received power per row
    double psi = 0.0;       ///< expected power from one interfering column
    double Delta = 0.0;     ///< residual-interference coefficient for bit allocation
};

inline AnalyticsContext build_context(int M, double alpha)
{
    const auto w = wishart_terms(M, alpha);
    AnalyticsContext ctx;
    ctx.M = M;
    ctx.alpha = alpha;
    ctx.D1 = w.d1;
    ctx.D2 = w.d2;
    ctx.F = w.f;
    const double m = M;
    ctx.delta = (w.f + w.d2) / (m * (m + 1.0));
    ctx.gamma_bar = w.d1 / m;
    ctx.xi = w.d2 / m;
    if (M > 1)
    {
        const double rho = ctx.xi - ctx.delta;
        ctx.psi = rho / (m - 1.0);
        ctx.Delta = rho / (ctx.gamma_bar * (m - 1.0));
    }
    return ctx;
}

/// Thread-safe memo of contexts keyed on the exact (M, alpha) bit pattern.
class ContextCache
{
  public:
    explicit ContextCache(std::size_t capacity = 1u << 20) : capacity_(capacity) {}

    AnalyticsContext get(int M, double alpha)
    {
        const Key key{M, bits_of(alpha)};
        {
            std::shared_lock lock(mutex_);
            if (auto it = map_.find(key); it != map_.end())
                return it->second;
        }
        auto ctx = build_context(M, alpha);
        std::unique_lock lock(mutex_);
        if (map_.size() >= capacity_)
            map_.clear();
        map_.emplace(key, ctx);
        return ctx;
    }

    std::size_t size() const
    {
        std::shared_lock lock(mutex_);
        return map_.size();
    }

  private:
    struct Key
    {
        int M;
        std::uint64_t alpha_bits;
        bool operator==(const Key &) const = default;
    };
    struct KeyHash
    {
        std::size_t operator()(const Key &k) const noexcept
        {
            return std::hash<std::uint64_t>{}(k.alpha_bits * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(k.M));
        }
    };
    static std::uint64_t bits_of(double x)
    {
        std::uint64_t b;
        std::memcpy(&b, &x, sizeof b);
        return b;
    }

    std::size_t capacity_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<Key, AnalyticsContext, KeyHash> map_;
};

/// Large-scale powers seen by one user (noise normalized to 1).
struct LinkBudget
{
    double P_serving = 0.0;
    std::vector<double> P_interf;   ///< coordinated interfering BSs, K - 1 entries
    std::vector<double> P_noncoord; ///< non-coordinated BSs, C entries
    int L = 1;
    int K = 1;
    int C = 0;
};

/// The four parts of an expected-SINR approximation.
struct SinrTerms
{
    double signal = 0.0;
    double intra = 0.0;       ///< same-cell users
    double coordinated = 0.0; ///< coordinated cells
    double noncoord = 0.0;    ///< non-coordinated cells
    double value() const { return signal / (1.0 + intra + coordinated + noncoord); }
};

namespace detail
{
inline void check_budget(std::span<const AnalyticsContext> ctx, const LinkBudget &b)
{
    if (b.K < 1 || b.L < 1 || b.C < 0)
        throw ConfigError("link budget: K, L >= 1 and C >= 0 required");
    if (static_cast<int>(b.P_interf.size()) != b.K - 1 || static_cast<int>(b.P_noncoord.size()) != b.C)
        throw ConfigError("link budget: expected K - 1 coordinated and C non-coordinated powers");
    if (static_cast<int>(ctx.size()) != b.K)
        throw ConfigError("expected SINR: one analytics context per coordinated cell required");
    for (const auto &c : ctx)
        if (c.M != b.K * b.L)
            throw ConfigError("expected SINR: closed forms require K * L == M (got K*L = " +
                              std::to_string(b.K * b.L) + ", M = " + std::to_string(c.M) + ")");
    if (b.P_serving < 0)
        throw DomainError("link budget: negative power");
    for (double p : b.P_interf)
        if (p < 0)
            throw DomainError("link budget: negative power");
    for (double p : b.P_noncoord)
        if (p < 0)
            throw DomainError("link budget: negative power");
}

// Each non-coordinated BS contributes P_c * L: its L unit-mean columns are
// independent of the victim's channel.
inline double noncoord_term(const LinkBudget &b)
{
    double s = 0.0;
    for (double p : b.P_noncoord)
        s += p * b.L;
    return s;
}
} // namespace detail

/// Perfect-CDI expected SINR. `ctx[0]` is the serving cell, `ctx[1..]` the
/// coordinated interferers in the order of `budget.P_interf`.
inline SinrTerms expected_sinr_perfect_terms(std::span<const AnalyticsContext> ctx, const LinkBudget &budget)
{
    detail::check_budget(ctx, budget);
    const auto &own = ctx[0];
    SinrTerms t;
    t.signal = budget.P_serving / own.gamma_bar * own.delta;
    t.intra = (budget.L - 1) * budget.P_serving / own.gamma_bar * own.psi;
    for (std::size_t j = 0; j < budget.P_interf.size(); ++j)
        t.coordinated += budget.L * budget.P_interf[j] / ctx[j + 1].gamma_bar * ctx[j + 1].psi;
    t.noncoord = detail::noncoord_term(budget);
    return t;
}

inline double expected_sinr_perfect(std::span<const AnalyticsContext> ctx, const LinkBudget &budget)
{
    return expected_sinr_perfect_terms(ctx, budget).value();
}

/// Same-alpha convenience overload: every coordinated cell shares `ctx`.
inline double expected_sinr_perfect(const AnalyticsContext &ctx, const LinkBudget &budget)
{
    std::vector<AnalyticsContext> all(static_cast<std::size_t>(budget.K), ctx);
    return expected_sinr_perfect(all, budget);
}

/// Modeled RVQ error variance 2^(-B / (M - 1)); B may be +infinity.
inline double rvq_error_variance(double bits, int M)
{
    if (bits < 0)
        throw DomainError("rvq_error_variance: negative bit count");
    if (M < 2)
        throw DomainError("rvq_error_variance: M >= 2 required");
    if (std::isinf(bits))
        return 0.0;
    return std::exp2(-bits / (M - 1));
}

/// Per-interferer expected interference under RVQ feedback with B bits.
inline double rvq_psi(const AnalyticsContext &ctx, double bits)
{
    const double s2 = rvq_error_variance(bits, ctx.M);
    const double psi_tilde = ctx.gamma_bar * ctx.M * s2 + (1.0 - s2) * ctx.xi - (1.0 - s2) * ctx.delta - s2 * ctx.gamma_bar;
    return psi_tilde / (ctx.M - 1);
}

/// RVQ expected SINR. `bits[0]` quantizes the serving link, `bits[j]` the
/// link to the j-th coordinated interferer (same order as the contexts).
inline SinrTerms expected_sinr_rvq_terms(std::span<const AnalyticsContext> ctx, const LinkBudget &budget,
                                         std::span<const double> bits)
{
    detail::check_budget(ctx, budget);
    if (static_cast<int>(bits.size()) != budget.K)
        throw ConfigError("expected_sinr_rvq: one bit count per coordinated BS required");
    const auto &own = ctx[0];
    const double s2 = rvq_error_variance(bits[0], own.M);
    SinrTerms t;
    t.signal = budget.P_serving / own.gamma_bar * ((1.0 - s2) * own.delta + s2 * own.gamma_bar);
    t.intra = (budget.L - 1) * budget.P_serving / own.gamma_bar * rvq_psi(own, bits[0]);
    for (std::size_t j = 0; j < budget.P_interf.size(); ++j)
        t.coordinated += budget.L * budget.P_interf[j] / ctx[j + 1].gamma_bar * rvq_psi(ctx[j + 1], bits[j + 1]);
    t.noncoord = detail::noncoord_term(budget);
    return t;
}

inline double expected_sinr_rvq(std::span<const AnalyticsContext> ctx, const LinkBudget &budget,
                                std::span<const double> bits)
{
    return expected_sinr_rvq_terms(ctx, budget, bits).value();
}

/// L log2(1 + E[SINR]) in bits/s/Hz.
inline double expected_cell_edge_se(double expected_sinr, int L)
{
    if (!(expected_sinr >= 0))
        throw DomainError("expected_cell_edge_se: SINR must be non-negative");
    return L * std::log2(1.0 + expected_sinr);
}

} // namespace corzf
