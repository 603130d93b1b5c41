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

#include "corzf/bit_allocation.hpp"
#include "corzf/cellular_model.hpp"
#include "corzf/common.hpp"
#include "corzf/precoding.hpp"
#include "corzf/rng.hpp"
#include "corzf/rvq_feedback.hpp"
#include "corzf/wishart_analytics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

namespace corzf
{

enum class Scheme
{
    coord_rzf,
    coord_zf,
    noncoord_rzf,
    single_cell, ///< each cell alone, no inter-cell interference
};

enum class Feedback
{
    perfect,
    rvq_exact,
    rvq_model,
};

enum class BitScheme
{
    fixed,      ///< per_link bits on every fed-back link
    adaptive,   ///< closed-form allocation with RZF residual-interference weights
    adaptive_zf, ///< same rule in the zero-forcing limit (Delta = 0)
    uniform,
    exhaustive_inst_se,  ///< per user, maximize own instantaneous SE
    exhaustive_inst_int, ///< per user, minimize own instantaneous interference
};

enum class CodebookMode
{
    per_user, ///< fresh codebook per user, link and trial
    fixed,    ///< one codebook per size shared by everyone
};

struct BitConfig
{
    BitScheme scheme = BitScheme::fixed;
    int per_link = 0;
    int total = 0;
    Rounding rounding = Rounding::floor_repair;
};

struct SeriesConfig
{
    std::string label;
    Scheme scheme = Scheme::coord_rzf;
    RegStrategy reg;
    Feedback feedback = Feedback::perfect;
    BitConfig bits;
    bool overlay = false;
    int K = 0;  ///< 0: inherit
    int C = -1; ///< -1: inherit
};

struct ExperimentConfig
{
    std::string name = "experiment";
    std::string layout = "two_cell";
    int K = 2;
    int L = 2;
    int M = 4;
    int C = 0;
    double radius_m = 500.0;
    double annulus_min_m = 325.0;
    double annulus_max_m = 500.0;
    double wedge_deg = 360.0;
    double full_cell_min_m = 35.0;
    Region user_region = Region::annulus;
    double pathloss_exponent = 3.8;
    double shadowing_db = 8.0;
    ShadowingKind shadowing_kind = ShadowingKind::real_normal;
    int sectors = 1;
    CodebookMode codebook = CodebookMode::per_user;
    std::vector<double> rho0_db = {0.0};
    std::uint64_t trials = 20000;
    std::uint64_t seed = 1;
    std::vector<SeriesConfig> series;

    int K_of(const SeriesConfig &s) const { return s.K > 0 ? s.K : K; }
    int C_of(const SeriesConfig &s) const { return s.C >= 0 ? s.C : C; }

    CellLayout make_cell_layout(int k, int c) const
    {
        auto lay = make_layout(layout, k, c, radius_m);
        lay.d_min = annulus_min_m;
        lay.d_max = annulus_max_m;
        lay.wedge_deg = wedge_deg;
        lay.full_cell_min = full_cell_min_m;
        lay.validate();
        return lay;
    }

    PowerModel power_model(double P0 = 1.0) const
    {
        PowerModel pm;
        pm.P0 = P0;
        pm.R = radius_m;
        pm.a = pathloss_exponent;
        pm.sigma_sf = shadowing_db;
        pm.shadowing_enabled = shadowing_db > 0;
        pm.shadowing = shadowing_kind;
        pm.validate();
        return pm;
    }

    void validate() const;
};

namespace detail
{
inline bool is_coordinated(Scheme s) { return s == Scheme::coord_rzf || s == Scheme::coord_zf; }
inline bool is_exhaustive(BitScheme b)
{
    return b == BitScheme::exhaustive_inst_se || b == BitScheme::exhaustive_inst_int;
}
inline bool needs_contexts(BitScheme b) { return b == BitScheme::adaptive; }
} // namespace detail

inline void ExperimentConfig::validate() const
{
    auto fail = [](const std::string &field, const std::string &msg) { throw ConfigError(field + ": " + msg); };
    if (L < 1)
        fail("L", "must be >= 1");
    if (M < 1)
        fail("M", "must be >= 1");
    if (trials < 1)
        fail("trials", "must be >= 1 (zero trials give no estimate)");
    if (rho0_db.empty())
        fail("rho0_db", "at least one point required");
    for (double r : rho0_db)
        if (!std::isfinite(r))
            fail("rho0_db", "must be finite");
    if (sectors != 1 && sectors != 3)
        fail("sectors", "must be 1 or 3");
    if (series.empty())
        fail("series", "at least one series required");
    power_model();
    for (std::size_t i = 0; i < series.size(); ++i)
    {
        const auto &s = series[i];
        const std::string f = "series[" + std::to_string(i) + "]";
        if (s.label.empty())
            fail(f + ".label", "must be non-empty");
        for (std::size_t j = 0; j < i; ++j)
            if (series[j].label == s.label)
                fail(f + ".label", "duplicate label '" + s.label + "'");
        const int k = K_of(s), c = C_of(s);
        if (k < 1)
            fail(f + ".K", "must be >= 1");
        make_cell_layout(k, c);
        const int rows = detail::is_coordinated(s.scheme) ? k * L : L;
        if (rows > M)
            fail(f + ".K", "K * L = " + std::to_string(k * L) + " exceeds M = " + std::to_string(M));
        if (s.reg.kind == RegKind::fixed && !(s.reg.fixed_alpha > 0))
            fail(f + ".reg.alpha", "must be positive");
        if (s.reg.kind == RegKind::grid_opt)
        {
            if (s.scheme == Scheme::coord_zf)
                fail(f + ".reg", "grid_opt needs an RZF scheme");
            log_grid(s.reg.grid_min, s.reg.grid_max, s.reg.grid_points);
        }
        const auto &b = s.bits;
        if (s.feedback == Feedback::perfect)
        {
            if (b.scheme != BitScheme::fixed)
                fail(f + ".bits.scheme", "bit allocation needs RVQ feedback");
        }
        else
        {
            if (M < 2)
                fail(f + ".feedback", "RVQ requires M >= 2");
            if (b.scheme == BitScheme::fixed)
            {
                if (b.per_link < 0)
                    fail(f + ".bits.per_link", "must be >= 0");
                if (s.feedback == Feedback::rvq_exact && b.per_link > kExactMaxBits)
                    fail(f + ".bits.per_link", "exact search limited to " + std::to_string(kExactMaxBits) + " bits");
            }
            else
            {
                if (!detail::is_coordinated(s.scheme))
                    fail(f + ".bits.scheme", "allocation across links needs a coordinated scheme");
                if (b.total < 0)
                    fail(f + ".bits.total", "must be >= 0");
                if (s.feedback == Feedback::rvq_exact && b.total > kExactMaxBits)
                    fail(f + ".bits.total", "exact search limited to " + std::to_string(kExactMaxBits) + " bits");
                if (detail::needs_contexts(b.scheme) && (k * L != M || M > kMaxAntennas))
                    fail(f + ".bits.scheme", "adaptive allocation needs K * L == M <= " + std::to_string(kMaxAntennas));
                if (detail::is_exhaustive(b.scheme) && (k > kExhaustiveMaxLinks || b.total > kExhaustiveMaxBits))
                    fail(f + ".bits", "exhaustive search limited to K <= 3 and total <= 16");
            }
        }
        if (s.overlay)
        {
            if (s.scheme != Scheme::coord_rzf)
                fail(f + ".overlay", "closed forms cover coordinated RZF only");
            if (k * L != M)
                fail(f + ".overlay", "closed forms require K * L == M");
            if (M > kMaxAntennas)
                fail(f + ".overlay", "closed forms validated for M <= " + std::to_string(kMaxAntennas));
            if (s.reg.kind == RegKind::grid_opt)
                fail(f + ".overlay", "no closed form for grid-optimized alpha");
            if (detail::is_exhaustive(b.scheme))
                fail(f + ".overlay", "no closed form for instantaneous allocation");
            if (M < 2 && s.feedback != Feedback::perfect)
                fail(f + ".overlay", "RVQ closed form requires M >= 2");
        }
    }
}

/// Instantaneous outcome of one series on one drop at one rho0.
struct TrialResult
{
    std::vector<double> sinr;      ///< per coordinated user, u = k * L + l
    std::vector<double> cell_rate; ///< sum_l log2(1 + SINR) per cell
    std::vector<std::vector<int>> bits; ///< per user, in BS order
    std::vector<double> alpha;     ///< per coordinated BS
    std::vector<double> interference; ///< per user, intra + coordinated
    std::vector<double> signal;    ///< per user
    int self_check_failures = 0;

    double mean_sinr() const
    {
        double s = 0;
        for (double v : sinr)
            s += v;
        return s / static_cast<double>(sinr.size());
    }
    double mean_cell_se() const
    {
        double s = 0;
        for (double v : cell_rate)
            s += v;
        return s / static_cast<double>(cell_rate.size());
    }
};

inline constexpr std::uint64_t kStreamGeometry = 1;
inline constexpr std::uint64_t kStreamFeedback = 2;
inline constexpr std::uint64_t kStreamCodebook = 3;

/// One drop plus memoized feedback, shared by every series and rho0 point of
/// a trial that uses the same (K, C).
class TrialState
{
  public:
    TrialState(const ExperimentConfig &cfg, std::uint64_t trial, int K, int C)
        : cfg_(cfg), trial_(trial)
    {
        auto rng = make_rng(cfg.seed, {trial, kStreamGeometry, static_cast<std::uint64_t>(K), static_cast<std::uint64_t>(C)});
        real_ = draw_realization(cfg.make_cell_layout(K, C), cfg.power_model(), cfg.L, cfg.M, rng, cfg.sectors,
                                 cfg.user_region);
    }

    NetworkRealization &realization() { return real_; }
    std::uint64_t trial() const { return trial_; }

    /// Row fed back by user u for its link to BS j with B bits.
    const CVector &feedback_row(Feedback fb, int u, int j, int B)
    {
        const int l = u % real_.L, k = u / real_.L;
        if (fb == Feedback::perfect)
            return real_.channel(l, k, j);
        const std::uint64_t key = ((static_cast<std::uint64_t>(u) * 64 + static_cast<std::uint64_t>(j)) * 64 +
                                   static_cast<std::uint64_t>(B)) * 2 + (fb == Feedback::rvq_exact ? 1 : 0);
        if (auto it = cache_.find(key); it != cache_.end())
            return it->second.row;
        const CVector &h = real_.channel(l, k, j);
        QuantizedChannel q;
        if (fb == Feedback::rvq_model)
        {
            auto rng = make_rng(cfg_.seed, {trial_, kStreamFeedback, static_cast<std::uint64_t>(u), static_cast<std::uint64_t>(j)});
            q = model_quantize(h, B, rng);
        }
        else
        {
            auto rng = cfg_.codebook == CodebookMode::fixed
                           ? make_rng(cfg_.seed, {kStreamCodebook, static_cast<std::uint64_t>(B)})
                           : make_rng(cfg_.seed, {trial_, kStreamCodebook, static_cast<std::uint64_t>(u),
                                                  static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(B)});
            q = quantize_cdi(h, generate_codebook(B, real_.M, rng));
        }
        return cache_.emplace(key, std::move(q)).first->second.row;
    }

  private:
    const ExperimentConfig &cfg_;
    std::uint64_t trial_;
    NetworkRealization real_;
    std::unordered_map<std::uint64_t, QuantizedChannel> cache_;
};

namespace detail
{

struct BsPrecoder
{
    CMatrix Wn; ///< normalized columns of the BS's own users, M x L
};

// Links of user u in allocation order: serving BS first, then the other
// coordinated BSs ascending.
inline std::vector<int> link_order(int k, int K)
{
    std::vector<int> o{k};
    for (int j = 0; j < K; ++j)
        if (j != k)
            o.push_back(j);
    return o;
}

class SeriesEvaluator
{
  public:
    SeriesEvaluator(const ExperimentConfig &cfg, const SeriesConfig &s, TrialState &st, ContextCache &cache)
        : cfg_(cfg), s_(s), st_(st), r_(st.realization()), cache_(cache)
    {
    }

    TrialResult run()
    {
        const int K = r_.K, L = r_.L;
        TrialResult out;
        out.alpha = anchor_alphas();
        out.bits = choose_bits(out.alpha);
        std::vector<BsPrecoder> prec(static_cast<std::size_t>(K));
        std::vector<CMatrix> Ht(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k)
            Ht[static_cast<std::size_t>(k)] = feedback_matrix(k, out.bits, -1, 0);
        for (int k = 0; k < K; ++k)
            prec[static_cast<std::size_t>(k)] = build(k, Ht[static_cast<std::size_t>(k)], out.alpha[static_cast<std::size_t>(k)]);
        if (s_.reg.kind == RegKind::grid_opt)
        {
            const auto chosen = grid_alphas(Ht, out.alpha);
            for (int k = 0; k < K; ++k)
                prec[static_cast<std::size_t>(k)] = build(k, Ht[static_cast<std::size_t>(k)], chosen[static_cast<std::size_t>(k)]);
            out.alpha = chosen;
        }
        const auto nc = noncoord_terms();
        out.sinr.resize(static_cast<std::size_t>(K * L));
        out.signal.resize(out.sinr.size());
        out.interference.resize(out.sinr.size());
        out.cell_rate.assign(static_cast<std::size_t>(K), 0.0);
        for (int u = 0; u < K * L; ++u)
        {
            const auto t = user_terms(u, prec);
            const double sinr = t.signal / (1.0 + t.intra + t.coordinated + nc[static_cast<std::size_t>(u)]);
            if (!(sinr >= 0) || !std::isfinite(sinr))
                ++out.self_check_failures;
            if (s_.scheme == Scheme::coord_zf && s_.feedback == Feedback::perfect && K * L == r_.M &&
                t.intra + t.coordinated > 1e-10 * t.signal)
                ++out.self_check_failures;
            out.sinr[static_cast<std::size_t>(u)] = sinr;
            out.signal[static_cast<std::size_t>(u)] = t.signal;
            out.interference[static_cast<std::size_t>(u)] = t.intra + t.coordinated;
            out.cell_rate[static_cast<std::size_t>(u / L)] += std::log2(1.0 + sinr);
        }
        return out;
    }

    /// Expected SINR of every user from the closed forms, given this trial's
    /// powers, alphas and allocation.
    std::vector<double> overlay(const TrialResult &tr)
    {
        const int K = r_.K, L = r_.L;
        std::vector<AnalyticsContext> ctx(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k)
            ctx[static_cast<std::size_t>(k)] = cache_.get(r_.M, tr.alpha[static_cast<std::size_t>(k)]);
        std::vector<double> out(static_cast<std::size_t>(K * L));
        for (int u = 0; u < K * L; ++u)
        {
            const int l = u % L, k = u / L;
            const auto order = link_order(k, K);
            LinkBudget b;
            b.K = K, b.L = L, b.C = r_.T;
            b.P_serving = r_.power(l, k, k);
            std::vector<AnalyticsContext> cu;
            std::vector<double> bits;
            for (int j : order)
            {
                cu.push_back(ctx[static_cast<std::size_t>(j)]);
                bits.push_back(tr.bits[static_cast<std::size_t>(u)][static_cast<std::size_t>(j)]);
                if (j != k)
                    b.P_interf.push_back(r_.power(l, k, j));
            }
            for (int t = 0; t < r_.T; ++t)
                b.P_noncoord.push_back(r_.power(l, k, K + t));
            out[static_cast<std::size_t>(u)] = s_.feedback == Feedback::perfect ? expected_sinr_perfect(cu, b)
                                                                               : expected_sinr_rvq(cu, b, bits);
        }
        return out;
    }

  private:
    struct Terms
    {
        double signal = 0, intra = 0, coordinated = 0;
    };

    bool coordinated() const { return is_coordinated(s_.scheme); }
    int own_offset(int k) const { return coordinated() ? k * r_.L : 0; }

    std::vector<double> anchor_alphas() const
    {
        const int K = r_.K, L = r_.L;
        std::vector<double> a(static_cast<std::size_t>(K), 0.0);
        for (int k = 0; k < K; ++k)
        {
            std::vector<double> p;
            switch (s_.reg.kind)
            {
            case RegKind::fixed:
                a[static_cast<std::size_t>(k)] = s_.reg.fixed_alpha;
                continue;
            case RegKind::single_cell_avg:
                for (int l = 0; l < L; ++l)
                    p.push_back(r_.power(l, k, k));
                break;
            case RegKind::multicell_avg:
            case RegKind::grid_opt:
                if (coordinated())
                    for (int c = 0; c < K; ++c)
                        for (int l = 0; l < L; ++l)
                            p.push_back(r_.power(l, c, k));
                else
                    for (int l = 0; l < L; ++l)
                        p.push_back(r_.power(l, k, k));
                break;
            }
            a[static_cast<std::size_t>(k)] = reg_inverse_mean(p);
        }
        return a;
    }

    std::vector<int> uniform_for(int u) const
    {
        const int k = u / r_.L;
        const auto order = link_order(k, r_.K);
        const auto a = uniform_bits(s_.bits.total, r_.K);
        std::vector<int> bits(static_cast<std::size_t>(r_.K));
        for (std::size_t i = 0; i < order.size(); ++i)
            bits[static_cast<std::size_t>(order[i])] = a.bits[i];
        return bits;
    }

    std::vector<std::vector<int>> choose_bits(const std::vector<double> &alpha)
    {
        const int K = r_.K, L = r_.L;
        const int U = K * L;
        std::vector<std::vector<int>> bits(static_cast<std::size_t>(U), std::vector<int>(static_cast<std::size_t>(K), 0));
        if (s_.feedback == Feedback::perfect)
            return bits;
        switch (s_.bits.scheme)
        {
        case BitScheme::fixed:
            for (auto &b : bits)
                std::fill(b.begin(), b.end(), s_.bits.per_link);
            return bits;
        case BitScheme::uniform:
            for (int u = 0; u < U; ++u)
                bits[static_cast<std::size_t>(u)] = uniform_for(u);
            return bits;
        case BitScheme::adaptive:
        case BitScheme::adaptive_zf: {
            std::vector<AnalyticsContext> ctx(static_cast<std::size_t>(K));
            for (int k = 0; k < K; ++k)
            {
                if (s_.bits.scheme == BitScheme::adaptive)
                    ctx[static_cast<std::size_t>(k)] = cache_.get(r_.M, alpha[static_cast<std::size_t>(k)]);
                else
                    ctx[static_cast<std::size_t>(k)].M = r_.M; // Delta = 0
            }
            for (int u = 0; u < U; ++u)
            {
                const int l = u % L, k = u / L;
                const auto order = link_order(k, K);
                std::vector<double> P;
                std::vector<AnalyticsContext> ci;
                for (std::size_t i = 1; i < order.size(); ++i)
                {
                    P.push_back(r_.power(l, k, order[i]));
                    ci.push_back(ctx[static_cast<std::size_t>(order[i])]);
                }
                const auto in = make_allocation_input(r_.power(l, k, k), P, ctx[static_cast<std::size_t>(k)], ci, L, s_.bits.total);
                const auto a = adaptive_bits(in, s_.bits.rounding);
                for (std::size_t i = 0; i < order.size(); ++i)
                    bits[static_cast<std::size_t>(u)][static_cast<std::size_t>(order[i])] = a.bits[i];
            }
            return bits;
        }
        case BitScheme::exhaustive_inst_se:
        case BitScheme::exhaustive_inst_int:
            return exhaustive_bits_all(alpha);
        }
        return bits;
    }

    // Fed-back KL x M (or L x M) matrix at BS k; user `swap_u`'s row uses
    // `swap_b` bits instead of its allocation when swap_u >= 0.
    CMatrix feedback_matrix(int k, const std::vector<std::vector<int>> &bits, int swap_u, int swap_b)
    {
        const int L = r_.L;
        const int first = coordinated() ? 0 : k * L;
        const int rows = coordinated() ? r_.K * L : L;
        CMatrix H(rows, r_.M);
        for (int i = 0; i < rows; ++i)
        {
            const int u = first + i;
            const int B = u == swap_u ? swap_b : bits[static_cast<std::size_t>(u)][static_cast<std::size_t>(k)];
            H.row(i) = st_.feedback_row(s_.feedback, u, k, B);
        }
        return H;
    }

    BsPrecoder build(int k, const CMatrix &H, double alpha) const
    {
        const double budget = r_.M;
        const auto p = s_.scheme == Scheme::coord_zf ? zf_precoder(H, budget) : rzf_precoder(H, alpha, budget);
        BsPrecoder b;
        b.Wn = p.W.middleCols(own_offset(k), r_.L) / std::sqrt(p.gamma);
        return b;
    }

    Terms user_terms(int u, const std::vector<BsPrecoder> &prec) const
    {
        const int l = u % r_.L, k = u / r_.L;
        Terms t;
        for (int j = 0; j < r_.K; ++j)
        {
            if (s_.scheme == Scheme::single_cell && j != k)
                continue;
            const Eigen::RowVectorXcd v = r_.channel(l, k, j) * prec[static_cast<std::size_t>(j)].Wn;
            const double P = r_.power(l, k, j);
            if (j == k)
            {
                t.signal = P * std::norm(v(l));
                t.intra = P * (v.squaredNorm() - std::norm(v(l)));
            }
            else
                t.coordinated += P * v.squaredNorm();
        }
        return t;
    }

    const std::vector<double> &noncoord_terms()
    {
        if (!nc_.empty())
            return nc_;
        nc_ = compute_noncoord();
        return nc_;
    }

    std::vector<double> compute_noncoord() const
    {
        const int U = r_.K * r_.L;
        std::vector<double> out(static_cast<std::size_t>(U), 0.0);
        if (r_.T == 0 || s_.scheme == Scheme::single_cell)
            return out;
        for (int t = 0; t < r_.T; ++t)
        {
            std::vector<double> own;
            for (int l = 0; l < r_.L; ++l)
                own.push_back(r_.nc_power(t, l));
            // unit mean power per column: ||W||^2 budget L
            const auto p = rzf_precoder(r_.nc_channels[static_cast<std::size_t>(t)], reg_inverse_mean(own), r_.L);
            const CMatrix Wn = p.normalized();
            for (int u = 0; u < U; ++u)
            {
                const int l = u % r_.L, k = u / r_.L;
                out[static_cast<std::size_t>(u)] += r_.power(l, k, r_.K + t) * (r_.channel(l, k, r_.K + t) * Wn).squaredNorm();
            }
        }
        return out;
    }

    // Cluster-wide search: one common alpha from the grid for every BS, plus
    // the per-BS anchor vector as an extra candidate. Maximizes the summed
    // instantaneous SE of the coordinated cells.
    std::vector<double> grid_alphas(const std::vector<CMatrix> &Ht, const std::vector<double> &anchor)
    {
        const int K = r_.K, L = r_.L, U = K * L;
        const auto &nc = noncoord_terms();
        struct Bs
        {
            Eigen::VectorXd lambda;
            CMatrix QhOwn; // rows of Q^H restricted to the BS's own columns
            std::vector<Eigen::RowVectorXcd> proj; // per user, h H^H Q
        };
        std::vector<Bs> bs(static_cast<std::size_t>(K));
        for (int j = 0; j < K; ++j)
        {
            const CMatrix &H = Ht[static_cast<std::size_t>(j)];
            Eigen::SelfAdjointEigenSolver<CMatrix> es(H * H.adjoint());
            auto &b = bs[static_cast<std::size_t>(j)];
            b.lambda = es.eigenvalues().cwiseMax(0.0);
            b.QhOwn = es.eigenvectors().adjoint().middleCols(own_offset(j), L);
            const CMatrix HQ = H.adjoint() * es.eigenvectors();
            for (int u = 0; u < U; ++u)
            {
                const bool used = s_.scheme != Scheme::single_cell || u / L == j;
                b.proj.push_back(used ? Eigen::RowVectorXcd(r_.channel(u % L, u / L, j) * HQ) : Eigen::RowVectorXcd());
            }
        }
        std::vector<double> sig(static_cast<std::size_t>(U)), inter(static_cast<std::size_t>(U));
        auto objective = [&](const std::vector<double> &alpha) {
            std::fill(sig.begin(), sig.end(), 0.0);
            for (int u = 0; u < U; ++u)
                inter[static_cast<std::size_t>(u)] = 1.0 + nc[static_cast<std::size_t>(u)];
            for (int j = 0; j < K; ++j)
            {
                const auto &b = bs[static_cast<std::size_t>(j)];
                const double a = alpha[static_cast<std::size_t>(j)];
                const Eigen::ArrayXd inv = 1.0 / (b.lambda.array() + a);
                const double g = (b.lambda.array() * inv.square()).sum() / r_.M;
                for (int u = 0; u < U; ++u)
                {
                    if (b.proj[static_cast<std::size_t>(u)].size() == 0)
                        continue;
                    const int l = u % L, k = u / L;
                    const Eigen::RowVectorXcd s = b.proj[static_cast<std::size_t>(u)].array() * inv.transpose().cast<cdouble>();
                    const Eigen::RowVectorXcd v = s * b.QhOwn;
                    const double P = r_.power(l, k, j) / g;
                    if (j == k)
                    {
                        sig[static_cast<std::size_t>(u)] = P * std::norm(v(l));
                        inter[static_cast<std::size_t>(u)] += P * (v.squaredNorm() - std::norm(v(l)));
                    }
                    else
                        inter[static_cast<std::size_t>(u)] += P * v.squaredNorm();
                }
            }
            double rate = 0.0;
            for (int u = 0; u < U; ++u)
                rate += std::log2(1.0 + sig[static_cast<std::size_t>(u)] / inter[static_cast<std::size_t>(u)]);
            return rate;
        };
        std::vector<double> best = anchor;
        double best_v = objective(anchor);
        std::vector<double> cand(static_cast<std::size_t>(K));
        for (double a : log_grid(s_.reg.grid_min, s_.reg.grid_max, s_.reg.grid_points))
        {
            std::fill(cand.begin(), cand.end(), a);
            const double v = objective(cand);
            if (v > best_v)
                best_v = v, best = cand;
        }
        return best;
    }

    // Per user: enumerate its own splits with every other user at the
    // uniform allocation. A link's bits only move the precoder of that BS,
    // so each (BS, bits) precoder is built once and the splits combine terms.
    std::vector<std::vector<int>> exhaustive_bits_all(const std::vector<double> &alpha)
    {
        const int K = r_.K, L = r_.L, U = K * L, BT = s_.bits.total;
        std::vector<std::vector<int>> base(static_cast<std::size_t>(U));
        for (int u = 0; u < U; ++u)
            base[static_cast<std::size_t>(u)] = uniform_for(u);
        std::vector<std::vector<int>> chosen(static_cast<std::size_t>(U));
        const auto nc = noncoord_terms();
        for (int u = 0; u < U; ++u)
        {
            const int l = u % L, k = u / L;
            const auto order = link_order(k, K);
            // term[i][B]: serving (signal, intra) for i = 0, coordinated power for i > 0
            std::vector<std::vector<Terms>> term(order.size(), std::vector<Terms>(static_cast<std::size_t>(BT + 1)));
            for (std::size_t i = 0; i < order.size(); ++i)
            {
                const int j = order[i];
                for (int B = 0; B <= BT; ++B)
                {
                    const auto pj = build(j, feedback_matrix(j, base, u, B), alpha[static_cast<std::size_t>(j)]);
                    const Eigen::RowVectorXcd v = r_.channel(l, k, j) * pj.Wn;
                    const double P = r_.power(l, k, j);
                    auto &t = term[i][static_cast<std::size_t>(B)];
                    if (j == k)
                    {
                        t.signal = P * std::norm(v(l));
                        t.intra = P * (v.squaredNorm() - std::norm(v(l)));
                    }
                    else
                        t.coordinated = P * v.squaredNorm();
                }
            }
            const bool max_se = s_.bits.scheme == BitScheme::exhaustive_inst_se;
            const auto a = exhaustive_bits(
                K, BT,
                [&](const std::vector<int> &b) {
                    const auto &own = term[0][static_cast<std::size_t>(b[0])];
                    double inter = own.intra;
                    for (std::size_t i = 1; i < order.size(); ++i)
                        inter += term[i][static_cast<std::size_t>(b[i])].coordinated;
                    if (!max_se)
                        return inter;
                    return std::log2(1.0 + own.signal / (1.0 + inter + nc[static_cast<std::size_t>(u)]));
                },
                max_se);
            std::vector<int> bits(static_cast<std::size_t>(K));
            for (std::size_t i = 0; i < order.size(); ++i)
                bits[static_cast<std::size_t>(order[i])] = a.bits[i];
            chosen[static_cast<std::size_t>(u)] = bits;
        }
        return chosen;
    }

    const ExperimentConfig &cfg_;
    const SeriesConfig &s_;
    TrialState &st_;
    NetworkRealization &r_;
    ContextCache &cache_;
    std::vector<double> nc_;
};

} // namespace detail

/// Runs one series on one trial at one rho0 (dB). Exposed for tests.
inline TrialResult evaluate_trial(const ExperimentConfig &cfg, const SeriesConfig &series, TrialState &state,
                                  double rho0_db, ContextCache &cache)
{
    state.realization().P0 = db_to_linear(rho0_db);
    return detail::SeriesEvaluator(cfg, series, state, cache).run();
}

/// Evaluates the instantaneous SINR of one user for explicit normalized
/// precoders. `Wn[j]` holds BS j's transmitted columns (its own users, M x L);
/// `nc_Wn[t]` those of non-coordinated transmitter t. Set `others` false to
/// drop inter-cell terms.
inline double instantaneous_sinr(const NetworkRealization &r, std::span<const CMatrix> Wn, std::span<const CMatrix> nc_Wn,
                                 int l, int k, bool others = true)
{
    if (static_cast<int>(Wn.size()) != r.K || (others && static_cast<int>(nc_Wn.size()) != r.T))
        throw ConfigError("instantaneous_sinr: one precoder per transmitter required");
    double sig = 0, interf = 0;
    for (int j = 0; j < r.K; ++j)
    {
        if (!others && j != k)
            continue;
        const Eigen::RowVectorXcd v = r.channel(l, k, j) * Wn[static_cast<std::size_t>(j)];
        const double P = r.power(l, k, j);
        if (j == k)
        {
            sig = P * std::norm(v(l));
            interf += P * (v.squaredNorm() - std::norm(v(l)));
        }
        else
            interf += P * v.squaredNorm();
    }
    if (others)
        for (int t = 0; t < r.T; ++t)
            interf += r.power(l, k, r.K + t) * (r.channel(l, k, r.K + t) * nc_Wn[static_cast<std::size_t>(t)]).squaredNorm();
    return sig / (1.0 + interf);
}

struct PointResult
{
    std::string series;
    Scheme scheme = Scheme::coord_rzf;
    Feedback feedback = Feedback::perfect;
    std::string bits;
    double rho0_db = 0.0;
    double mean_sinr = 0.0;
    double mean_sinr_db = 0.0;
    double stderr_sinr = 0.0; ///< standard error of mean_sinr (linear)
    double mean_se = 0.0;     ///< mean cell-edge SE per cell, bits/s/Hz
    double se_stderr = 0.0;
    double analytic_sinr_db = std::numeric_limits<double>::quiet_NaN();
    double analytic_se = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};

struct ExperimentResult
{
    std::vector<PointResult> points; ///< series-major, then rho0 in config order
    /// per point, the per-trial mean cell-edge SE (same order as points)
    std::vector<std::vector<double>> trial_se;
    long self_check_failures = 0;

    const PointResult &at(const std::string &series, double rho0_db) const
    {
        for (const auto &p : points)
            if (p.series == series && p.rho0_db == rho0_db)
                return p;
        throw ConfigError("result: no point for series '" + series + "'");
    }
    const std::vector<double> &trial_se_of(const std::string &series, double rho0_db) const
    {
        for (std::size_t i = 0; i < points.size(); ++i)
            if (points[i].series == series && points[i].rho0_db == rho0_db)
                return trial_se[i];
        throw ConfigError("result: no point for series '" + series + "'");
    }
};

/// Mean and standard error of a - b over paired trials.
struct PairedGap
{
    double mean = 0.0;
    double stderr_ = 0.0;
};

inline PairedGap paired_gap(const std::vector<double> &a, const std::vector<double> &b)
{
    if (a.size() != b.size() || a.size() < 2)
        throw ConfigError("paired_gap: need two equally long samples");
    const double n = static_cast<double>(a.size());
    double s = 0, q = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        const double d = a[i] - b[i];
        s += d;
        q += d * d;
    }
    const double m = s / n;
    return {m, std::sqrt(std::max(q / n - m * m, 0.0) / (n - 1.0))};
}

inline std::string bits_label(const SeriesConfig &s)
{
    if (s.feedback == Feedback::perfect)
        return "perfect";
    switch (s.bits.scheme)
    {
    case BitScheme::fixed:
        return "fixed:" + std::to_string(s.bits.per_link);
    case BitScheme::adaptive:
        return "adaptive:" + std::to_string(s.bits.total);
    case BitScheme::adaptive_zf:
        return "adaptive_zf:" + std::to_string(s.bits.total);
    case BitScheme::uniform:
        return "uniform:" + std::to_string(s.bits.total);
    case BitScheme::exhaustive_inst_se:
        return "exhaustive_inst_se:" + std::to_string(s.bits.total);
    case BitScheme::exhaustive_inst_int:
        return "exhaustive_inst_int:" + std::to_string(s.bits.total);
    }
    return "?";
}

/// Worker count: CORZF_WORKERS if set, else the hardware concurrency.
inline int default_workers()
{
    if (const char *env = std::getenv("CORZF_WORKERS"))
    {
        const int w = std::atoi(env);
        if (w >= 1)
            return w;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Monte Carlo sweep. Every random draw derives from (seed, trial, ...)
/// counters and aggregation runs in trial order, so results do not depend on
/// the worker count.
inline ExperimentResult run_experiment(const ExperimentConfig &cfg, int workers = 0)
{
    cfg.validate();
    if (workers <= 0)
        workers = default_workers();
    const std::size_t S = cfg.series.size(), R = cfg.rho0_db.size();
    const std::uint64_t N = cfg.trials;
    const std::size_t P = S * R;
    // per (point, trial): mean SINR, mean SE, analytic SINR, analytic SE
    std::vector<double> sinr(P * N), se(P * N), an_sinr(P * N), an_se(P * N);
    std::vector<int> failures(N, 0);
    ContextCache cache;

    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        try
        {
            for (;;)
            {
                const std::uint64_t t = next.fetch_add(1);
                if (t >= N)
                    return;
                std::map<std::pair<int, int>, TrialState> states;
                for (std::size_t s = 0; s < S; ++s)
                {
                    const auto &sc = cfg.series[s];
                    const auto key = std::make_pair(cfg.K_of(sc), cfg.C_of(sc));
                    auto it = states.find(key);
                    if (it == states.end())
                        it = states.try_emplace(key, cfg, t, key.first, key.second).first;
                    for (std::size_t r = 0; r < R; ++r)
                    {
                        it->second.realization().P0 = db_to_linear(cfg.rho0_db[r]);
                        detail::SeriesEvaluator ev(cfg, sc, it->second, cache);
                        const auto tr = ev.run();
                        const std::size_t idx = (s * R + r) * N + t;
                        sinr[idx] = tr.mean_sinr();
                        se[idx] = tr.mean_cell_se();
                        failures[t] += tr.self_check_failures;
                        if (sc.overlay)
                        {
                            const auto ex = ev.overlay(tr);
                            double ms = 0, rate = 0;
                            for (double v : ex)
                            {
                                ms += v;
                                rate += expected_cell_edge_se(v, 1);
                            }
                            an_sinr[idx] = ms / static_cast<double>(ex.size());
                            an_se[idx] = rate / tr.cell_rate.size();
                        }
                    }
                }
            }
        }
        catch (...)
        {
            std::lock_guard lock(error_mutex);
            if (!error)
                error = std::current_exception();
            next.store(N);
        }
    };
    if (workers == 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto &th : pool)
            th.join();
    }
    if (error)
        std::rethrow_exception(error);

    ExperimentResult res;
    for (int f : failures)
        res.self_check_failures += f;
    const double n = static_cast<double>(N);
    auto stats = [&](const double *x, double &mean, double &sem) {
        double s = 0, q = 0;
        for (std::uint64_t t = 0; t < N; ++t)
            s += x[t];
        mean = s / n;
        for (std::uint64_t t = 0; t < N; ++t)
            q += (x[t] - mean) * (x[t] - mean);
        sem = N > 1 ? std::sqrt(q / (n - 1.0) / n) : 0.0;
    };
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t r = 0; r < R; ++r)
        {
            const auto &sc = cfg.series[s];
            const std::size_t base = (s * R + r) * N;
            PointResult p;
            p.series = sc.label;
            p.scheme = sc.scheme;
            p.feedback = sc.feedback;
            p.bits = bits_label(sc);
            p.rho0_db = cfg.rho0_db[r];
            p.trials = N;
            p.seed = cfg.seed;
            stats(&sinr[base], p.mean_sinr, p.stderr_sinr);
            p.mean_sinr_db = linear_to_db(p.mean_sinr);
            stats(&se[base], p.mean_se, p.se_stderr);
            if (sc.overlay)
            {
                double m, e;
                stats(&an_sinr[base], m, e);
                p.analytic_sinr_db = linear_to_db(m);
                stats(&an_se[base], p.analytic_se, e);
            }
            res.points.push_back(p);
            res.trial_se.emplace_back(se.begin() + static_cast<std::ptrdiff_t>(base),
                                      se.begin() + static_cast<std::ptrdiff_t>(base + N));
        }
    return res;
}

} // namespace corzf
