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
#include "corzf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace corzf
{

struct Point
{
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Point &a, const Point &b) { return std::hypot(a.x - b.x, a.y - b.y); }

enum class Region
{
    annulus,
    full_cell
};

enum class ShadowingKind
{
    real_normal,  ///< eta ~ N(0, 1)
    cn_real_part, ///< eta = Re(z), z ~ CN(0, 1), i.e. N(0, 1/2)
};

/// Cell geometry. Cells [0, K) are coordinated, the next C are not.
struct CellLayout
{
    std::vector<Point> cell_centers;
    double radius = 500.0;
    std::vector<int> coordination_set;
    std::vector<int> noncoord_set;
    double d_min = 325.0; ///< coordination annulus
    double d_max = 500.0;
    double wedge_deg = 360.0;     ///< angular span of the annulus drop, centered on the cluster centroid
    double full_cell_min = 35.0;  ///< minimum distance for full-cell drops

    int K() const { return static_cast<int>(coordination_set.size()); }
    int C() const { return static_cast<int>(noncoord_set.size()); }

    void validate() const
    {
        if (coordination_set.empty())
            throw ConfigError("layout: K must be >= 1");
        if (!(radius > 0))
            throw ConfigError("layout: radius must be positive");
        if (!(d_min >= 0 && d_min < d_max && d_max <= radius))
            throw ConfigError("layout: annulus requires 0 <= d_min < d_max <= R");
        if (!(full_cell_min >= 0 && full_cell_min < radius))
            throw ConfigError("layout: full_cell_min must lie in [0, R)");
        if (!(wedge_deg > 0 && wedge_deg <= 360))
            throw ConfigError("layout: wedge_deg must lie in (0, 360]");
        const int n = static_cast<int>(cell_centers.size());
        auto check = [n](int i) {
            if (i < 0 || i >= n)
                throw ConfigError("layout: cell index out of range");
        };
        for (int i : coordination_set)
            check(i);
        for (int i : noncoord_set)
            check(i);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (!(distance(cell_centers[static_cast<std::size_t>(i)], cell_centers[static_cast<std::size_t>(j)]) > 0))
                    throw ConfigError("layout: coincident cell centers");
    }

    const Point &center(int cell) const { return cell_centers.at(static_cast<std::size_t>(cell)); }

    /// Centroid of the coordinated cell centers.
    Point cluster_centroid() const
    {
        Point c;
        for (int i : coordination_set)
        {
            c.x += center(i).x;
            c.y += center(i).y;
        }
        c.x /= K();
        c.y /= K();
        return c;
    }
};

/// Hexagonal lattice point i * a1 + j * a2 for inter-site distance sqrt(3) R.
inline Point hex_point(int i, int j, double R)
{
    const double d = std::sqrt(3.0) * R;
    return {d * (i + 0.5 * j), d * (std::sqrt(3.0) / 2.0) * j};
}

/// Named layouts: "two_cell", "three_cell" (mutually adjacent cells) and
/// "twentyone_cell" (three coordinated cells plus two rings of 18 more).
/// The first K cells form the coordination set and the next C cells the
/// non-coordinated set.
inline CellLayout make_layout(const std::string &name, int K, int C, double R = 500.0)
{
    static const int two[][2] = {{0, 0}, {1, 0}};
    static const int three[][2] = {{0, 0}, {1, 0}, {0, 1}};
    // nearest 21 sites to the centroid of the first three
    static const int twentyone[][2] = {{0, 0},  {1, 0},  {0, 1},   {-1, 1}, {1, -1}, {1, 1},  {-1, 0},
                                       {-1, 2}, {0, -1}, {0, 2},   {2, -1}, {2, 0},  {-2, 1}, {-2, 2},
                                       {1, -2}, {1, 2},  {2, -2},  {2, 1},  {-1, -1}, {3, -1}, {-1, 3}};
    const int(*sites)[2] = nullptr;
    int n = 0;
    if (name == "two_cell")
        sites = two, n = 2;
    else if (name == "three_cell")
        sites = three, n = 3;
    else if (name == "twentyone_cell")
        sites = twentyone, n = 21;
    else
        throw ConfigError("layout: unknown layout '" + name + "'");
    if (K < 1 || C < 0 || K + C > n)
        throw ConfigError("layout: '" + name + "' has " + std::to_string(n) + " cells, K + C = " +
                          std::to_string(K + C) + " requested");
    CellLayout layout;
    layout.radius = R;
    for (int s = 0; s < n; ++s)
        layout.cell_centers.push_back(hex_point(sites[s][0], sites[s][1], R));
    for (int k = 0; k < K; ++k)
        layout.coordination_set.push_back(k);
    for (int c = 0; c < C; ++c)
        layout.noncoord_set.push_back(K + c);
    return layout;
}

/// Area-uniform user positions in the coordination annulus (within the wedge
/// facing the cluster centroid) or in the full cell disc.
inline std::vector<Point> drop_users(const CellLayout &layout, int cell, int count, Region region, Rng &rng)
{
    if (count < 1)
        throw ConfigError("drop_users: count must be >= 1");
    const Point c = layout.center(cell);
    double lo, hi, span = 2.0 * std::numbers::pi, mid = 0.0;
    if (region == Region::annulus)
    {
        lo = layout.d_min, hi = layout.d_max;
        if (layout.wedge_deg < 360.0)
        {
            const Point g = layout.cluster_centroid();
            if (distance(g, c) > 1e-9 * layout.radius)
            {
                span = layout.wedge_deg * std::numbers::pi / 180.0;
                mid = std::atan2(g.y - c.y, g.x - c.x);
            }
        }
    }
    else
        lo = layout.full_cell_min, hi = layout.radius;
    if (!(lo >= 0 && lo < hi))
        throw ConfigError("drop_users: empty region (need d_min < d_max)");

    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> out(static_cast<std::size_t>(count));
    for (auto &p : out)
    {
        const double r = std::sqrt(u(rng) * (hi * hi - lo * lo) + lo * lo);
        const double th = mid + (u(rng) - 0.5) * span;
        p = {c.x + r * std::cos(th), c.y + r * std::sin(th)};
    }
    return out;
}

struct PowerModel
{
    double P0 = 1.0;
    double R = 500.0;
    double a = 3.8;
    double sigma_sf = 8.0;
    bool shadowing_enabled = true;
    ShadowingKind shadowing = ShadowingKind::real_normal;

    void validate() const
    {
        if (!(P0 > 0) || !(R > 0) || !(a > 0) || !(sigma_sf >= 0))
            throw ConfigError("power model: need P0 > 0, R > 0, a > 0, sigma_sf >= 0");
    }
};

/// (R / d)^a z with z the log-normal shadowing factor; P0 excluded.
inline double path_gain(const PowerModel &model, double d, Rng &rng)
{
    if (!(d > 0))
        throw DomainError("received_power: distance must be positive");
    double g = std::pow(model.R / d, model.a);
    if (model.shadowing_enabled && model.sigma_sf > 0)
    {
        const double sd = model.shadowing == ShadowingKind::real_normal ? 1.0 : std::sqrt(0.5);
        std::normal_distribution<double> eta(0.0, sd);
        g *= std::pow(10.0, eta(rng) * model.sigma_sf / 10.0);
    }
    return g;
}

inline double received_power(const PowerModel &model, double d, Rng &rng) { return model.P0 * path_gain(model, d, rng); }

/// 1 x M row of i.i.d. CN(0, 1) entries.
inline CVector sample_channel(int M, Rng &rng)
{
    if (M < 1)
        throw ConfigError("sample_channel: M must be >= 1");
    ComplexNormal cn;
    return cn.row(rng, M);
}

/// One drop. Transmitters 0..K-1 are the coordinated BSs and K..K+T-1 the
/// non-coordinated ones (T = C, or 3C with sectorization). Coordinated users
/// are indexed u = k * L + l. Powers are stored as gains relative to P0 so a
/// single drop serves every rho0 point.
struct NetworkRealization
{
    int K = 0, L = 0, M = 0, T = 0;
    double P0 = 1.0;
    std::vector<Point> users;        ///< K * L coordinated users
    std::vector<double> gains;       ///< [u * (K + T) + j]
    std::vector<CVector> channels;   ///< [u * (K + T) + j]
    std::vector<Point> nc_users;     ///< T * L users served by non-coordinated transmitters
    std::vector<double> nc_gains;    ///< [t * L + l], own-transmitter gains
    std::vector<CMatrix> nc_channels; ///< per transmitter, L x M towards its own users

    int num_tx() const { return K + T; }
    std::size_t link(int l, int k, int j) const
    {
        if (l < 0 || l >= L || k < 0 || k >= K || j < 0 || j >= K + T)
            throw ConfigError("realization: link index out of range");
        return static_cast<std::size_t>((k * L + l) * (K + T) + j);
    }
    double power(int l, int k, int j) const { return P0 * gains[link(l, k, j)]; }
    const CVector &channel(int l, int k, int j) const { return channels[link(l, k, j)]; }
    double nc_power(int t, int l) const { return P0 * nc_gains[static_cast<std::size_t>(t * L + l)]; }
};

/// Draws users, gains and channels for the first K coordinated and C
/// non-coordinated cells of `layout`. Coordinated users fall in `region`.
inline NetworkRealization draw_realization(const CellLayout &layout, const PowerModel &model, int L, int M, Rng &rng,
                                           int sectors = 1, Region region = Region::annulus)
{
    layout.validate();
    model.validate();
    if (L < 1 || M < 1)
        throw ConfigError("realization: L, M must be >= 1");
    if (sectors != 1 && sectors != 3)
        throw ConfigError("realization: sectors must be 1 or 3");
    NetworkRealization r;
    r.K = layout.K();
    r.L = L;
    r.M = M;
    r.T = layout.C() * sectors;
    r.P0 = model.P0;

    std::vector<Point> tx;
    for (int k : layout.coordination_set)
        tx.push_back(layout.center(k));
    std::vector<int> tx_cell;
    for (int c : layout.noncoord_set)
        for (int s = 0; s < sectors; ++s)
        {
            tx.push_back(layout.center(c));
            tx_cell.push_back(c);
        }

    for (int k = 0; k < r.K; ++k)
    {
        auto pts = drop_users(layout, layout.coordination_set[static_cast<std::size_t>(k)], L, region, rng);
        r.users.insert(r.users.end(), pts.begin(), pts.end());
    }
    const int J = r.num_tx();
    r.gains.resize(static_cast<std::size_t>(r.K * L * J));
    r.channels.resize(r.gains.size());
    for (int u = 0; u < r.K * L; ++u)
        for (int j = 0; j < J; ++j)
        {
            const auto idx = static_cast<std::size_t>(u * J + j);
            r.gains[idx] = path_gain(model, distance(r.users[static_cast<std::size_t>(u)], tx[static_cast<std::size_t>(j)]), rng);
            r.channels[idx] = sample_channel(M, rng);
        }

    ComplexNormal cn;
    for (int t = 0; t < r.T; ++t)
    {
        const int cell = tx_cell[static_cast<std::size_t>(t)];
        auto pts = drop_users(layout, cell, L, Region::full_cell, rng);
        for (const auto &p : pts)
        {
            r.nc_users.push_back(p);
            r.nc_gains.push_back(path_gain(model, distance(p, layout.center(cell)), rng));
        }
        r.nc_channels.push_back(cn.matrix(rng, L, M));
    }
    return r;
}

/// KL x M matrix of channels from BS k to all coordinated users, cell-major.
inline CMatrix build_concatenated_channel(const NetworkRealization &r, int k)
{
    if (r.K * r.L > r.M)
        throw ConfigError("build_concatenated_channel: KL = " + std::to_string(r.K * r.L) + " exceeds M = " +
                          std::to_string(r.M));
    CMatrix H(r.K * r.L, r.M);
    for (int c = 0; c < r.K; ++c)
        for (int l = 0; l < r.L; ++l)
            H.row(c * r.L + l) = r.channel(l, c, k);
    return H;
}

} // namespace corzf
