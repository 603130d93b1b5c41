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

#include <corzf/cellular_model.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

using namespace corzf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
PowerModel no_shadowing()
{
    PowerModel m;
    m.shadowing_enabled = false;
    return m;
}

// 1% critical values of the chi-square distribution
constexpr double kChi2Crit9 = 21.666;

double chi2(const std::vector<int> &counts, double expected)
{
    double s = 0;
    for (int c : counts)
        s += (c - expected) * (c - expected) / expected;
    return s;
}
} // namespace

TEST_CASE("annulus drops have the area-uniform mean distance", "[cellular_model]")
{
    const auto lay = make_layout("two_cell", 2, 0);
    auto rng = make_rng(1, {1});
    const auto pts = drop_users(lay, 0, 100000, Region::annulus, rng);
    double s = 0;
    for (const auto &p : pts)
        s += distance(p, lay.center(0));
    const double expect = (2.0 / 3.0) * (std::pow(500.0, 3) - std::pow(325.0, 3)) / (500.0 * 500.0 - 325.0 * 325.0);
    CHECK_THAT(expect, WithinRel(417.9, 1e-2));
    CHECK_THAT(s / pts.size(), WithinRel(expect, 1e-2));
}

TEST_CASE("drops pass chi-square tests for radius and angle", "[cellular_model]")
{
    auto lay = make_layout("three_cell", 3, 0);
    lay.wedge_deg = 120;
    const Point g = lay.cluster_centroid();
    for (int cell = 0; cell < 3; ++cell)
    {
        auto rng = make_rng(2, {static_cast<std::uint64_t>(cell)});
        const int n = 100000, bins = 10;
        const auto pts = drop_users(lay, cell, n, Region::annulus, rng);
        const Point c = lay.center(cell);
        const double mid = std::atan2(g.y - c.y, g.x - c.x);
        const double span = 120.0 * std::numbers::pi / 180.0;
        std::vector<int> rad(bins), ang(bins);
        const double a2 = 325.0 * 325.0, b2 = 500.0 * 500.0;
        for (const auto &p : pts)
        {
            const double r = distance(p, c);
            REQUIRE(r >= 325.0 - 1e-9);
            REQUIRE(r <= 500.0 + 1e-9);
            // equal-area radial bins
            const int rb = std::min(bins - 1, static_cast<int>((r * r - a2) / (b2 - a2) * bins));
            double th = std::atan2(p.y - c.y, p.x - c.x) - mid;
            th = std::remainder(th, 2 * std::numbers::pi);
            REQUIRE(std::abs(th) <= span / 2 + 1e-9);
            const int ab = std::min(bins - 1, static_cast<int>((th / span + 0.5) * bins));
            ++rad[static_cast<std::size_t>(rb)];
            ++ang[static_cast<std::size_t>(ab)];
        }
        CHECK(chi2(rad, n / double(bins)) < kChi2Crit9);
        CHECK(chi2(ang, n / double(bins)) < kChi2Crit9);
    }
}

TEST_CASE("full-cell drops cover the disc", "[cellular_model]")
{
    const auto lay = make_layout("two_cell", 1, 1);
    auto rng = make_rng(3);
    const auto pts = drop_users(lay, 1, 20000, Region::full_cell, rng);
    double mn = 1e9, mx = 0;
    for (const auto &p : pts)
    {
        const double r = distance(p, lay.center(1));
        mn = std::min(mn, r);
        mx = std::max(mx, r);
    }
    CHECK(mn >= 35.0);
    CHECK(mx <= 500.0);
    CHECK(mx > 495.0);
}

TEST_CASE("degenerate annulus is rejected", "[cellular_model]")
{
    auto lay = make_layout("two_cell", 2, 0);
    lay.d_min = 500;
    lay.d_max = 500;
    CHECK_THROWS_AS(lay.validate(), ConfigError);
    auto rng = make_rng(1);
    CHECK_THROWS_AS(drop_users(lay, 0, 1, Region::annulus, rng), ConfigError);
    CHECK_THROWS_AS(drop_users(make_layout("two_cell", 2, 0), 0, 0, Region::annulus, rng), ConfigError);
}

TEST_CASE("drops are deterministic per seed", "[cellular_model]")
{
    const auto lay = make_layout("two_cell", 2, 0);
    auto r1 = make_rng(42, {5});
    auto r2 = make_rng(42, {5});
    const auto a = drop_users(lay, 1, 3, Region::annulus, r1);
    const auto b = drop_users(lay, 1, 3, Region::annulus, r2);
    for (int i = 0; i < 3; ++i)
    {
        CHECK(a[i].x == b[i].x);
        CHECK(a[i].y == b[i].y);
    }
}

TEST_CASE("received power follows the path-loss law", "[cellular_model]")
{
    auto m = no_shadowing();
    m.P0 = 3.0;
    auto rng = make_rng(1);
    CHECK_THAT(received_power(m, 500.0, rng), WithinRel(3.0, 1e-15));
    m.P0 = 1.0;
    CHECK_THAT(received_power(m, 250.0, rng), WithinRel(std::pow(2.0, 3.8), 1e-14));
    CHECK_THAT(received_power(m, 250.0, rng), WithinAbs(13.93, 5e-3));
    CHECK_THAT(linear_to_db(received_power(m, 250.0, rng)), WithinRel(38.0 * std::log10(2.0), 1e-12));
    CHECK_THROWS_AS(received_power(m, 0.0, rng), DomainError);
    CHECK_THROWS_AS(received_power(m, -3.0, rng), DomainError);
}

TEST_CASE("received power decreases strictly with distance", "[cellular_model]")
{
    const auto m = no_shadowing();
    auto rng = make_rng(1);
    double prev = INFINITY;
    for (double d = 1.0; d < 5000.0; d *= 1.1)
    {
        const double p = received_power(m, d, rng);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("log-normal shadowing has zero mean in dB", "[cellular_model]")
{
    PowerModel m;
    m.sigma_sf = 8.0;
    auto rng = make_rng(9);
    const int n = 1000000;
    double s = 0, q = 0;
    for (int i = 0; i < n; ++i)
    {
        const double db = linear_to_db(received_power(m, m.R, rng));
        s += db;
        q += db * db;
    }
    CHECK(std::abs(s / n) < 0.05);
    CHECK_THAT(std::sqrt(q / n), WithinRel(8.0, 1e-2));

    m.shadowing = ShadowingKind::cn_real_part;
    q = 0;
    for (int i = 0; i < 200000; ++i)
    {
        const double db = linear_to_db(received_power(m, m.R, rng));
        q += db * db;
    }
    CHECK_THAT(std::sqrt(q / 200000), WithinRel(8.0 / std::sqrt(2.0), 1e-2));
}

TEST_CASE("channel entries are unit-variance complex normal", "[cellular_model]")
{
    auto rng = make_rng(11);
    const int n = 1000000;
    double s4 = 0, re2 = 0, im2 = 0, s1 = 0;
    for (int i = 0; i < n; ++i)
    {
        const auto h = sample_channel(4, rng);
        s4 += h.squaredNorm();
        re2 += h(0).real() * h(0).real();
        im2 += h(0).imag() * h(0).imag();
    }
    CHECK_THAT(s4 / n, WithinRel(4.0, 1e-2));
    CHECK_THAT(re2 / n, WithinRel(0.5, 1e-2));
    CHECK_THAT(im2 / n, WithinRel(0.5, 1e-2));
    for (int i = 0; i < n; ++i)
        s1 += sample_channel(1, rng).squaredNorm();
    CHECK_THAT(s1 / n, WithinRel(1.0, 1e-2));

    auto a = make_rng(3), b = make_rng(3);
    CHECK(sample_channel(4, a) == sample_channel(4, b));
    CHECK_THROWS_AS(sample_channel(0, a), ConfigError);
}

TEST_CASE("layouts", "[cellular_model]")
{
    const double R = 500.0, d = std::sqrt(3.0) * R;
    const auto three = make_layout("three_cell", 3, 0, R);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            CHECK_THAT(distance(three.center(i), three.center(j)), WithinRel(d, 1e-12));

    const auto big = make_layout("twentyone_cell", 3, 18, R);
    CHECK(big.K() == 3);
    CHECK(big.C() == 18);
    CHECK(big.cell_centers.size() == 21);
    for (std::size_t i = 0; i < big.cell_centers.size(); ++i)
        for (std::size_t j = i + 1; j < big.cell_centers.size(); ++j)
            CHECK(distance(big.cell_centers[i], big.cell_centers[j]) > d - 1e-6);
    // the ring of interferers lies within two lattice rings of the cluster
    const Point g = big.cluster_centroid();
    for (const auto &c : big.cell_centers)
        CHECK(distance(c, g) < 3.0 * d);

    CHECK_THROWS_AS(make_layout("two_cell", 3, 0), ConfigError);
    CHECK_THROWS_AS(make_layout("hexagon", 1, 0), ConfigError);
}

TEST_CASE("realization covers every link", "[cellular_model]")
{
    auto lay = make_layout("twentyone_cell", 3, 18);
    PowerModel m;
    auto rng = make_rng(4);
    for (int sectors : {1, 3})
    {
        const auto r = draw_realization(lay, m, 2, 8, rng, sectors);
        CHECK(r.T == 18 * sectors);
        CHECK(r.users.size() == 6);
        CHECK(r.nc_channels.size() == static_cast<std::size_t>(r.T));
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 2; ++l)
                for (int j = 0; j < r.num_tx(); ++j)
                {
                    CHECK(r.power(l, k, j) > 0);
                    CHECK(r.channel(l, k, j).size() == 8);
                    CHECK(r.channel(l, k, j).allFinite());
                }
        for (int t = 0; t < r.T; ++t)
            for (int l = 0; l < 2; ++l)
                CHECK(r.nc_power(t, l) > 0);
        CHECK_THROWS_AS(r.power(0, 3, 0), ConfigError);
    }
}

TEST_CASE("concatenated channel ordering", "[cellular_model]")
{
    PowerModel m;
    auto rng = make_rng(6);
    {
        const auto r = draw_realization(make_layout("two_cell", 1, 0), m, 1, 1, rng);
        const CMatrix H = build_concatenated_channel(r, 0);
        CHECK(H.rows() == 1);
        CHECK(H.cols() == 1);
        CHECK(H.row(0) == r.channel(0, 0, 0));
    }
    auto r = draw_realization(make_layout("two_cell", 2, 0), m, 2, 4, rng);
    for (int k = 0; k < 2; ++k)
    {
        const CMatrix H = build_concatenated_channel(r, k);
        CHECK(H.rows() == 4);
        CHECK(H.cols() == 4);
        // user 1 of cell 2 sits in row 3 (0-based)
        CHECK(H.row(3) == r.channel(1, 1, k));
        for (int c = 0; c < 2; ++c)
            for (int l = 0; l < 2; ++l)
                CHECK(H.row(c * 2 + l) == r.channel(l, c, k));
        CHECK(build_concatenated_channel(r, k) == H);
    }
    // swapping the two users of cell 0 swaps rows 0 and 1
    const CMatrix before = build_concatenated_channel(r, 0);
    for (int j = 0; j < r.num_tx(); ++j)
    {
        std::swap(r.channels[r.link(0, 0, j)], r.channels[r.link(1, 0, j)]);
        std::swap(r.gains[r.link(0, 0, j)], r.gains[r.link(1, 0, j)]);
    }
    const CMatrix after = build_concatenated_channel(r, 0);
    CHECK(after.row(0) == before.row(1));
    CHECK(after.row(1) == before.row(0));
    CHECK(after.bottomRows(2) == before.bottomRows(2));

    const auto wide = draw_realization(make_layout("three_cell", 3, 0), m, 2, 4, rng);
    CHECK_THROWS_AS(build_concatenated_channel(wide, 0), ConfigError);
}
