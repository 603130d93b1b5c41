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

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace corzf
{

/// Non-normalized precoder W (M x rows(H)) and its normalization gamma =
/// ||W||_F^2 / budget. The transmitted precoder is W / sqrt(gamma).
struct PrecodeMatrix
{
    CMatrix W;
    double gamma = 1.0;
    double budget = 0.0;

    CMatrix normalized() const { return W / std::sqrt(gamma); }
};

namespace detail
{
inline void check_channel(const CMatrix &H, const char *who)
{
    if (H.rows() < 1 || H.cols() < 1)
        throw ConfigError(std::string(who) + ": empty channel matrix");
    if (H.rows() > H.cols())
        throw ConfigError(std::string(who) + ": more rows (" + std::to_string(H.rows()) + ") than antennas (" +
                          std::to_string(H.cols()) + ")");
    if (!H.allFinite())
        throw DomainError(std::string(who) + ": non-finite channel entries");
}

inline PrecodeMatrix finish(CMatrix W, double budget)
{
    PrecodeMatrix p;
    p.budget = budget > 0 ? budget : static_cast<double>(W.rows());
    p.gamma = W.squaredNorm() / p.budget;
    p.W = std::move(W);
    return p;
}
} // namespace detail

/// W = H^H (H H^H + alpha I)^-1, computed as the adjoint of a Hermitian solve.
/// `budget` defaults to M.
inline PrecodeMatrix rzf_precoder(const CMatrix &H, double alpha, double budget = 0.0)
{
    detail::check_channel(H, "rzf_precoder");
    if (!(alpha > 0) || !std::isfinite(alpha))
        throw DomainError("rzf_precoder: alpha must be positive and finite");
    CMatrix G = H * H.adjoint();
    G.diagonal().array() += alpha;
    const CMatrix X = G.llt().solve(H);
    return detail::finish(X.adjoint(), budget);
}

/// Pseudo-inverse W = H^H (H H^H)^-1; H must have full row rank.
inline PrecodeMatrix zf_precoder(const CMatrix &H, double budget = 0.0)
{
    detail::check_channel(H, "zf_precoder");
    const CMatrix G = H * H.adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(G, Eigen::EigenvaluesOnly);
    const auto &ev = es.eigenvalues();
    if (!(ev(0) > 1e-12 * ev(ev.size() - 1)))
        throw DomainError("zf_precoder: channel matrix is rank deficient");
    const CMatrix X = G.ldlt().solve(H);
    return detail::finish(X.adjoint(), budget);
}

enum class RegKind
{
    single_cell_avg, ///< mean of 1 / P over the cell's own users
    multicell_avg,   ///< mean of 1 / P over every coordinated link of the BS
    grid_opt,        ///< per-cell argmax of the instantaneous sum rate
    fixed,
};

struct RegStrategy
{
    RegKind kind = RegKind::multicell_avg;
    double fixed_alpha = 1.0;
    double grid_min = 1e-4;
    double grid_max = 1e3;
    int grid_points = 200;
};

inline const char *to_string(RegKind k)
{
    switch (k)
    {
    case RegKind::single_cell_avg:
        return "single_cell_avg";
    case RegKind::multicell_avg:
        return "multicell_avg";
    case RegKind::grid_opt:
        return "grid_opt";
    case RegKind::fixed:
        return "fixed";
    }
    return "?";
}

/// Mean of reciprocal powers. Serves both averaging rules: pass the L
/// serving powers of cell k, or all KL powers from BS k.
inline double reg_inverse_mean(std::span<const double> powers)
{
    if (powers.empty())
        throw ConfigError("reg_param: no powers given");
    double s = 0.0;
    for (double p : powers)
    {
        if (!(p > 0))
            throw DomainError("reg_param: powers must be positive");
        s += 1.0 / p;
    }
    return s / static_cast<double>(powers.size());
}

/// `count` log-spaced points over [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, int count)
{
    if (!(lo > 0) || !(hi > lo) || count < 2)
        throw ConfigError("log_grid: need 0 < lo < hi and count >= 2");
    std::vector<double> g(static_cast<std::size_t>(count));
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < count; ++i)
        g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

struct GridResult
{
    double alpha = 0.0;
    double objective = 0.0;
};

/// Maximizer of `objective` over `grid`; the first maximizer wins ties.
template <class F>
GridResult grid_search(std::span<const double> grid, F &&objective)
{
    if (grid.empty())
        throw ConfigError("grid_search: empty grid");
    GridResult best{grid[0], objective(grid[0])};
    for (std::size_t i = 1; i < grid.size(); ++i)
    {
        const double v = objective(grid[i]);
        if (v > best.objective)
            best = {grid[i], v};
    }
    return best;
}

/// Eigendecomposition of H H^H for cheap evaluation of the RZF response over
/// many alphas: h W(alpha) = (h H^H Q) diag(1 / (lambda + alpha)) Q^H.
class RzfSpectrum
{
  public:
    explicit RzfSpectrum(const CMatrix &H) : H_(H)
    {
        detail::check_channel(H, "RzfSpectrum");
        Eigen::SelfAdjointEigenSolver<CMatrix> es(H * H.adjoint());
        lambda_ = es.eigenvalues().cwiseMax(0.0);
        Q_ = es.eigenvectors();
    }

    /// h H^H Q, reused for every alpha.
    Eigen::RowVectorXcd project(const CVector &h) const { return h * H_.adjoint() * Q_; }

    /// Row h W(alpha) from a projection.
    Eigen::RowVectorXcd response(const Eigen::RowVectorXcd &proj, double alpha) const
    {
        Eigen::RowVectorXcd s = proj.array() / (lambda_.array() + alpha).transpose().cast<cdouble>();
        return s * Q_.adjoint();
    }

    /// ||W(alpha)||_F^2 / budget.
    double gamma(double alpha, double budget) const
    {
        return ((lambda_.array() / (lambda_.array() + alpha).square()).sum()) / budget;
    }

  private:
    CMatrix H_;
    Eigen::VectorXd lambda_;
    CMatrix Q_;
};

} // namespace corzf
