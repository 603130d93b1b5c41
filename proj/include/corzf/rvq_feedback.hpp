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

#include <cmath>
#include <span>
#include <string>

namespace corzf
{

/// Largest codebook searched exhaustively; beyond this the error model is used.
inline constexpr int kExactMaxBits = 14;

/// 2^B i.i.d. isotropic unit vectors, one per row.
struct Codebook
{
    int B = 0;
    CMatrix entries;

    int M() const { return static_cast<int>(entries.cols()); }
    Eigen::Index size() const { return entries.rows(); }
};

/// Fresh RVQ codebook. B = 0 yields a single random direction (no feedback).
inline Codebook generate_codebook(int B, int M, Rng &rng)
{
    if (B < 0)
        throw DomainError("generate_codebook: negative bit count");
    if (M < 1)
        throw ConfigError("generate_codebook: M must be >= 1");
    if (B > kExactMaxBits)
        throw ConfigError("generate_codebook: B = " + std::to_string(B) + " exceeds the exact-search limit of " +
                          std::to_string(kExactMaxBits) + " bits; use the rvq_model feedback mode");
    Codebook cb;
    cb.B = B;
    ComplexNormal cn;
    cb.entries = cn.matrix(rng, Eigen::Index{1} << B, M);
    cb.entries.rowwise().normalize();
    return cb;
}

struct QuantizedChannel
{
    CVector direction;     ///< unit-norm codeword, or normalized modeled direction
    CVector row;           ///< row handed to the precoder
    double bits = 0.0;
    double sigma_sq = 1.0; ///< modeled error variance 2^(-B / (M - 1))
    double cqi = 0.0;      ///< ||h||
    double chordal_sq = 0.0;
    Eigen::Index index = -1; ///< codeword index, -1 in model mode
};

inline double chordal_distance_sq(const CVector &a, const CVector &b)
{
    const double c = std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm());
    return std::max(0.0, 1.0 - c);
}

/// Minimum-chordal-distance codeword; ties go to the lowest index. The
/// precoder row is ||h|| times the codeword (perfect CQI).
inline QuantizedChannel quantize_cdi(const CVector &h, const Codebook &cb)
{
    if (h.size() != cb.M())
        throw ConfigError("quantize_cdi: channel and codebook dimensions differ");
    const double n2 = h.squaredNorm();
    if (!(n2 > 0))
        throw DomainError("quantize_cdi: zero channel vector");
    const Eigen::VectorXcd ip = cb.entries * h.adjoint();
    Eigen::Index best = 0;
    double best_v = std::norm(ip(0));
    for (Eigen::Index i = 1; i < ip.size(); ++i)
    {
        const double v = std::norm(ip(i));
        if (v > best_v)
        {
            best_v = v;
            best = i;
        }
    }
    QuantizedChannel q;
    q.direction = cb.entries.row(best);
    q.cqi = std::sqrt(n2);
    q.row = q.cqi * q.direction;
    q.bits = cb.B;
    q.sigma_sq = cb.M() > 1 ? std::exp2(-static_cast<double>(cb.B) / (cb.M() - 1)) : 0.0;
    q.chordal_sq = std::max(0.0, 1.0 - best_v / n2);
    q.index = best;
    return q;
}

/// Error-model quantization of the true channel h with B bits (B may be
/// +infinity). h = h_hat + e with
///   h_hat = (1 - s2) h + sqrt(s2 (1 - s2)) n,   e = h - h_hat,
/// n ~ CN(0, I) drawn from `rng`, so that h_hat ~ CN(0, (1 - s2) I) and
/// e ~ CN(0, s2 I) are independent. The precoder row is
/// h_hat / sqrt(1 - s2) = sqrt(1 - s2) h + sqrt(s2) n; at B = 0 it carries no
/// information about h.
inline QuantizedChannel model_quantize(const CVector &h, double B, Rng &rng)
{
    const auto M = h.size();
    if (M < 2)
        throw ConfigError("model_quantize: M >= 2 required");
    if (!(B >= 0))
        throw DomainError("model_quantize: negative bit count");
    const double s2 = std::isinf(B) ? 0.0 : std::exp2(-B / static_cast<double>(M - 1));
    ComplexNormal cn;
    const CVector n = cn.row(rng, M);
    QuantizedChannel q;
    q.bits = B;
    q.sigma_sq = s2;
    q.cqi = h.norm();
    q.row = std::sqrt(1.0 - s2) * h + std::sqrt(s2) * n;
    q.direction = q.row.normalized();
    q.chordal_sq = chordal_distance_sq(q.row, h);
    return q;
}

/// h_hat and e of the model decomposition, for inspection.
struct ModelSplit
{
    CVector h_hat;
    CVector error;
};

inline ModelSplit model_split(const CVector &h, const QuantizedChannel &q)
{
    ModelSplit s;
    s.h_hat = std::sqrt(1.0 - q.sigma_sq) * q.row;
    s.error = h - s.h_hat;
    return s;
}

/// Stacks quantized rows cell-major into the KL x M matrix used by the precoder.
inline CMatrix quantized_concat_matrix(std::span<const QuantizedChannel> rows, int M)
{
    if (rows.empty())
        throw ConfigError("quantized_concat_matrix: no rows");
    if (static_cast<int>(rows.size()) > M)
        throw ConfigError("quantized_concat_matrix: KL exceeds M");
    CMatrix H(static_cast<Eigen::Index>(rows.size()), M);
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        if (rows[i].row.size() != M)
            throw ConfigError("quantized_concat_matrix: row dimension mismatch");
        H.row(static_cast<Eigen::Index>(i)) = rows[i].row;
    }
    return H;
}

} // namespace corzf
