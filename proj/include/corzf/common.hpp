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

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace corzf
{

inline constexpr const char *kVersion = "0.1.0";

using cdouble = std::complex<double>;
using CVector = Eigen::RowVectorXcd; // 1 x M channel row
using CMatrix = Eigen::MatrixXcd;

/// Invalid experiment or layout parameters.
class ConfigError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

/// A closed-form evaluation cannot reach the requested accuracy.
class PrecisionError : public std::range_error
{
  public:
    using std::range_error::range_error;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

} // namespace corzf
