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
#include "corzf/config.hpp"
#include "corzf/harness.hpp"
#include "corzf/oracles.hpp"
#include "corzf/precoding.hpp"
#include "corzf/rng.hpp"
#include "corzf/rvq_feedback.hpp"
#include "corzf/sim_engine.hpp"
#include "corzf/special_functions.hpp"
#include "corzf/wishart_analytics.hpp"
