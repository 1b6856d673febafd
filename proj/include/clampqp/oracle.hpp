// Copyright 2026 The clampqp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "clampqp/problem.hpp"
#include "clampqp/types.hpp"

// Reference implementations used by the test suites: the sequential ADMM
// updates in both their original and reordered forms, and a brute-force
// active-set enumerator for tiny problems. None of these share code with the
// fused solver path.

namespace clampqp::oracle {

/// State of the original-order splitting: (ybar, y, z, mu, lambda). After one
/// full step mu is exactly zero and stays there, so ybar and y coincide from
/// the second step onward.
struct AdmmState {
  Vec ybar;
  Vec y;
  Vec z;
  Vec mu;
  Vec lambda;

  static AdmmState zero(Index n, Index m) {
    return {Vec::Zero(n), Vec::Zero(n), Vec::Zero(m), Vec::Zero(n), Vec::Zero(m)};
  }
};

/// One step of the original update order (ybar, y, z, mu, lambda). Rejects
/// sigma == 0, which the y update divides by.
AdmmState admm_step_original(const AdmmState& state, const QProblem& p, double sigma,
                             const Vec& rho_vec);

/// State of the reordered form: just (y, z, lambda).
struct ReorderedState {
  Vec y;
  Vec z;
  Vec lambda;

  static ReorderedState zero(Index n, Index m) {
    return {Vec::Zero(n), Vec::Zero(m), Vec::Zero(m)};
  }
};

/// One step of the reordered update (lambda first, then y, then the clamped
/// z), computed with explicit sequential linear solves — no cached fused
/// matrix anywhere in this path.
ReorderedState admm_step_reordered(const ReorderedState& state, const QProblem& p,
                                   double sigma, const Vec& rho_vec);

/// Ground truth by enumerating all 3^m {lower-active, upper-active, inactive}
/// row assignments (skipping impossible ones) and returning the feasible
/// KKT-consistent candidate with minimum objective. Requires m <= 12.
/// Throws if no candidate is feasible.
Solution brute_force_kkt(const QProblem& p);

}  // namespace clampqp::oracle
