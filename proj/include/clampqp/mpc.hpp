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

#include <optional>

#include "clampqp/problem.hpp"
#include "clampqp/types.hpp"

namespace clampqp::mpc {

/// Discrete-time linear dynamics x+ = A x + B u.
struct LinearSystem {
  Mat A;  ///< nx x nx state transition
  Mat B;  ///< nx x nu control map

  Index nx() const { return A.rows(); }
  Index nu() const { return B.cols(); }
};

/// Rank of the controllability matrix [B, AB, ..., A^{nx-1}B].
Index controllability_rank(const LinearSystem& sys);

struct MpcWeights {
  Mat Q;    ///< nx x nx stage state weight (PSD)
  Mat R;    ///< nu x nu stage control weight (PD)
  Mat Q_N;  ///< nx x nx terminal weight (PSD)
  int horizon = 1;
};

struct BoxLimits {
  Vec u_lo;
  Vec u_hi;
  std::optional<Vec> x_lo;
  std::optional<Vec> x_hi;

  static BoxLimits control_only(const Vec& lo, const Vec& hi) { return {lo, hi, {}, {}}; }
  static BoxLimits symmetric_control(Index nu, double magnitude) {
    return control_only(Vec::Constant(nu, -magnitude), Vec::Constant(nu, magnitude));
  }
};

/// Direct (sparse-style) formulation over y = [u0; x1; u1; ...; xN]: cost
/// blockdiag(R, Q, ..., Q_N), dynamics rows (B, -I) / (A, B, -I) with
/// c = d = [-A x0; 0; ...], then control-limit rows at each u_k and, when x
/// limits are present, state-limit rows at x_1..x_N.
QProblem build_direct_mpc(const LinearSystem& sys, const MpcWeights& weights,
                          const BoxLimits& limits, const Vec& x0);

struct LqrResult {
  Mat P;  ///< infinite-horizon cost-to-go (DARE fixed point)
  Mat K;  ///< feedback gain; A - BK is Schur-stable
};

/// Fixed-point Riccati iteration from P = Q until the DARE defect is <= tol.
LqrResult lqr_gain(const LinearSystem& sys, const Mat& Q, const Mat& R,
                   double tol = 1e-10, int max_iters = 10000);

/// Weights with the terminal cost set to the DARE cost-to-go.
MpcWeights lqr_terminal_weights(const LinearSystem& sys, Mat Q, Mat R, int horizon);

/// Condensed formulation under the substitution u_k = -K x_k + du_k:
/// y = S yt + M x0 with yt the stacked du. The dynamics rows disappear (they
/// hold by construction); only the limit rows survive, transformed by S and
/// offset by M x0.
struct CondensedTemplate {
  Mat K;         ///< nu x nx feedback gain used as preconditioner
  Mat Abar;      ///< A - BK
  Mat S;         ///< N(nx+nu) x N*nu map from du-stack to the direct layout
  Mat M;         ///< N(nx+nu) x nx map from x0
  Mat Hbar;      ///< S'HS, positive-definite
  Mat Gbar;      ///< limit rows of the direct G times S
  Mat offset_g;  ///< S'HM; g(x0) = offset_g * x0
  Mat offset_c;  ///< G_limits * M; bounds shift by offset_c * x0
  Vec c_base;
  Vec d_base;
  Index nx = 0;
  Index nu = 0;
  int horizon = 0;
};

/// Builds the template. K must be stabilizing (spectral radius of A - BK
/// < 1), otherwise the conditioning guarantee is void and the call throws.
CondensedTemplate build_condensed_mpc(const LinearSystem& sys, const MpcWeights& weights,
                                      const BoxLimits& limits, const Mat& K);

/// The condensed QP at a given initial state. H and G are shared with the
/// template; only g, c, d depend on x0.
QProblem instantiate(const CondensedTemplate& tmpl, const Vec& x0);

struct Trajectory {
  Mat states;    ///< nx x N, columns x_1..x_N
  Mat controls;  ///< nu x N, columns u_0..u_{N-1}
};

/// Unpacks y = S yt + M x0 into states and controls; u_k = -K x_k + du_k
/// holds by construction.
Trajectory recover_trajectory(const CondensedTemplate& tmpl, const Vec& ytilde,
                              const Vec& x0);

struct ConditionReport {
  double cond_naive = 0.0;  ///< condensed Hessian condition number with K = 0
  double cond_lqr = 0.0;    ///< same with the LQR gain
};

/// Singular-value condition numbers of the condensed Hessian, naive
/// single-shooting (K = 0) versus LQR-preconditioned. The naive Hessian is
/// formed even for unstable A (that growth is the point of the comparison).
ConditionReport condition_report(const LinearSystem& sys, const MpcWeights& weights,
                                 int horizon);

}  // namespace clampqp::mpc
