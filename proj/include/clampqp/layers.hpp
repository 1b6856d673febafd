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

#include <utility>
#include <vector>

#include "clampqp/problem.hpp"
#include "clampqp/types.hpp"

namespace clampqp {

/// Ordered list of base penalty values, log-spaced over [1e-3, 1e3].
/// Equality rows always get eq_scale times the base value.
struct PenaltyGrid {
  std::vector<double> values;
  double eq_scale = 1e3;
  int initial_index = 0;

  double value(int k) const { return values[static_cast<size_t>(k)]; }
  int size() const { return static_cast<int>(values.size()); }
};

/// Log-spaced grid from 1e-3 to 1e3 inclusive with n_points entries; the
/// initial index is the point log-nearest 0.1 (ties -> smaller value).
PenaltyGrid build_penalty_grid(int n_points);

/// Index of the grid value log-nearest `rho` (ties -> smaller value).
int nearest_grid_index(const PenaltyGrid& grid, double rho);

/// Diagonal equilibration of a problem. scaled = apply(original):
///   H_s = cost_scale * E H E,  g_s = cost_scale * E g,
///   G_s = F G E,  c_s = F c,  d_s = F d.
struct Scaling {
  Vec E;                    ///< n positive per-variable scales
  Vec F;                    ///< m positive per-row scales
  double cost_scale = 1.0;  ///< positive scalar on the objective

  static Scaling identity(Index n, Index m);

  QProblem apply(const QProblem& p) const;
  QProblem unapply(const QProblem& p) const;

  // Solution maps between the scaled and original spaces.
  Vec unscale_y(const Vec& y_s) const { return E.cwiseProduct(y_s); }
  Vec unscale_z(const Vec& z_s) const { return z_s.cwiseQuotient(F); }
  Vec unscale_lambda(const Vec& l_s) const { return F.cwiseProduct(l_s) / cost_scale; }
  Vec scale_y(const Vec& y) const { return y.cwiseQuotient(E); }
  Vec scale_z(const Vec& z) const { return F.cwiseProduct(z); }
  Vec scale_lambda(const Vec& l) const { return cost_scale * l.cwiseQuotient(F); }
};

/// Ruiz-style equilibration on the stacked symmetric matrix [[H, G'], [G, 0]].
/// Each pass divides every row/column by the square root of its infinity norm
/// (zero rows keep scale 1) and stops early once all scales change by less
/// than `tol`; a final scalar pass normalizes the cost by
/// max(1, mean row infinity-norm of the scaled H).
std::pair<QProblem, Scaling> ruiz_equilibrate(const QProblem& p, int max_passes = 10,
                                              double tol = 1e-3);

/// D = (H + sigma I + G' diag(rho_vec) G)^{-1}. Throws on factorization
/// failure rather than regularizing.
Mat build_kkt_inverse(const Mat& H, const Mat& G, double sigma, const Vec& rho_vec);

/// One penalty grid point's precomputed iteration data. The fused update is
/// v+ = clamp(W v + b, c~, d~) with v = [y; z; lambda] and
///
///        [ D(sI - G'rG)      2 D G'r       -D G'        ]
///   W  = [ GD(sI - G'rG) + G 2 GD G'r - I  -GD G' + r^-1 ],  b = [-D; -GD; 0] g,
///        [ rG                -r            I            ]
///
/// where r = diag(rho_vec) and s = sigma.
struct Layer {
  Mat W;            ///< (n+2m) x (n+2m) fused iteration matrix
  Mat D;            ///< n x n KKT inverse
  Mat GD;           ///< m x n cached G * D for bias updates
  Vec rho_vec;      ///< m per-row penalties
  Vec rho_inv_vec;  ///< elementwise inverse
  Vec b;            ///< (n+2m) bias for the current g
  double rho_base = 0.0;
};

Layer build_layer(const Mat& H, const Mat& G, const Vec& g, double sigma,
                  const Vec& rho_vec, const Mat& D);

/// Re-evaluates the bias for a new linear cost using the cached D and GD.
Vec layer_bias(const Layer& layer, const Vec& g);

struct Equilibration {
  bool enabled = true;
  int max_passes = 10;
  double tol = 1e-3;
};

/// The solver's "weights": one Layer per grid point plus shared clamp bounds
/// c~ = [-inf(n); c; -inf(m)], d~ = [+inf(n); d; +inf(m)]. `problem` is the
/// (equilibrated, when enabled) problem the layers were built for; `scaling`
/// maps back to the original.
struct LayerCache {
  QProblem problem;
  Scaling scaling;
  PenaltyGrid grid;
  double sigma = 1e-6;
  std::vector<Layer> layers;
  Vec c_tilde;
  Vec d_tilde;

  Index n() const { return problem.num_vars(); }
  Index m() const { return problem.num_constraints(); }
  const Layer& layer(int k) const { return layers[static_cast<size_t>(k)]; }

  /// MPC fast path: new g, c, d in ORIGINAL units with H, G unchanged.
  /// Rescales them, rebuilds every layer's bias and the clamp bounds.
  void update_vectors(const Vec& g, const Vec& c, const Vec& d);
};

/// Offline stage: optionally equilibrate, then build every grid point's
/// (W, b, D). Per-row penalties are rho_vec[i] = eq_scale * value on equality
/// rows (c_i == d_i) and value on inequality rows.
LayerCache precompute_all(const QProblem& p, const PenaltyGrid& grid, double sigma,
                          const Equilibration& eq = {});

}  // namespace clampqp
