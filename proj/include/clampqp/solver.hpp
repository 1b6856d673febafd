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
#include <utility>
#include <vector>

#include "clampqp/layers.hpp"
#include "clampqp/problem.hpp"
#include "clampqp/types.hpp"

namespace clampqp {

/// Stacked iterate v = [y (n); z (m); lambda (m)] in the cache's operating
/// space. After any iterate step the z block lies inside [c, d].
struct IterateVector {
  Vec v;
  Index n = 0;
  Index m = 0;

  static IterateVector zero(Index n, Index m) {
    return {Vec::Zero(n + 2 * m), n, m};
  }

  auto y() const { return v.head(n); }
  auto z() const { return v.segment(n, m); }
  auto lambda() const { return v.tail(m); }
};

struct SolverSettings {
  double eps_prim = 1e-6;
  double eps_dual = 1e-6;
  int check_interval = 25;  ///< residual checks and penalty switches happen here
  int max_iters = 4000;
  double sigma = 1e-6;
  int grid_points = 13;  ///< half-decade steps over [1e-3, 1e3]
  double rho_switch_threshold = 5.0;
  bool adaptive_rho = true;
  Equilibration equilibration{};
};

/// Residuals and active grid point at one convergence check.
struct ResidualSample {
  int iteration = 0;
  double r_prim = 0.0;
  double r_dual = 0.0;
  int grid_index = 0;
};

struct SolveReport {
  Solution solution;
  double wall_ms = 0.0;
  std::vector<ResidualSample> residual_history;
};

/// One fused layer application: v+ = clamp(W v + b, c~, d~).
Vec iterate(const Vec& v, const Mat& W, const Vec& b, const Vec& c_tilde,
            const Vec& d_tilde);

/// Infinity-norm primal/dual residuals ||Gy - z|| and ||Hy + g + G'lambda||
/// on the problem as given (callers pass unscaled quantities).
std::pair<double, double> residuals(const Vec& y, const Vec& z, const Vec& lambda,
                                    const QProblem& p);

/// Nominal penalty from the residual ratio rule. Returns current_rho
/// unchanged when either residual is zero.
double rho_nominal(double r_prim, double r_dual, const Vec& y, const Vec& z,
                   const Vec& lambda, const QProblem& p, double current_rho);

/// Grid point log-nearest rho_nom, with hysteresis: switch only when
/// rho_nom and the current grid value differ by at least `threshold`.
int select_layer(double rho_nom, const PenaltyGrid& grid, int current_index,
                 double threshold);

/// Warm start from a previous solution: v = [y; G y; lambda] mapped into the
/// cache's space, starting grid index = the previous solve's final index.
std::pair<IterateVector, int> warm_start(const Solution& prev, const LayerCache& cache);

/// Online stage: run the fused iteration from a cold start (or `warm`) until
/// both residuals pass at a check point or max_iters. The reported solution
/// is in original (unscaled) units.
SolveReport solve(const QProblem& p, const LayerCache& cache, const SolverSettings& s,
                  const std::optional<Solution>& warm = std::nullopt);

/// Runs exactly k iterations with no convergence early-exit (penalty switches
/// still happen at check points) and returns the current iterate.
SolveReport fixed_iters(const QProblem& p, const LayerCache& cache,
                        const SolverSettings& s, int k,
                        const std::optional<Solution>& warm = std::nullopt);

/// Convenience wrapper owning the offline stage and a persistent iterate, the
/// shape an MPC loop wants: build once, then per step update_vectors +
/// refresh_z + fixed_iters.
class Solver {
 public:
  explicit Solver(QProblem p, SolverSettings settings = {});

  void cold_start();
  void warm_start(const Solution& prev);
  /// Re-projects the z block to G y, keeping y, lambda and the grid index
  /// (the between-steps warm-start rule).
  void refresh_z();

  SolveReport solve();
  SolveReport fixed_iters(int k);

  /// New g, c, d with H, G unchanged; rebuilds biases and clamp bounds.
  void update_vectors(const Vec& g, const Vec& c, const Vec& d);

  const QProblem& problem() const { return problem_; }
  const LayerCache& cache() const { return cache_; }
  const SolverSettings& settings() const { return settings_; }
  const IterateVector& state() const { return state_; }
  int layer_index() const { return layer_index_; }

 private:
  QProblem problem_;
  SolverSettings settings_;
  LayerCache cache_;
  IterateVector state_;
  int layer_index_ = 0;
};

}  // namespace clampqp
