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

#include "clampqp/solver.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace clampqp {

namespace {

bool dims_match(const QProblem& p, const LayerCache& cache) {
  return p.num_vars() == cache.n() && p.num_constraints() == cache.m();
}

void check_settings(const SolverSettings& s) {
  if (s.check_interval < 1) throw std::invalid_argument("check_interval must be >= 1");
  if (s.max_iters < s.check_interval) {
    throw std::invalid_argument("max_iters must be >= check_interval");
  }
}

Solution invalid_solution() {
  Solution sol;
  sol.status = SolveStatus::Invalid;
  return sol;
}

// Shared online loop. `early_exit` distinguishes solve() from fixed_iters().
SolveReport run_loop(const QProblem& p, const LayerCache& cache,
                     const SolverSettings& s, IterateVector& state, int& layer_index,
                     bool early_exit, int total_iters) {
  const auto t0 = std::chrono::steady_clock::now();

  SolveReport report;
  Solution& sol = report.solution;
  sol.rho_trace.push_back({0, layer_index});

  const Index n = cache.n();
  const Index m = cache.m();
  Vec next(n + 2 * m);

  bool converged = false;
  int iters_done = 0;
  for (int i = 1; i <= total_iters; ++i) {
    const Layer& layer = cache.layer(layer_index);
    next.noalias() = layer.W * state.v;
    next += layer.b;
    state.v = next.cwiseMax(cache.c_tilde).cwiseMin(cache.d_tilde);
    iters_done = i;

    if (i % s.check_interval != 0) continue;

    const Vec y = cache.scaling.unscale_y(state.y());
    const Vec z = cache.scaling.unscale_z(state.z());
    const Vec lam = cache.scaling.unscale_lambda(state.lambda());
    const auto [r_prim, r_dual] = residuals(y, z, lam, p);
    report.residual_history.push_back({i, r_prim, r_dual, layer_index});

    if (s.adaptive_rho) {
      const double rho_cur = cache.grid.value(layer_index);
      const double rho_nom = rho_nominal(r_prim, r_dual, y, z, lam, p, rho_cur);
      const int candidate =
          select_layer(rho_nom, cache.grid, layer_index, s.rho_switch_threshold);
      if (candidate != layer_index) {
        layer_index = candidate;
        sol.rho_trace.push_back({i, candidate});
      }
    }

    if (early_exit && r_prim <= s.eps_prim && r_dual <= s.eps_dual) {
      converged = true;
      break;
    }
  }

  sol.y = cache.scaling.unscale_y(state.y());
  sol.z = cache.scaling.unscale_z(state.z());
  sol.lambda = cache.scaling.unscale_lambda(state.lambda());
  // Unscaling can round an ulp outside the box; the contract is exact.
  sol.z = sol.z.cwiseMax(p.c).cwiseMin(p.d);
  std::tie(sol.r_prim, sol.r_dual) = residuals(sol.y, sol.z, sol.lambda, p);
  sol.iterations = iters_done;
  sol.status = (converged || (sol.r_prim <= s.eps_prim && sol.r_dual <= s.eps_dual))
                   ? SolveStatus::Solved
                   : SolveStatus::MaxIters;

  report.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return report;
}

}  // namespace

Vec iterate(const Vec& v, const Mat& W, const Vec& b, const Vec& c_tilde,
            const Vec& d_tilde) {
  if (v.size() != W.cols() || b.size() != W.rows() || c_tilde.size() != W.rows() ||
      d_tilde.size() != W.rows()) {
    throw std::invalid_argument("iterate: dimension mismatch");
  }
  Vec next = W * v + b;
  return next.cwiseMax(c_tilde).cwiseMin(d_tilde);
}

std::pair<double, double> residuals(const Vec& y, const Vec& z, const Vec& lambda,
                                    const QProblem& p) {
  const double r_prim = inf_norm(Vec(p.G * y - z));
  const double r_dual = inf_norm(Vec(p.H * y + p.g + p.G.transpose() * lambda));
  return {r_prim, r_dual};
}

double rho_nominal(double r_prim, double r_dual, const Vec& y, const Vec& z,
                   const Vec& lambda, const QProblem& p, double current_rho) {
  if (r_prim == 0.0 || r_dual == 0.0) return current_rho;
  const double num_scale = std::max({inf_norm(Vec(p.H * y)),
                                     inf_norm(Vec(p.G.transpose() * lambda)),
                                     inf_norm(p.g), 1e-4});
  const double den_scale = std::max({inf_norm(Vec(p.G * y)), inf_norm(z), 1e-4});
  return current_rho * std::sqrt((r_prim * num_scale) / (r_dual * den_scale));
}

int select_layer(double rho_nom, const PenaltyGrid& grid, int current_index,
                 double threshold) {
  const int candidate = nearest_grid_index(grid, rho_nom);
  const double rho_cur = grid.value(current_index);
  const double ratio = std::max(rho_nom / rho_cur, rho_cur / rho_nom);
  return ratio >= threshold ? candidate : current_index;
}

std::pair<IterateVector, int> warm_start(const Solution& prev, const LayerCache& cache) {
  if (prev.y.size() != cache.n() || prev.lambda.size() != cache.m()) {
    throw std::invalid_argument("warm_start: dimension mismatch");
  }
  IterateVector state = IterateVector::zero(cache.n(), cache.m());
  const Vec y_s = cache.scaling.scale_y(prev.y);
  state.v.head(cache.n()) = y_s;
  state.v.segment(cache.n(), cache.m()).noalias() = cache.problem.G * y_s;
  state.v.tail(cache.m()) = cache.scaling.scale_lambda(prev.lambda);
  const int index =
      prev.rho_trace.empty() ? cache.grid.initial_index : prev.rho_trace.back().grid_index;
  return {std::move(state), index};
}

SolveReport solve(const QProblem& p, const LayerCache& cache, const SolverSettings& s,
                  const std::optional<Solution>& warm) {
  check_settings(s);
  if (!dims_match(p, cache)) return {invalid_solution(), 0.0, {}};
  IterateVector state = IterateVector::zero(cache.n(), cache.m());
  int index = cache.grid.initial_index;
  if (warm) std::tie(state, index) = warm_start(*warm, cache);
  return run_loop(p, cache, s, state, index, /*early_exit=*/true, s.max_iters);
}

SolveReport fixed_iters(const QProblem& p, const LayerCache& cache,
                        const SolverSettings& s, int k,
                        const std::optional<Solution>& warm) {
  check_settings(s);
  if (k < 1) throw std::invalid_argument("fixed_iters: k must be >= 1");
  if (!dims_match(p, cache)) return {invalid_solution(), 0.0, {}};
  IterateVector state = IterateVector::zero(cache.n(), cache.m());
  int index = cache.grid.initial_index;
  if (warm) std::tie(state, index) = warm_start(*warm, cache);
  return run_loop(p, cache, s, state, index, /*early_exit=*/false, k);
}

Solver::Solver(QProblem p, SolverSettings settings)
    : problem_(validate(std::move(p))), settings_(settings) {
  check_settings(settings_);
  cache_ = precompute_all(problem_, build_penalty_grid(settings_.grid_points),
                          settings_.sigma, settings_.equilibration);
  cold_start();
}

void Solver::cold_start() {
  state_ = IterateVector::zero(cache_.n(), cache_.m());
  layer_index_ = cache_.grid.initial_index;
}

void Solver::warm_start(const Solution& prev) {
  std::tie(state_, layer_index_) = clampqp::warm_start(prev, cache_);
}

void Solver::refresh_z() {
  state_.v.segment(cache_.n(), cache_.m()).noalias() =
      cache_.problem.G * state_.v.head(cache_.n());
}

SolveReport Solver::solve() {
  return run_loop(problem_, cache_, settings_, state_, layer_index_,
                  /*early_exit=*/true, settings_.max_iters);
}

SolveReport Solver::fixed_iters(int k) {
  if (k < 1) throw std::invalid_argument("fixed_iters: k must be >= 1");
  return run_loop(problem_, cache_, settings_, state_, layer_index_,
                  /*early_exit=*/false, k);
}

void Solver::update_vectors(const Vec& g, const Vec& c, const Vec& d) {
  cache_.update_vectors(g, c, d);
  problem_.g = g;
  problem_.c = c;
  problem_.d = d;
}

}  // namespace clampqp
