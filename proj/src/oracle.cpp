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

#include "clampqp/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace clampqp::oracle {

namespace {

Vec kkt_solve(const QProblem& p, double sigma, const Vec& rho_vec, const Vec& rhs) {
  Mat kkt = p.H + sigma * Mat::Identity(p.num_vars(), p.num_vars());
  kkt.noalias() += p.G.transpose() * rho_vec.asDiagonal() * p.G;
  Eigen::LLT<Mat> llt(kkt);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("oracle: KKT factorization failed");
  }
  return llt.solve(rhs);
}

Vec project_box(const Vec& v, const Vec& lo, const Vec& hi) {
  return v.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

AdmmState admm_step_original(const AdmmState& state, const QProblem& p, double sigma,
                             const Vec& rho_vec) {
  if (sigma <= 0.0) {
    throw std::invalid_argument("admm_step_original: sigma must be > 0 (the y update divides by it)");
  }

  AdmmState next;
  const Vec rhs = -p.g + sigma * state.y - state.mu +
                  p.G.transpose() * (rho_vec.cwiseProduct(state.z) - state.lambda);
  next.ybar = kkt_solve(p, sigma, rho_vec, rhs);
  next.y = next.ybar + state.mu / sigma;
  next.z = project_box(p.G * next.ybar + rho_vec.cwiseInverse().cwiseProduct(state.lambda),
                       p.c, p.d);
  // The mu update mu + sigma (ybar+ - y+) cancels mu identically once the
  // y update is substituted in; carrying the cancellation out in exact
  // arithmetic keeps mu at zero from the first step onward.
  next.mu = Vec::Zero(p.num_vars());
  next.lambda =
      state.lambda + rho_vec.cwiseProduct(Vec(p.G * next.y - next.z));
  return next;
}

ReorderedState admm_step_reordered(const ReorderedState& state, const QProblem& p,
                                   double sigma, const Vec& rho_vec) {
  ReorderedState next;
  next.lambda =
      state.lambda + rho_vec.cwiseProduct(Vec(p.G * state.y - state.z));
  const Vec rhs = -p.g + sigma * state.y +
                  p.G.transpose() * (rho_vec.cwiseProduct(state.z) - next.lambda);
  next.y = kkt_solve(p, sigma, rho_vec, rhs);
  next.z = project_box(p.G * next.y + rho_vec.cwiseInverse().cwiseProduct(next.lambda),
                       p.c, p.d);
  return next;
}

Solution brute_force_kkt(const QProblem& p) {
  const Index n = p.num_vars();
  const Index m = p.num_constraints();
  if (m > 12) throw std::invalid_argument("brute_force_kkt: m must be <= 12");

  enum RowState { kInactive, kLowerActive, kUpperActive };

  // Allowed states per row; equality rows have a single (active) state.
  std::vector<std::vector<RowState>> allowed(static_cast<size_t>(m));
  for (Index i = 0; i < m; ++i) {
    auto& states = allowed[static_cast<size_t>(i)];
    if (p.c[i] == p.d[i]) {
      states = {kLowerActive};
    } else {
      states.push_back(kInactive);
      if (std::isfinite(p.c[i])) states.push_back(kLowerActive);
      if (std::isfinite(p.d[i])) states.push_back(kUpperActive);
    }
  }

  constexpr double kFeasTol = 1e-8;
  constexpr double kSignTol = 1e-9;

  bool found = false;
  double best_obj = kInf;
  Vec best_y, best_lambda;

  std::vector<size_t> counter(static_cast<size_t>(m), 0);
  while (true) {
    std::vector<Index> active;
    for (Index i = 0; i < m; ++i) {
      if (allowed[static_cast<size_t>(i)][counter[static_cast<size_t>(i)]] != kInactive) {
        active.push_back(i);
      }
    }
    const Index na = static_cast<Index>(active.size());

    // Equality-constrained KKT system for this active set.
    Mat kkt = Mat::Zero(n + na, n + na);
    kkt.topLeftCorner(n, n) = p.H;
    Vec rhs(n + na);
    rhs.head(n) = -p.g;
    for (Index a = 0; a < na; ++a) {
      const Index row = active[static_cast<size_t>(a)];
      kkt.block(n + a, 0, 1, n) = p.G.row(row);
      kkt.block(0, n + a, n, 1) = p.G.row(row).transpose();
      const RowState st =
          allowed[static_cast<size_t>(row)][counter[static_cast<size_t>(row)]];
      rhs[n + a] = st == kUpperActive ? p.d[row] : p.c[row];
    }

    Eigen::FullPivLU<Mat> lu(kkt);
    if (lu.isInvertible()) {
      const Vec sol = lu.solve(rhs);
      const Vec y = sol.head(n);
      Vec lambda = Vec::Zero(m);
      for (Index a = 0; a < na; ++a) lambda[active[static_cast<size_t>(a)]] = sol[n + a];

      const Vec gy = p.G * y;
      bool ok = true;
      for (Index i = 0; i < m && ok; ++i) {
        const double tol_lo = kFeasTol * std::max(1.0, std::isfinite(p.c[i]) ? std::abs(p.c[i]) : 1.0);
        const double tol_hi = kFeasTol * std::max(1.0, std::isfinite(p.d[i]) ? std::abs(p.d[i]) : 1.0);
        if (gy[i] < p.c[i] - tol_lo || gy[i] > p.d[i] + tol_hi) ok = false;
        const RowState st = allowed[static_cast<size_t>(i)][counter[static_cast<size_t>(i)]];
        if (p.c[i] != p.d[i]) {
          const double sign_tol = kSignTol * std::max(1.0, std::abs(lambda[i]));
          if (st == kUpperActive && lambda[i] < -sign_tol) ok = false;
          if (st == kLowerActive && lambda[i] > sign_tol) ok = false;
        }
      }

      if (ok) {
        const double obj = 0.5 * y.dot(p.H * y) + p.g.dot(y);
        if (!found || obj < best_obj) {
          found = true;
          best_obj = obj;
          best_y = y;
          best_lambda = lambda;
        }
      }
    }

    // Mixed-radix increment over the allowed states.
    Index pos = 0;
    while (pos < m) {
      auto& digit = counter[static_cast<size_t>(pos)];
      if (++digit < allowed[static_cast<size_t>(pos)].size()) break;
      digit = 0;
      ++pos;
    }
    if (pos == m) break;
  }

  if (!found) throw std::runtime_error("brute_force_kkt: no feasible active set (infeasible problem)");

  Solution sol;
  sol.y = best_y;
  sol.lambda = best_lambda;
  sol.z = project_box(p.G * best_y, p.c, p.d);
  sol.status = SolveStatus::Solved;
  sol.iterations = 0;
  sol.r_prim = inf_norm(Vec(p.G * best_y - sol.z));
  sol.r_dual = inf_norm(Vec(p.H * best_y + p.g + p.G.transpose() * best_lambda));
  return sol;
}

}  // namespace clampqp::oracle
