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

#include "clampqp/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace clampqp {

PenaltyGrid build_penalty_grid(int n_points) {
  if (n_points < 2) throw std::invalid_argument("penalty grid needs at least 2 points");
  PenaltyGrid grid;
  grid.values.resize(static_cast<size_t>(n_points));
  const double lo = -3.0, hi = 3.0;
  for (int k = 0; k < n_points; ++k) {
    const double t = lo + (hi - lo) * k / (n_points - 1);
    grid.values[static_cast<size_t>(k)] = std::pow(10.0, t);
  }
  // Exact decade endpoints regardless of pow rounding.
  grid.values.front() = 1e-3;
  grid.values.back() = 1e3;
  grid.initial_index = nearest_grid_index(grid, 0.1);
  return grid;
}

int nearest_grid_index(const PenaltyGrid& grid, double rho) {
  const double target = std::log10(rho);
  int best = 0;
  double best_dist = kInf;
  for (int k = 0; k < grid.size(); ++k) {
    const double dist = std::abs(std::log10(grid.value(k)) - target);
    if (dist < best_dist - 1e-15) {
      best = k;
      best_dist = dist;
    }
  }
  return best;
}

Scaling Scaling::identity(Index n, Index m) {
  Scaling s;
  s.E = Vec::Ones(n);
  s.F = Vec::Ones(m);
  s.cost_scale = 1.0;
  return s;
}

QProblem Scaling::apply(const QProblem& p) const {
  QProblem s;
  s.H = cost_scale * (E.asDiagonal() * p.H * E.asDiagonal());
  s.g = cost_scale * E.cwiseProduct(p.g);
  s.G = F.asDiagonal() * p.G * E.asDiagonal();
  s.c = F.cwiseProduct(p.c);
  s.d = F.cwiseProduct(p.d);
  return s;
}

QProblem Scaling::unapply(const QProblem& p) const {
  QProblem o;
  const Vec Einv = E.cwiseInverse();
  const Vec Finv = F.cwiseInverse();
  o.H = (Einv.asDiagonal() * p.H * Einv.asDiagonal()) / cost_scale;
  o.g = Einv.cwiseProduct(p.g) / cost_scale;
  o.G = Finv.asDiagonal() * p.G * Einv.asDiagonal();
  o.c = Finv.cwiseProduct(p.c);
  o.d = Finv.cwiseProduct(p.d);
  return o;
}

std::pair<QProblem, Scaling> ruiz_equilibrate(const QProblem& p, int max_passes,
                                              double tol) {
  const Index n = p.num_vars();
  const Index m = p.num_constraints();

  Mat H = p.H;
  Mat G = p.G;
  Scaling s = Scaling::identity(n, m);

  for (int pass = 0; pass < max_passes; ++pass) {
    // Row infinity norms of the stacked matrix [[H, G'], [G, 0]].
    Vec delta(n + m);
    for (Index i = 0; i < n; ++i) {
      const double r = std::max(H.row(i).cwiseAbs().maxCoeff(),
                                m > 0 ? G.col(i).cwiseAbs().maxCoeff() : 0.0);
      delta[i] = r > 0.0 ? 1.0 / std::sqrt(r) : 1.0;
    }
    for (Index i = 0; i < m; ++i) {
      const double r = G.row(i).cwiseAbs().maxCoeff();
      delta[n + i] = r > 0.0 ? 1.0 / std::sqrt(r) : 1.0;
    }

    const Vec dE = delta.head(n);
    const Vec dF = delta.tail(m);
    H = dE.asDiagonal() * H * dE.asDiagonal();
    G = dF.asDiagonal() * G * dE.asDiagonal();
    s.E = s.E.cwiseProduct(dE);
    s.F = s.F.cwiseProduct(dF);

    if ((delta.array() - 1.0).abs().maxCoeff() < tol) break;
  }

  // Cost normalization: divide H and g by max(1, mean row infinity-norm of
  // the scaled H).
  const double row_mean = H.cwiseAbs().rowwise().maxCoeff().mean();
  s.cost_scale = 1.0 / std::max(1.0, row_mean);

  return {s.apply(p), s};
}

Mat build_kkt_inverse(const Mat& H, const Mat& G, double sigma, const Vec& rho_vec) {
  const Index n = H.rows();
  Mat kkt = H + sigma * Mat::Identity(n, n);
  kkt.noalias() += G.transpose() * rho_vec.asDiagonal() * G;
  Eigen::LLT<Mat> llt(kkt);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("KKT factorization failed: H + sigma I + G'rho G is not positive-definite");
  }
  return llt.solve(Mat::Identity(n, n));
}

Layer build_layer(const Mat& H, const Mat& G, const Vec& g, double sigma,
                  const Vec& rho_vec, const Mat& D) {
  const Index n = H.rows();
  const Index m = G.rows();

  Layer layer;
  layer.D = D;
  layer.GD = G * D;
  layer.rho_vec = rho_vec;
  layer.rho_inv_vec = rho_vec.cwiseInverse();

  const Mat DGt = D * G.transpose();                               // n x m
  const Mat GDGt = G * DGt;                                        // m x m
  Mat T = sigma * Mat::Identity(n, n);                             // sI - G'rG
  T.noalias() -= G.transpose() * rho_vec.asDiagonal() * G;

  Mat& W = layer.W;
  W.resize(n + 2 * m, n + 2 * m);
  W.block(0, 0, n, n).noalias() = D * T;
  W.block(0, n, n, m).noalias() = 2.0 * DGt * rho_vec.asDiagonal();
  W.block(0, n + m, n, m) = -DGt;
  W.block(n, 0, m, n).noalias() = layer.GD * T;
  W.block(n, 0, m, n) += G;
  W.block(n, n, m, m).noalias() = 2.0 * GDGt * rho_vec.asDiagonal();
  W.block(n, n, m, m) -= Mat::Identity(m, m);
  W.block(n, n + m, m, m) = -GDGt;
  W.block(n, n + m, m, m) += Mat(layer.rho_inv_vec.asDiagonal());
  W.block(n + m, 0, m, n) = rho_vec.asDiagonal() * G;
  W.block(n + m, n, m, m) = Mat((-rho_vec).asDiagonal());
  W.block(n + m, n + m, m, m) = Mat::Identity(m, m);

  layer.b = layer_bias(layer, g);
  return layer;
}

Vec layer_bias(const Layer& layer, const Vec& g) {
  const Index n = layer.D.rows();
  const Index m = layer.GD.rows();
  Vec b = Vec::Zero(n + 2 * m);
  b.head(n).noalias() = -layer.D * g;
  b.segment(n, m).noalias() = -layer.GD * g;
  return b;
}

void LayerCache::update_vectors(const Vec& g, const Vec& c, const Vec& d) {
  if (g.size() != n() || c.size() != m() || d.size() != m()) {
    throw std::invalid_argument("update_vectors: dimension mismatch");
  }
  problem.g = scaling.cost_scale * scaling.E.cwiseProduct(g);
  problem.c = scaling.F.cwiseProduct(c);
  problem.d = scaling.F.cwiseProduct(d);
  for (auto& layer : layers) layer.b = layer_bias(layer, problem.g);
  c_tilde.segment(n(), m()) = problem.c;
  d_tilde.segment(n(), m()) = problem.d;
}

LayerCache precompute_all(const QProblem& p, const PenaltyGrid& grid, double sigma,
                          const Equilibration& eq) {
  LayerCache cache;
  cache.grid = grid;
  cache.sigma = sigma;

  if (eq.enabled) {
    auto [scaled, scaling] = ruiz_equilibrate(p, eq.max_passes, eq.tol);
    cache.problem = std::move(scaled);
    cache.scaling = std::move(scaling);
  } else {
    cache.problem = p;
    cache.scaling = Scaling::identity(p.num_vars(), p.num_constraints());
  }

  const Index n = cache.n();
  const Index m = cache.m();
  const auto kinds = constraint_kinds(cache.problem);

  cache.layers.reserve(static_cast<size_t>(grid.size()));
  for (int k = 0; k < grid.size(); ++k) {
    Vec rho_vec(m);
    for (Index i = 0; i < m; ++i) {
      const double scale =
          kinds[static_cast<size_t>(i)] == ConstraintKind::Equality ? grid.eq_scale : 1.0;
      rho_vec[i] = scale * grid.value(k);
    }
    const Mat D = build_kkt_inverse(cache.problem.H, cache.problem.G, sigma, rho_vec);
    Layer layer = build_layer(cache.problem.H, cache.problem.G, cache.problem.g, sigma,
                              rho_vec, D);
    layer.rho_base = grid.value(k);
    cache.layers.push_back(std::move(layer));
  }

  cache.c_tilde = Vec::Constant(n + 2 * m, -kInf);
  cache.d_tilde = Vec::Constant(n + 2 * m, kInf);
  cache.c_tilde.segment(n, m) = cache.problem.c;
  cache.d_tilde.segment(n, m) = cache.problem.d;
  return cache;
}

}  // namespace clampqp
