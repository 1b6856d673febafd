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

#include "clampqp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace clampqp::bench {

namespace {

constexpr double kTwoPi = 6.283185307179586;
constexpr double kStabilizeTol = 1e-2;
constexpr double kDivergeTol = 1e6;
constexpr int kActivityWindow = 50;

// Distinct stream for the initial-state direction so it does not replay the
// system sample.
std::uint64_t x0_stream(std::uint64_t seed) { return seed ^ 0x9e3779b97f4a7c15ULL; }

bool any_limit_active(const Vec& u_cmd, const mpc::BoxLimits& limits) {
  for (Index i = 0; i < u_cmd.size(); ++i) {
    const double lo = limits.u_lo[i];
    const double hi = limits.u_hi[i];
    if (std::isfinite(hi) && u_cmd[i] >= hi - 1e-9 * std::max(1.0, std::abs(hi))) return true;
    if (std::isfinite(lo) && u_cmd[i] <= lo + 1e-9 * std::max(1.0, std::abs(lo))) return true;
  }
  return false;
}

std::string format_record(const RunRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%d,%llu,%d,%.17g,%.17g,%d,%.3f,%d,%.6g\n",
                r.suite.c_str(), r.size, static_cast<unsigned long long>(r.seed),
                r.iterations, r.r_prim, r.r_dual, r.converged ? 1 : 0, r.wall_ms,
                r.steps_to_stabilize, r.activity_fraction);
  return buf;
}

}  // namespace

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = kTwoPi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Vec Rng::normal_vector(Index n) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

Mat Rng::normal_matrix(Index rows, Index cols) {
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = normal();
  }
  return m;
}

QProblem gen_random_dense_qp(int n, std::uint64_t seed, Vec* witness) {
  if (n < 4) throw std::invalid_argument("gen_random_dense_qp: n must be >= 4");
  Rng rng(seed);

  QProblem p;
  const Mat M = rng.normal_matrix(n, n);
  p.H = M.transpose() * M + 0.1 * Mat::Identity(n, n);
  p.H = 0.5 * (p.H + p.H.transpose());
  p.g = rng.normal_vector(n);

  const Index n_side = n / 4;
  const Index m = 2 * n_side;
  const Vec y0 = rng.normal_vector(n);
  p.G = rng.normal_matrix(m, n);
  const Vec gy0 = p.G * y0;

  p.c.resize(m);
  p.d.resize(m);
  for (Index i = 0; i < n_side; ++i) {
    p.c[i] = gy0[i];
    p.d[i] = gy0[i];
  }
  for (Index i = n_side; i < m; ++i) {
    const double slack = std::abs(rng.normal()) + 0.1;
    p.c[i] = gy0[i] - slack;
    p.d[i] = gy0[i] + slack;
  }
  if (witness) *witness = y0;
  return p;
}

mpc::LinearSystem gen_random_linear_system(int nu, std::uint64_t seed, bool unstable) {
  if (nu < 1) throw std::invalid_argument("gen_random_linear_system: nu must be >= 1");
  const Index nx = 3 * nu;
  Rng rng(seed);

  for (int attempt = 0; attempt < 10; ++attempt) {
    mpc::LinearSystem sys;
    sys.A = rng.normal_matrix(nx, nx);
    sys.B = rng.normal_matrix(nx, nu);
    const double target =
        unstable ? rng.uniform(1.05, 1.3) : rng.uniform(0.8, 0.95);
    const double radius = spectral_radius(sys.A);
    if (radius <= 0.0) continue;
    sys.A *= target / radius;
    if (mpc::controllability_rank(sys) == nx) return sys;
  }
  throw std::runtime_error("gen_random_linear_system: controllability check failed after resampling");
}

ClosedLoopResult simulate_closed_loop(const mpc::CondensedTemplate& tmpl, Solver& solver,
                                      const mpc::LinearSystem& sys,
                                      const mpc::BoxLimits& limits, const Vec& x0,
                                      int steps, int iterations_per_step) {
  const Index nx = sys.nx();
  const Index nu = sys.nu();

  ClosedLoopResult result;
  result.states = Mat::Zero(nx, steps + 1);
  result.controls = Mat::Zero(nu, steps);

  Vec x = x0;
  result.states.col(0) = x;
  if (inf_norm(x) <= kStabilizeTol) result.steps_to_stabilize = 0;

  const int window = std::min(kActivityWindow, steps);
  int active_steps = 0;

  for (int t = 0; t < steps; ++t) {
    const QProblem step_qp = mpc::instantiate(tmpl, x);
    solver.update_vectors(step_qp.g, step_qp.c, step_qp.d);
    solver.refresh_z();

    const SolveReport report = iterations_per_step >= 1
                                   ? solver.fixed_iters(iterations_per_step)
                                   : solver.solve();
    result.total_iterations += report.solution.iterations;
    result.r_prim = report.solution.r_prim;
    result.r_dual = report.solution.r_dual;

    const Vec du0 = report.solution.y.head(nu);
    const Vec u_cmd = -tmpl.K * x + du0;
    if (t < window && any_limit_active(u_cmd, limits)) ++active_steps;

    const Vec u = u_cmd.cwiseMax(limits.u_lo).cwiseMin(limits.u_hi);
    result.controls.col(t) = u;
    x = sys.A * x + sys.B * u;
    result.states.col(t + 1) = x;

    if (result.steps_to_stabilize < 0 && inf_norm(x) <= kStabilizeTol) {
      result.steps_to_stabilize = t + 1;
    }
    if (inf_norm(x) > kDivergeTol) {
      result.diverged = true;
      break;
    }
  }

  result.stabilized = result.steps_to_stabilize >= 0;
  result.activity_fraction = window > 0 ? static_cast<double>(active_steps) / window : 0.0;
  return result;
}

ClosedLoopResult simulate_closed_loop(const mpc::LinearSystem& sys,
                                      const mpc::MpcWeights& weights,
                                      const mpc::BoxLimits& limits, const Vec& x0,
                                      int steps, int iterations_per_step,
                                      const SolverSettings& settings) {
  const auto lqr = mpc::lqr_gain(sys, weights.Q, weights.R);
  mpc::MpcWeights w = weights;
  if (w.Q_N.size() == 0) w.Q_N = lqr.P;
  const auto tmpl = mpc::build_condensed_mpc(sys, w, limits, lqr.K);
  Solver solver(mpc::instantiate(tmpl, Vec::Zero(sys.nx())), settings);
  return simulate_closed_loop(tmpl, solver, sys, limits, x0, steps, iterations_per_step);
}

Vec scale_x0_for_activity(const mpc::CondensedTemplate& tmpl, Solver& solver,
                          const mpc::LinearSystem& sys, const mpc::BoxLimits& limits,
                          const Vec& x0_dir, double target_activity, int window) {
  Vec dir = x0_dir;
  const double dir_norm = inf_norm(dir);
  if (dir_norm > 0.0) dir /= dir_norm;

  double limit_mag = 0.0;
  for (Index i = 0; i < limits.u_lo.size(); ++i) {
    if (std::isfinite(limits.u_hi[i])) limit_mag = std::max(limit_mag, std::abs(limits.u_hi[i]));
    if (std::isfinite(limits.u_lo[i])) limit_mag = std::max(limit_mag, std::abs(limits.u_lo[i]));
  }
  if (limit_mag == 0.0) return dir;  // no finite limits to activate

  // Start where the unconstrained LQR control would exceed the limits 3x.
  const double lqr_push = inf_norm(Vec(tmpl.K * dir));
  double scale = lqr_push > 0.0 ? 3.0 * limit_mag / lqr_push : 1.0;

  for (int trial = 0; trial < 20; ++trial) {
    solver.cold_start();
    const ClosedLoopResult probe =
        simulate_closed_loop(tmpl, solver, sys, limits, scale * dir, window,
                             /*iterations_per_step=*/0);
    if (probe.activity_fraction >= target_activity) break;
    scale *= 2.0;
  }
  solver.cold_start();
  return scale * dir;
}

std::vector<RunRecord> run_suite(const BenchConfig& config) {
  std::vector<RunRecord> records;

  if (config.suite == BenchConfig::Suite::RandomQp) {
    SolverSettings settings;
    settings.eps_prim = config.eps;
    settings.eps_dual = config.eps;
    for (int n : config.sizes) {
      for (int seed = 0; seed < config.seeds; ++seed) {
        const QProblem p = gen_random_dense_qp(n, static_cast<std::uint64_t>(seed));
        Solver solver(p, settings);
        const SolveReport report = solver.solve();
        RunRecord rec;
        rec.suite = "random-qp";
        rec.size = n;
        rec.seed = static_cast<std::uint64_t>(seed);
        rec.iterations = report.solution.iterations;
        rec.r_prim = report.solution.r_prim;
        rec.r_dual = report.solution.r_dual;
        rec.converged = report.solution.status == SolveStatus::Solved;
        rec.wall_ms = report.wall_ms;
        records.push_back(std::move(rec));
      }
    }
  } else {
    SolverSettings settings;
    settings.eps_prim = config.eps;
    settings.eps_dual = config.eps;
    for (int nu : config.sizes) {
      for (int seed = 0; seed < config.seeds; ++seed) {
        const auto sys =
            gen_random_linear_system(nu, static_cast<std::uint64_t>(seed), config.unstable);
        const Index nx = sys.nx();
        const auto lqr = mpc::lqr_gain(sys, Mat::Identity(nx, nx),
                                       Mat::Identity(nu, nu));
        mpc::MpcWeights weights{Mat::Identity(nx, nx), Mat::Identity(nu, nu), lqr.P,
                                config.horizon};
        const auto limits = mpc::BoxLimits::symmetric_control(nu, 1.0);
        const auto tmpl = mpc::build_condensed_mpc(sys, weights, limits, lqr.K);

        Solver solver(mpc::instantiate(tmpl, Vec::Zero(nx)), settings);
        Rng dir_rng(x0_stream(static_cast<std::uint64_t>(seed)));
        const Vec x0 = scale_x0_for_activity(tmpl, solver, sys, limits,
                                             dir_rng.normal_vector(nx));

        const auto t0 = std::chrono::steady_clock::now();
        const ClosedLoopResult run = simulate_closed_loop(
            tmpl, solver, sys, limits, x0, config.steps, config.iterations_per_step);
        const double wall_ms = std::chrono::duration<double, std::milli>(
                                   std::chrono::steady_clock::now() - t0)
                                   .count();

        RunRecord rec;
        rec.suite = "random-mpc";
        rec.size = nu;
        rec.seed = static_cast<std::uint64_t>(seed);
        rec.iterations = run.total_iterations;
        rec.r_prim = run.r_prim;
        rec.r_dual = run.r_dual;
        rec.converged = run.stabilized;
        rec.wall_ms = wall_ms;
        rec.steps_to_stabilize = run.steps_to_stabilize;
        rec.activity_fraction = run.activity_fraction;
        records.push_back(std::move(rec));
      }
    }
  }

  if (!config.output_path.empty()) {
    std::ofstream out(config.output_path);
    if (!out) {
      throw std::runtime_error("run_suite: cannot write to " + config.output_path);
    }
    out << to_csv(records);
    if (!out.good()) {
      throw std::runtime_error("run_suite: write failed for " + config.output_path);
    }
  }
  return records;
}

std::string to_csv(const std::vector<RunRecord>& records) {
  std::string csv =
      "suite,n_or_nu,seed,iterations,r_prim,r_dual,converged,wall_ms,"
      "steps_to_stabilize,activity_fraction\n";
  for (const auto& rec : records) csv += format_record(rec);
  return csv;
}

}  // namespace clampqp::bench
