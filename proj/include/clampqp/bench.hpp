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

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "clampqp/mpc.hpp"
#include "clampqp/problem.hpp"
#include "clampqp/solver.hpp"
#include "clampqp/types.hpp"

namespace clampqp::bench {

/// Deterministic RNG: mt19937_64 (bit-specified by the standard) plus a
/// hand-rolled Box-Muller, so streams are identical across standard
/// libraries, not just within one binary.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

  Vec normal_vector(Index n);
  Mat normal_matrix(Index rows, Index cols);

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct BenchConfig {
  enum class Suite { RandomQp, RandomMpc };

  Suite suite = Suite::RandomQp;
  std::vector<int> sizes;  ///< n for the QP suite, nu for the MPC suite
  int seeds = 10;          ///< seeds 0..seeds-1 per size
  double eps = 1e-6;
  int horizon = 40;
  int iterations_per_step = 1;
  int steps = 500;
  bool unstable = false;  ///< MPC suite: open-loop unstable systems
  std::string output_path;
};

struct RunRecord {
  std::string suite;
  int size = 0;
  std::uint64_t seed = 0;
  int iterations = 0;
  double r_prim = 0.0;
  double r_dual = 0.0;
  bool converged = false;
  double wall_ms = 0.0;
  int steps_to_stabilize = -1;      ///< MPC only; -1 when never reached
  double activity_fraction = 0.0;   ///< MPC only; limit activity over first 50 steps
};

/// Random strictly-convex QP: H = M'M + 0.1 I, floor(n/4) equality rows and
/// floor(n/4) inequality rows, all feasible at a sampled witness point.
/// Deterministic in (n, seed). `witness` (optional) receives the feasible
/// point the bounds were built around.
QProblem gen_random_dense_qp(int n, std::uint64_t seed, Vec* witness = nullptr);

/// Random controllable system with nx = 3 nu; A rescaled to a spectral
/// radius in [1.05, 1.3] (unstable) or [0.8, 0.95]. Resamples up to 10 times
/// if the controllability rank check fails.
mpc::LinearSystem gen_random_linear_system(int nu, std::uint64_t seed, bool unstable);

struct ClosedLoopResult {
  Mat states;    ///< nx x (steps+1), column t is x_t
  Mat controls;  ///< nu x steps
  bool stabilized = false;
  bool diverged = false;
  int steps_to_stabilize = -1;
  double activity_fraction = 0.0;
  int total_iterations = 0;
  double r_prim = 0.0;  ///< final step's residuals
  double r_dual = 0.0;
};

/// Receding-horizon rollout on a prebuilt condensed template: per step,
/// refresh the x0-dependent vectors, warm start from the previous iterate
/// (z = Gy), run `iterations_per_step` fused iterations, apply u_0 clamped
/// to the limits, advance the true dynamics. Divergence (||x|| > 1e6) is
/// recorded, not thrown.
ClosedLoopResult simulate_closed_loop(const mpc::CondensedTemplate& tmpl, Solver& solver,
                                      const mpc::LinearSystem& sys,
                                      const mpc::BoxLimits& limits, const Vec& x0,
                                      int steps, int iterations_per_step);

/// Convenience overload running the offline stage internally (LQR gain with
/// DARE terminal weight, condensation, layer precompute).
ClosedLoopResult simulate_closed_loop(const mpc::LinearSystem& sys,
                                      const mpc::MpcWeights& weights,
                                      const mpc::BoxLimits& limits, const Vec& x0,
                                      int steps, int iterations_per_step,
                                      const SolverSettings& settings = {});

/// Scales the direction `x0_dir` until an oracle rollout (solve to tolerance
/// each step) keeps the control limits active for at least `target_activity`
/// of the first `window` steps.
Vec scale_x0_for_activity(const mpc::CondensedTemplate& tmpl, Solver& solver,
                          const mpc::LinearSystem& sys, const mpc::BoxLimits& limits,
                          const Vec& x0_dir, double target_activity = 0.2,
                          int window = 50);

/// Runs a suite and writes the CSV when config.output_path is set. Rows are
/// ordered by (size, seed).
std::vector<RunRecord> run_suite(const BenchConfig& config);

/// CSV with header suite,n_or_nu,seed,iterations,r_prim,r_dual,converged,
/// wall_ms,steps_to_stabilize,activity_fraction. Everything except wall_ms
/// is deterministic for a fixed config.
std::string to_csv(const std::vector<RunRecord>& records);

}  // namespace clampqp::bench
