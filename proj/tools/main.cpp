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

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "clampqp/bench.hpp"
#include "clampqp/mpc.hpp"
#include "clampqp/problem.hpp"
#include "clampqp/solver.hpp"

namespace {

using namespace clampqp;

std::string format_vector(const Vec& v) {
  std::string out;
  char buf[64];
  for (Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), i + 1 < v.size() ? "%.12g " : "%.12g", v[i]);
    out += buf;
  }
  return out;
}

int cmd_solve(const std::string& path, const SolverSettings& settings) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    return 1;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();

  QProblem problem;
  try {
    problem = parse_problem(buffer.str());
  } catch (const ProblemError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  Solver solver(std::move(problem), settings);
  const SolveReport report = solver.solve();
  const Solution& sol = report.solution;

  std::cout << "status: " << to_string(sol.status) << "\n"
            << "iterations: " << sol.iterations << "\n";
  std::printf("r_prim: %.12g\n", sol.r_prim);
  std::printf("r_dual: %.12g\n", sol.r_dual);
  std::cout << "y: " << format_vector(sol.y) << "\n"
            << "z: " << format_vector(sol.z) << "\n"
            << "lambda: " << format_vector(sol.lambda) << "\n";
  std::printf("wall_ms: %.3f\n", report.wall_ms);

  return sol.status == SolveStatus::Solved ? 0 : 2;
}

void print_suite_summary(const std::vector<bench::RunRecord>& records) {
  std::map<int, std::pair<int, int>> per_size;  // size -> (converged, total)
  std::map<int, long> iter_sum;
  for (const auto& rec : records) {
    auto& [conv, total] = per_size[rec.size];
    conv += rec.converged ? 1 : 0;
    total += 1;
    iter_sum[rec.size] += rec.iterations;
  }
  for (const auto& [size, counts] : per_size) {
    std::printf("size %d: %d/%d converged, mean iterations %.1f\n", size, counts.first,
                counts.second, static_cast<double>(iter_sum[size]) / counts.second);
  }
}

int run_bench(bench::BenchConfig config) {
  std::vector<bench::RunRecord> records;
  try {
    records = bench::run_suite(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  print_suite_summary(records);
  if (!config.output_path.empty()) {
    std::cout << "wrote " << records.size() << " records to " << config.output_path << "\n";
  }
  return 0;
}

int cmd_mpc_demo(const std::string& preset, int horizon, int steps, int iters_per_step,
                 int nu, unsigned seed, bool unstable) {
  mpc::LinearSystem sys;
  mpc::BoxLimits limits;
  Vec x0;

  if (preset == "double-integrator") {
    sys.A = Mat{{1.0, 0.1}, {0.0, 1.0}};
    sys.B = Mat{{0.005}, {0.1}};
    limits = mpc::BoxLimits::symmetric_control(1, 0.5);
    x0 = Vec{{1.0, 0.0}};
  } else if (preset == "random") {
    sys = bench::gen_random_linear_system(nu, seed, unstable);
    limits = mpc::BoxLimits::symmetric_control(nu, 1.0);
  } else {
    std::cerr << "error: unknown preset " << preset << "\n";
    return 1;
  }

  const Index nx = sys.nx();
  const auto lqr = mpc::lqr_gain(sys, Mat::Identity(nx, nx), Mat::Identity(sys.nu(), sys.nu()));
  mpc::MpcWeights weights{Mat::Identity(nx, nx), Mat::Identity(sys.nu(), sys.nu()), lqr.P,
                          horizon};
  const auto tmpl = mpc::build_condensed_mpc(sys, weights, limits, lqr.K);
  Solver solver(mpc::instantiate(tmpl, Vec::Zero(nx)), SolverSettings{});

  if (preset == "random") {
    bench::Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    x0 = bench::scale_x0_for_activity(tmpl, solver, sys, limits, rng.normal_vector(nx));
  }

  const auto run =
      bench::simulate_closed_loop(tmpl, solver, sys, limits, x0, steps, iters_per_step);

  std::cout << "preset: " << preset << "\n"
            << "nx: " << nx << "\n"
            << "nu: " << sys.nu() << "\n"
            << "horizon: " << horizon << "\n"
            << "steps: " << steps << "\n"
            << "iterations_per_step: " << iters_per_step << "\n"
            << "stabilized: " << (run.stabilized ? "yes" : "no") << "\n"
            << "steps_to_stabilize: " << run.steps_to_stabilize << "\n";
  std::printf("activity_fraction: %.3f\n", run.activity_fraction);
  std::printf("final_state_norm: %.6g\n", inf_norm(Vec(run.states.rightCols(1))));
  std::cout << "total_iterations: " << run.total_iterations << "\n";
  return run.stabilized ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clampqp: box-constrained QP solver built on a precomputed affine map and clamp"};
  app.require_subcommand(1);

  const SolverSettings defaults{};

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Solve a QP file and print the solution");
  std::string solve_path;
  SolverSettings settings;
  solve_cmd->add_option("file", solve_path, "QP problem file")->required();
  solve_cmd->add_option("--eps-prim", settings.eps_prim, "Primal residual tolerance")
      ->capture_default_str();
  solve_cmd->add_option("--eps-dual", settings.eps_dual, "Dual residual tolerance")
      ->capture_default_str();
  solve_cmd->add_option("--max-iters", settings.max_iters, "Iteration limit")
      ->capture_default_str();

  // bench-qp
  auto* bench_qp = app.add_subcommand("bench-qp", "Random dense QP suite, CSV output");
  bench::BenchConfig qp_config;
  qp_config.suite = bench::BenchConfig::Suite::RandomQp;
  qp_config.sizes = {10, 50, 200};
  qp_config.output_path = "bench_qp.csv";
  bool qp_full_scale = false;
  bench_qp->add_option("--sizes", qp_config.sizes, "Decision-variable counts")
      ->delimiter(',')
      ->capture_default_str();
  bench_qp->add_option("--seeds", qp_config.seeds, "Seeds per size")->capture_default_str();
  bench_qp->add_option("--tol", qp_config.eps, "Residual tolerance")->capture_default_str();
  bench_qp->add_option("--out", qp_config.output_path, "CSV output path")
      ->capture_default_str();
  bench_qp->add_flag("--full-scale", qp_full_scale,
                     "Use the full size sweep (10..2000) instead of the desk-scale default");

  // bench-mpc
  auto* bench_mpc = app.add_subcommand("bench-mpc", "Closed-loop random MPC suite, CSV output");
  bench::BenchConfig mpc_config;
  mpc_config.suite = bench::BenchConfig::Suite::RandomMpc;
  mpc_config.sizes = {4, 10};
  mpc_config.output_path = "bench_mpc.csv";
  bool mpc_full_scale = false;
  bench_mpc->add_option("--nu", mpc_config.sizes, "Control dimensions")
      ->delimiter(',')
      ->capture_default_str();
  bench_mpc->add_option("--horizon", mpc_config.horizon, "MPC horizon")->capture_default_str();
  bench_mpc->add_option("--iters-per-step", mpc_config.iterations_per_step,
                        "Solver iterations per MPC step")
      ->capture_default_str();
  bench_mpc->add_option("--steps", mpc_config.steps, "Closed-loop steps")->capture_default_str();
  bench_mpc->add_option("--seeds", mpc_config.seeds, "Seeds per size")->capture_default_str();
  bench_mpc->add_option("--tol", mpc_config.eps, "Residual tolerance")->capture_default_str();
  bench_mpc->add_option("--out", mpc_config.output_path, "CSV output path")
      ->capture_default_str();
  bench_mpc->add_flag("--unstable", mpc_config.unstable, "Sample open-loop unstable systems");
  bench_mpc->add_flag("--full-scale", mpc_full_scale,
                      "Use the full control-dimension sweep (10..50)");

  // mpc-demo
  auto* demo = app.add_subcommand("mpc-demo", "Closed-loop demo on a preset system");
  std::string preset = "double-integrator";
  int demo_horizon = 40;
  int demo_steps = 300;
  int demo_iters = 1;
  int demo_nu = 2;
  unsigned demo_seed = 0;
  bool demo_unstable = false;
  demo->add_option("--preset", preset, "System preset: double-integrator | random")
      ->capture_default_str();
  demo->add_option("--horizon", demo_horizon, "MPC horizon")->capture_default_str();
  demo->add_option("--steps", demo_steps, "Closed-loop steps")->capture_default_str();
  demo->add_option("--iters-per-step", demo_iters, "Solver iterations per MPC step")
      ->capture_default_str();
  demo->add_option("--nu", demo_nu, "Control dimension (random preset)")->capture_default_str();
  demo->add_option("--seed", demo_seed, "Seed (random preset)")->capture_default_str();
  demo->add_flag("--unstable", demo_unstable, "Open-loop unstable system (random preset)");

  CLI11_PARSE(app, argc, argv);

  (void)defaults;
  try {
    if (solve_cmd->parsed()) return cmd_solve(solve_path, settings);
    if (bench_qp->parsed()) {
      if (qp_full_scale) qp_config.sizes = {10, 18, 32, 58, 105, 190, 342, 616, 1110, 2000};
      return run_bench(qp_config);
    }
    if (bench_mpc->parsed()) {
      if (mpc_full_scale) mpc_config.sizes = {10, 14, 18, 22, 26, 30, 34, 38, 42, 46, 50};
      return run_bench(mpc_config);
    }
    if (demo->parsed()) {
      return cmd_mpc_demo(preset, demo_horizon, demo_steps, demo_iters, demo_nu, demo_seed,
                          demo_unstable);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
