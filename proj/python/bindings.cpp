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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "clampqp/bench.hpp"
#include "clampqp/mpc.hpp"
#include "clampqp/oracle.hpp"
#include "clampqp/problem.hpp"
#include "clampqp/solver.hpp"

namespace py = pybind11;
using namespace clampqp;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Box-constrained convex QP solver built on a precomputed affine map and clamp";

  py::register_exception<ProblemError>(m, "ProblemError");

  py::enum_<SolveStatus>(m, "SolveStatus")
      .value("Solved", SolveStatus::Solved)
      .value("MaxIters", SolveStatus::MaxIters)
      .value("Invalid", SolveStatus::Invalid);

  py::class_<QProblem>(m, "QProblem")
      .def(py::init<>())
      .def(py::init([](Mat H, Vec g, Mat G, Vec c, Vec d) {
             return QProblem{std::move(H), std::move(g), std::move(G), std::move(c),
                             std::move(d)};
           }),
           py::arg("H"), py::arg("g"), py::arg("G"), py::arg("c"), py::arg("d"))
      .def_readwrite("H", &QProblem::H)
      .def_readwrite("g", &QProblem::g)
      .def_readwrite("G", &QProblem::G)
      .def_readwrite("c", &QProblem::c)
      .def_readwrite("d", &QProblem::d)
      .def_property_readonly("n", &QProblem::num_vars)
      .def_property_readonly("m", &QProblem::num_constraints);

  m.def("validate", &validate, py::arg("problem"));
  m.def("parse_problem", &parse_problem, py::arg("text"));
  m.def("serialize_problem", &serialize_problem, py::arg("problem"));

  py::class_<RhoSwitch>(m, "RhoSwitch")
      .def_readonly("iteration", &RhoSwitch::iteration)
      .def_readonly("grid_index", &RhoSwitch::grid_index);

  py::class_<Solution>(m, "Solution")
      .def(py::init<>())
      .def_readwrite("y", &Solution::y)
      .def_readwrite("z", &Solution::z)
      .def_readwrite("lam", &Solution::lambda)
      .def_readwrite("status", &Solution::status)
      .def_readwrite("iterations", &Solution::iterations)
      .def_readwrite("r_prim", &Solution::r_prim)
      .def_readwrite("r_dual", &Solution::r_dual)
      .def_readonly("rho_trace", &Solution::rho_trace);

  py::class_<ResidualSample>(m, "ResidualSample")
      .def_readonly("iteration", &ResidualSample::iteration)
      .def_readonly("r_prim", &ResidualSample::r_prim)
      .def_readonly("r_dual", &ResidualSample::r_dual)
      .def_readonly("grid_index", &ResidualSample::grid_index);

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("solution", &SolveReport::solution)
      .def_readonly("wall_ms", &SolveReport::wall_ms)
      .def_readonly("residual_history", &SolveReport::residual_history);

  py::class_<Equilibration>(m, "Equilibration")
      .def(py::init<>())
      .def_readwrite("enabled", &Equilibration::enabled)
      .def_readwrite("max_passes", &Equilibration::max_passes)
      .def_readwrite("tol", &Equilibration::tol);

  py::class_<SolverSettings>(m, "SolverSettings")
      .def(py::init<>())
      .def_readwrite("eps_prim", &SolverSettings::eps_prim)
      .def_readwrite("eps_dual", &SolverSettings::eps_dual)
      .def_readwrite("check_interval", &SolverSettings::check_interval)
      .def_readwrite("max_iters", &SolverSettings::max_iters)
      .def_readwrite("sigma", &SolverSettings::sigma)
      .def_readwrite("grid_points", &SolverSettings::grid_points)
      .def_readwrite("rho_switch_threshold", &SolverSettings::rho_switch_threshold)
      .def_readwrite("adaptive_rho", &SolverSettings::adaptive_rho)
      .def_readwrite("equilibration", &SolverSettings::equilibration);

  py::class_<Solver>(m, "Solver")
      .def(py::init<QProblem, SolverSettings>(), py::arg("problem"),
           py::arg("settings") = SolverSettings{})
      .def("cold_start", &Solver::cold_start)
      .def("warm_start", &Solver::warm_start, py::arg("previous"))
      .def("refresh_z", &Solver::refresh_z)
      .def("solve", &Solver::solve)
      .def("fixed_iters", &Solver::fixed_iters, py::arg("k"))
      .def("update_vectors", &Solver::update_vectors, py::arg("g"), py::arg("c"),
           py::arg("d"))
      .def_property_readonly("problem", &Solver::problem)
      .def_property_readonly("layer_index", &Solver::layer_index);

  // MPC front-end
  py::class_<mpc::LinearSystem>(m, "LinearSystem")
      .def(py::init([](Mat A, Mat B) {
             return mpc::LinearSystem{std::move(A), std::move(B)};
           }),
           py::arg("A"), py::arg("B"))
      .def_readwrite("A", &mpc::LinearSystem::A)
      .def_readwrite("B", &mpc::LinearSystem::B)
      .def_property_readonly("nx", &mpc::LinearSystem::nx)
      .def_property_readonly("nu", &mpc::LinearSystem::nu);

  py::class_<mpc::MpcWeights>(m, "MpcWeights")
      .def(py::init([](Mat Q, Mat R, Mat Q_N, int horizon) {
             return mpc::MpcWeights{std::move(Q), std::move(R), std::move(Q_N), horizon};
           }),
           py::arg("Q"), py::arg("R"), py::arg("Q_N"), py::arg("horizon"))
      .def_readwrite("Q", &mpc::MpcWeights::Q)
      .def_readwrite("R", &mpc::MpcWeights::R)
      .def_readwrite("Q_N", &mpc::MpcWeights::Q_N)
      .def_readwrite("horizon", &mpc::MpcWeights::horizon);

  py::class_<mpc::BoxLimits>(m, "BoxLimits")
      .def(py::init([](Vec u_lo, Vec u_hi) {
             return mpc::BoxLimits::control_only(u_lo, u_hi);
           }),
           py::arg("u_lo"), py::arg("u_hi"))
      .def_readwrite("u_lo", &mpc::BoxLimits::u_lo)
      .def_readwrite("u_hi", &mpc::BoxLimits::u_hi)
      .def_readwrite("x_lo", &mpc::BoxLimits::x_lo)
      .def_readwrite("x_hi", &mpc::BoxLimits::x_hi);

  py::class_<mpc::LqrResult>(m, "LqrResult")
      .def_readonly("P", &mpc::LqrResult::P)
      .def_readonly("K", &mpc::LqrResult::K);

  m.def("lqr_gain", &mpc::lqr_gain, py::arg("system"), py::arg("Q"), py::arg("R"),
        py::arg("tol") = 1e-10, py::arg("max_iters") = 10000);
  m.def("lqr_terminal_weights", &mpc::lqr_terminal_weights, py::arg("system"),
        py::arg("Q"), py::arg("R"), py::arg("horizon"));
  m.def("build_direct_mpc", &mpc::build_direct_mpc, py::arg("system"), py::arg("weights"),
        py::arg("limits"), py::arg("x0"));

  py::class_<mpc::CondensedTemplate>(m, "CondensedTemplate")
      .def_readonly("K", &mpc::CondensedTemplate::K)
      .def_readonly("Abar", &mpc::CondensedTemplate::Abar)
      .def_readonly("S", &mpc::CondensedTemplate::S)
      .def_readonly("M", &mpc::CondensedTemplate::M)
      .def_readonly("Hbar", &mpc::CondensedTemplate::Hbar)
      .def_readonly("Gbar", &mpc::CondensedTemplate::Gbar)
      .def_readonly("horizon", &mpc::CondensedTemplate::horizon);

  m.def("build_condensed_mpc", &mpc::build_condensed_mpc, py::arg("system"),
        py::arg("weights"), py::arg("limits"), py::arg("K"));
  m.def("instantiate", &mpc::instantiate, py::arg("template"), py::arg("x0"));

  py::class_<mpc::Trajectory>(m, "Trajectory")
      .def_readonly("states", &mpc::Trajectory::states)
      .def_readonly("controls", &mpc::Trajectory::controls);

  m.def("recover_trajectory", &mpc::recover_trajectory, py::arg("template"),
        py::arg("ytilde"), py::arg("x0"));

  py::class_<mpc::ConditionReport>(m, "ConditionReport")
      .def_readonly("cond_naive", &mpc::ConditionReport::cond_naive)
      .def_readonly("cond_lqr", &mpc::ConditionReport::cond_lqr);

  m.def("condition_report", &mpc::condition_report, py::arg("system"), py::arg("weights"),
        py::arg("horizon"));

  // Benchmark harness
  py::class_<bench::RunRecord>(m, "RunRecord")
      .def_readonly("suite", &bench::RunRecord::suite)
      .def_readonly("size", &bench::RunRecord::size)
      .def_readonly("seed", &bench::RunRecord::seed)
      .def_readonly("iterations", &bench::RunRecord::iterations)
      .def_readonly("r_prim", &bench::RunRecord::r_prim)
      .def_readonly("r_dual", &bench::RunRecord::r_dual)
      .def_readonly("converged", &bench::RunRecord::converged)
      .def_readonly("wall_ms", &bench::RunRecord::wall_ms)
      .def_readonly("steps_to_stabilize", &bench::RunRecord::steps_to_stabilize)
      .def_readonly("activity_fraction", &bench::RunRecord::activity_fraction);

  py::class_<bench::BenchConfig> config(m, "BenchConfig");
  py::enum_<bench::BenchConfig::Suite>(config, "Suite")
      .value("RandomQp", bench::BenchConfig::Suite::RandomQp)
      .value("RandomMpc", bench::BenchConfig::Suite::RandomMpc);
  config.def(py::init<>())
      .def_readwrite("suite", &bench::BenchConfig::suite)
      .def_readwrite("sizes", &bench::BenchConfig::sizes)
      .def_readwrite("seeds", &bench::BenchConfig::seeds)
      .def_readwrite("eps", &bench::BenchConfig::eps)
      .def_readwrite("horizon", &bench::BenchConfig::horizon)
      .def_readwrite("iterations_per_step", &bench::BenchConfig::iterations_per_step)
      .def_readwrite("steps", &bench::BenchConfig::steps)
      .def_readwrite("unstable", &bench::BenchConfig::unstable)
      .def_readwrite("output_path", &bench::BenchConfig::output_path);

  m.def("gen_random_dense_qp",
        [](int n, std::uint64_t seed) { return bench::gen_random_dense_qp(n, seed); },
        py::arg("n"), py::arg("seed"));
  m.def("gen_random_linear_system", &bench::gen_random_linear_system, py::arg("nu"),
        py::arg("seed"), py::arg("unstable") = false);

  py::class_<bench::ClosedLoopResult>(m, "ClosedLoopResult")
      .def_readonly("states", &bench::ClosedLoopResult::states)
      .def_readonly("controls", &bench::ClosedLoopResult::controls)
      .def_readonly("stabilized", &bench::ClosedLoopResult::stabilized)
      .def_readonly("diverged", &bench::ClosedLoopResult::diverged)
      .def_readonly("steps_to_stabilize", &bench::ClosedLoopResult::steps_to_stabilize)
      .def_readonly("activity_fraction", &bench::ClosedLoopResult::activity_fraction)
      .def_readonly("total_iterations", &bench::ClosedLoopResult::total_iterations);

  m.def("simulate_closed_loop",
        [](const mpc::LinearSystem& sys, const mpc::MpcWeights& weights,
           const mpc::BoxLimits& limits, const Vec& x0, int steps, int iterations_per_step,
           const SolverSettings& settings) {
          return bench::simulate_closed_loop(sys, weights, limits, x0, steps,
                                             iterations_per_step, settings);
        },
        py::arg("system"), py::arg("weights"), py::arg("limits"), py::arg("x0"),
        py::arg("steps"), py::arg("iterations_per_step") = 1,
        py::arg("settings") = SolverSettings{});

  m.def("run_suite", &bench::run_suite, py::arg("config"));
  m.def("to_csv", &bench::to_csv, py::arg("records"));
}
