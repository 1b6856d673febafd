# Copyright 2026 The clampqp Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Box-constrained convex QP solver built on a precomputed affine map and clamp."""

from clampqp._core import (  # noqa: F401
    BenchConfig,
    BoxLimits,
    ClosedLoopResult,
    CondensedTemplate,
    ConditionReport,
    Equilibration,
    LinearSystem,
    LqrResult,
    MpcWeights,
    ProblemError,
    QProblem,
    ResidualSample,
    RhoSwitch,
    RunRecord,
    Solution,
    SolveReport,
    SolveStatus,
    Solver,
    SolverSettings,
    Trajectory,
    build_condensed_mpc,
    build_direct_mpc,
    condition_report,
    gen_random_dense_qp,
    gen_random_linear_system,
    instantiate,
    lqr_gain,
    lqr_terminal_weights,
    parse_problem,
    recover_trajectory,
    run_suite,
    serialize_problem,
    simulate_closed_loop,
    to_csv,
    validate,
)

__version__ = "0.1.0"
