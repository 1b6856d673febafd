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

#include <stdexcept>
#include <string>
#include <vector>

#include "clampqp/types.hpp"

namespace clampqp {

/// Box-constrained convex QP
///
///   min  0.5 y'Hy + g'y   s.t.  c <= Gy <= d,
///
/// with H symmetric positive-definite. Equality constraints are encoded as
/// rows with c_i == d_i; bounds may be +-infinity.
struct QProblem {
  Mat H;  ///< n x n cost quadratic term
  Vec g;  ///< n cost linear term
  Mat G;  ///< m x n constraint map
  Vec c;  ///< m lower bounds (-inf allowed)
  Vec d;  ///< m upper bounds (+inf allowed)

  Index num_vars() const { return H.rows(); }
  Index num_constraints() const { return G.rows(); }
};

/// Per-row constraint tag, a pure function of (c_i, d_i).
enum class ConstraintKind { Equality, Inequality };

inline ConstraintKind row_kind(double c_i, double d_i) {
  return c_i == d_i ? ConstraintKind::Equality : ConstraintKind::Inequality;
}

std::vector<ConstraintKind> constraint_kinds(const QProblem& p);

enum class SolveStatus { Solved, MaxIters, Invalid };

std::string to_string(SolveStatus s);

/// One penalty-grid switch: the solver moved to grid point `grid_index` at
/// `iteration`. The trace always starts with the initial index at iteration 0.
struct RhoSwitch {
  int iteration = 0;
  int grid_index = 0;
};

struct Solution {
  Vec y;       ///< primal
  Vec z;       ///< constraint-space primal, inside [c, d]
  Vec lambda;  ///< dual
  SolveStatus status = SolveStatus::Invalid;
  int iterations = 0;
  double r_prim = 0.0;
  double r_dual = 0.0;
  std::vector<RhoSwitch> rho_trace;
};

class ProblemError : public std::runtime_error {
 public:
  enum class Code {
    DimensionMismatch,
    NonSymmetricH,
    NonPositiveDefiniteH,
    InvertedBounds,
    NonFiniteEntry,
    MalformedDocument,
    MissingField,
  };

  ProblemError(Code code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Code code() const { return code_; }

 private:
  Code code_;
};

/// Checks every QProblem invariant (dimensions, symmetric PD H, c <= d,
/// finite cost data) and returns the problem unchanged. Throws ProblemError
/// naming the first violated invariant.
QProblem validate(QProblem p);

/// Parses the canonical QP text document (see serialize_problem). The tokens
/// "inf"/"-inf" and magnitudes >= 1e30 map to +-infinity.
QProblem parse_problem(const std::string& text);

/// Canonical text form: key-value document ordered n, m, H, g, G, c, d;
/// infinite bounds emitted as "inf"/"-inf". parse(serialize(p)) == p exactly
/// on finite entries.
std::string serialize_problem(const QProblem& p);

}  // namespace clampqp
