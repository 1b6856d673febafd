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

#include "clampqp/mpc.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace clampqp::mpc {

namespace {

void check_dims(const LinearSystem& sys, const MpcWeights& w, const BoxLimits& lim) {
  const Index nx = sys.nx();
  const Index nu = sys.nu();
  if (sys.A.cols() != nx || sys.B.rows() != nx) {
    throw std::invalid_argument("system dimensions inconsistent");
  }
  if (w.Q.rows() != nx || w.Q.cols() != nx || w.Q_N.rows() != nx || w.Q_N.cols() != nx ||
      w.R.rows() != nu || w.R.cols() != nu) {
    throw std::invalid_argument("weight dimensions inconsistent");
  }
  if (w.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (lim.u_lo.size() != nu || lim.u_hi.size() != nu) {
    throw std::invalid_argument("control limit dimensions inconsistent");
  }
  if ((lim.u_lo.array() > lim.u_hi.array()).any()) {
    throw std::invalid_argument("control limits inverted");
  }
  if (lim.x_lo.has_value() != lim.x_hi.has_value()) {
    throw std::invalid_argument("state limits must give both bounds");
  }
  if (lim.x_lo && (lim.x_lo->size() != nx || lim.x_hi->size() != nx)) {
    throw std::invalid_argument("state limit dimensions inconsistent");
  }
  if (lim.x_lo && (lim.x_lo->array() > lim.x_hi->array()).any()) {
    throw std::invalid_argument("state limits inverted");
  }
}

// Offsets of u_k and x_{k+1} inside y = [u0; x1; u1; ...; xN].
Index u_offset(Index k, Index nx, Index nu) { return k * (nx + nu); }
Index x_offset(Index k, Index nx, Index nu) { return k * (nx + nu) + nu; }

// Limit rows of the direct G (control selectors, then state selectors when
// present), with their bounds.
struct LimitRows {
  Mat G;
  Vec c;
  Vec d;
};

LimitRows build_limit_rows(const LinearSystem& sys, const BoxLimits& lim, int N) {
  const Index nx = sys.nx();
  const Index nu = sys.nu();
  const Index n = N * (nx + nu);
  const Index m_u = N * nu;
  const Index m_x = lim.x_lo ? N * nx : 0;

  LimitRows rows;
  rows.G = Mat::Zero(m_u + m_x, n);
  rows.c.resize(m_u + m_x);
  rows.d.resize(m_u + m_x);
  for (Index k = 0; k < N; ++k) {
    rows.G.block(k * nu, u_offset(k, nx, nu), nu, nu) = Mat::Identity(nu, nu);
    rows.c.segment(k * nu, nu) = lim.u_lo;
    rows.d.segment(k * nu, nu) = lim.u_hi;
  }
  if (lim.x_lo) {
    for (Index k = 0; k < N; ++k) {
      rows.G.block(m_u + k * nx, x_offset(k, nx, nu), nx, nx) = Mat::Identity(nx, nx);
      rows.c.segment(m_u + k * nx, nx) = *lim.x_lo;
      rows.d.segment(m_u + k * nx, nx) = *lim.x_hi;
    }
  }
  return rows;
}

Mat build_cost_hessian(const MpcWeights& w, Index nx, Index nu) {
  const int N = w.horizon;
  const Index n = N * (nx + nu);
  Mat H = Mat::Zero(n, n);
  for (Index k = 0; k < N; ++k) {
    H.block(u_offset(k, nx, nu), u_offset(k, nx, nu), nu, nu) = w.R;
    const Mat& state_w = (k == N - 1) ? w.Q_N : w.Q;
    H.block(x_offset(k, nx, nu), x_offset(k, nx, nu), nx, nx) = state_w;
  }
  return H;
}

// S and M of the du substitution for an arbitrary gain (K = 0 gives naive
// single shooting).
std::pair<Mat, Mat> build_sm(const LinearSystem& sys, const Mat& K, int N) {
  const Index nx = sys.nx();
  const Index nu = sys.nu();
  const Mat Abar = sys.A - sys.B * K;

  // Abar^j B for j = 0..N-1 and Abar^j for j = 0..N.
  std::vector<Mat> AjB(static_cast<size_t>(N));
  std::vector<Mat> Aj(static_cast<size_t>(N) + 1);
  AjB[0] = sys.B;
  Aj[0] = Mat::Identity(nx, nx);
  for (int j = 1; j < N; ++j) AjB[static_cast<size_t>(j)] = Abar * AjB[static_cast<size_t>(j - 1)];
  for (int j = 1; j <= N; ++j) Aj[static_cast<size_t>(j)] = Abar * Aj[static_cast<size_t>(j - 1)];

  Mat S = Mat::Zero(N * (nx + nu), N * nu);
  Mat M(N * (nx + nu), nx);
  for (Index k = 0; k < N; ++k) {
    // u_k = -K Abar^k x0 - sum_{j<k} K Abar^{k-1-j} B du_j + du_k
    M.block(u_offset(k, nx, nu), 0, nu, nx) = -K * Aj[static_cast<size_t>(k)];
    S.block(u_offset(k, nx, nu), k * nu, nu, nu) = Mat::Identity(nu, nu);
    for (Index j = 0; j < k; ++j) {
      S.block(u_offset(k, nx, nu), j * nu, nu, nu) = -K * AjB[static_cast<size_t>(k - 1 - j)];
    }
    // x_{k+1} = Abar^{k+1} x0 + sum_{j<=k} Abar^{k-j} B du_j
    M.block(x_offset(k, nx, nu), 0, nx, nx) = Aj[static_cast<size_t>(k + 1)];
    for (Index j = 0; j <= k; ++j) {
      S.block(x_offset(k, nx, nu), j * nu, nx, nu) = AjB[static_cast<size_t>(k - j)];
    }
  }
  return {std::move(S), std::move(M)};
}

double svd_condition_number(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& sv = svd.singularValues();
  return sv[0] / sv[sv.size() - 1];
}

}  // namespace

Index controllability_rank(const LinearSystem& sys) {
  const Index nx = sys.nx();
  const Index nu = sys.nu();
  Mat ctrb(nx, nx * nu);
  Mat block = sys.B;
  for (Index j = 0; j < nx; ++j) {
    ctrb.block(0, j * nu, nx, nu) = block;
    block = sys.A * block;
  }
  return Eigen::ColPivHouseholderQR<Mat>(ctrb).rank();
}

QProblem build_direct_mpc(const LinearSystem& sys, const MpcWeights& weights,
                          const BoxLimits& limits, const Vec& x0) {
  check_dims(sys, weights, limits);
  const Index nx = sys.nx();
  const Index nu = sys.nu();
  const int N = weights.horizon;
  if (x0.size() != nx) throw std::invalid_argument("x0 dimension inconsistent");

  const Index n = N * (nx + nu);
  const Index m_dyn = N * nx;
  const LimitRows lim_rows = build_limit_rows(sys, limits, N);
  const Index m = m_dyn + lim_rows.G.rows();

  QProblem p;
  p.H = build_cost_hessian(weights, nx, nu);
  p.g = Vec::Zero(n);
  p.G = Mat::Zero(m, n);
  p.c.resize(m);
  p.d.resize(m);

  // x_{k+1} = A x_k + B u_k as rows (A, B, -I); x_0 lands in the bounds.
  for (Index k = 0; k < N; ++k) {
    p.G.block(k * nx, u_offset(k, nx, nu), nx, nu) = sys.B;
    p.G.block(k * nx, x_offset(k, nx, nu), nx, nx) = -Mat::Identity(nx, nx);
    if (k > 0) p.G.block(k * nx, x_offset(k - 1, nx, nu), nx, nx) = sys.A;
  }
  p.c.head(m_dyn).setZero();
  p.c.head(nx) = -sys.A * x0;
  p.d.head(m_dyn) = p.c.head(m_dyn);

  p.G.bottomRows(lim_rows.G.rows()) = lim_rows.G;
  p.c.tail(lim_rows.c.size()) = lim_rows.c;
  p.d.tail(lim_rows.d.size()) = lim_rows.d;
  return p;
}

LqrResult lqr_gain(const LinearSystem& sys, const Mat& Q, const Mat& R, double tol,
                   int max_iters) {
  const Mat At = sys.A.transpose();
  const Mat Bt = sys.B.transpose();

  Mat P = Q;
  double defect = kInf;
  for (int i = 0; i < max_iters; ++i) {
    const Mat BtPA = Bt * P * sys.A;
    const Mat gain_term = (R + Bt * P * sys.B).ldlt().solve(BtPA);
    Mat P_next = Q + At * P * sys.A - BtPA.transpose() * gain_term;
    P_next = 0.5 * (P_next + P_next.transpose());
    defect = (P_next - P).cwiseAbs().maxCoeff();
    P = std::move(P_next);
    if (defect <= tol) break;
  }
  if (defect > tol) {
    throw std::runtime_error("lqr_gain: Riccati iteration did not converge");
  }

  LqrResult result;
  result.P = P;
  result.K = (R + Bt * P * sys.B).ldlt().solve(Bt * P * sys.A);
  return result;
}

MpcWeights lqr_terminal_weights(const LinearSystem& sys, Mat Q, Mat R, int horizon) {
  MpcWeights w;
  w.Q_N = lqr_gain(sys, Q, R).P;
  w.Q = std::move(Q);
  w.R = std::move(R);
  w.horizon = horizon;
  return w;
}

CondensedTemplate build_condensed_mpc(const LinearSystem& sys, const MpcWeights& weights,
                                      const BoxLimits& limits, const Mat& K) {
  check_dims(sys, weights, limits);
  if (K.rows() != sys.nu() || K.cols() != sys.nx()) {
    throw std::invalid_argument("gain dimensions inconsistent");
  }

  CondensedTemplate tmpl;
  tmpl.K = K;
  tmpl.Abar = sys.A - sys.B * K;
  if (spectral_radius(tmpl.Abar) >= 1.0) {
    throw std::invalid_argument("build_condensed_mpc: K is not stabilizing");
  }
  tmpl.nx = sys.nx();
  tmpl.nu = sys.nu();
  tmpl.horizon = weights.horizon;

  std::tie(tmpl.S, tmpl.M) = build_sm(sys, K, weights.horizon);

  const Mat H = build_cost_hessian(weights, sys.nx(), sys.nu());
  const Mat HS = H * tmpl.S;
  tmpl.Hbar = tmpl.S.transpose() * HS;
  tmpl.Hbar = 0.5 * (tmpl.Hbar + tmpl.Hbar.transpose());
  tmpl.offset_g = HS.transpose() * tmpl.M;

  const LimitRows lim_rows = build_limit_rows(sys, limits, weights.horizon);
  tmpl.Gbar = lim_rows.G * tmpl.S;
  tmpl.offset_c = lim_rows.G * tmpl.M;
  tmpl.c_base = lim_rows.c;
  tmpl.d_base = lim_rows.d;
  return tmpl;
}

QProblem instantiate(const CondensedTemplate& tmpl, const Vec& x0) {
  if (x0.size() != tmpl.nx) throw std::invalid_argument("instantiate: x0 dimension mismatch");
  QProblem p;
  p.H = tmpl.Hbar;
  p.g = tmpl.offset_g * x0;
  p.G = tmpl.Gbar;
  const Vec shift = tmpl.offset_c * x0;
  p.c = tmpl.c_base - shift;
  p.d = tmpl.d_base - shift;
  return p;
}

Trajectory recover_trajectory(const CondensedTemplate& tmpl, const Vec& ytilde,
                              const Vec& x0) {
  if (ytilde.size() != tmpl.horizon * tmpl.nu || x0.size() != tmpl.nx) {
    throw std::invalid_argument("recover_trajectory: dimension mismatch");
  }
  const Vec y = tmpl.S * ytilde + tmpl.M * x0;
  Trajectory traj;
  traj.states.resize(tmpl.nx, tmpl.horizon);
  traj.controls.resize(tmpl.nu, tmpl.horizon);
  for (Index k = 0; k < tmpl.horizon; ++k) {
    traj.controls.col(k) = y.segment(u_offset(k, tmpl.nx, tmpl.nu), tmpl.nu);
    traj.states.col(k) = y.segment(x_offset(k, tmpl.nx, tmpl.nu), tmpl.nx);
  }
  return traj;
}

ConditionReport condition_report(const LinearSystem& sys, const MpcWeights& weights,
                                 int horizon) {
  MpcWeights w = weights;
  w.horizon = horizon;
  const Mat H = build_cost_hessian(w, sys.nx(), sys.nu());

  auto condensed_hessian = [&](const Mat& K) {
    auto [S, M] = build_sm(sys, K, horizon);
    (void)M;
    Mat Hbar = S.transpose() * H * S;
    return Mat(0.5 * (Hbar + Hbar.transpose()));
  };

  ConditionReport report;
  report.cond_naive = svd_condition_number(condensed_hessian(Mat::Zero(sys.nu(), sys.nx())));
  report.cond_lqr = svd_condition_number(condensed_hessian(lqr_gain(sys, w.Q, w.R).K));
  return report;
}

}  // namespace clampqp::mpc
