#pragma once

// Random instances and reference formulations shared by the unit tests and
// the acceptance run.

#include "shmpc/error.hpp"
#include "shmpc/mpc/controller.hpp"
#include "support/oracles.hpp"

#include <limits>
#include <random>
#include <vector>

namespace fixture {

using namespace shmpc;
using blocking::BlockingVector;
using geometry::HPolytope;
using geometry::Zonotope;
using mpc::ManeuverProblem;
using mpc::QpProblem;

inline BlockingVector random_blocking(std::mt19937_64& rng, int N) {
  std::vector<int> s;
  int left = N;
  while (left > 0) {
    const int len = std::uniform_int_distribution<int>(1, left)(rng);
    s.push_back(len);
    left -= len;
  }
  return BlockingVector(s);
}

// Small tracking problem: 2 states, 1 input, box constraints, box disturbance.
// Draws again when the tightened sets come out empty.
inline ManeuverProblem small_problem(std::mt19937_64& rng, int N, const BlockingVector& s0, double w = 0.02) {
  const HPolytope F = HPolytope::box((Vec(3) << -5, -5, -1).finished(), (Vec(3) << 5, 5, 1).finished());
  const HPolytope XT = HPolytope::box(Vec::Constant(2, -2.0), Vec::Constant(2, 2.0));
  const Zonotope W = Zonotope::box(Vec::Constant(2, -w), Vec::Constant(2, w));
  for (;;) {
    tube::LTISystem sys{oracle::uniform_mat(rng, 2, 2, -0.8, 0.8) + Mat::Identity(2, 2) * 0.3,
                        oracle::uniform_mat(rng, 2, 1, 0.2, 1.0), 1.0};
    Vec ref = oracle::uniform_vec(rng, 2, -0.5, 0.5);
    try {
      return mpc::make_problem(sys, F, XT, W, Mat::Identity(2, 2), Mat::Identity(1, 1), N, N, ref, s0);
    } catch (const Error&) {
    }
  }
}

// Per-step formulation with explicit inputs v = (M kron I) Vbar, written
// independently of the condensed stages.
inline QpProblem per_step_qp(const ManeuverProblem& p, const BlockingVector& s, const Vec& x) {
  const int n = 2, m = 1, N = s.horizon(), nb = s.size();
  const Mat& G = p.tube.Z().generators();
  const int g = static_cast<int>(G.cols());
  const int nz = n * (N + 1), nv = nz + nb * m + g;
  const Mat M = s.to_matrix();
  auto vsel = [&](int k) {  // v_k as a row selector over the full variable vector
    Mat S = Mat::Zero(m, nv);
    for (int b = 0; b < nb; ++b) S(0, nz + b) = M(k, b);
    return S;
  };
  Mat P = Mat::Zero(nv, nv);
  Vec q = Vec::Zero(nv);
  double c0 = 0.0;
  const Mat H = p.H();
  Vec r = Vec::Zero(n + m);
  r.head(n) = p.x_ref;
  for (int k = 0; k < N; ++k) {
    Mat E = Mat::Zero(n + m, nv);  // (z_k, v_k)
    E.block(0, n * k, n, n).setIdentity();
    E.bottomRows(m) = vsel(k);
    P += 2.0 * E.transpose() * H * E;
    q -= 2.0 * E.transpose() * H * r;
    c0 += r.dot(H * r);
  }
  {
    Mat E = Mat::Zero(n, nv);
    E.block(0, n * N, n, n).setIdentity();
    P += 2.0 * E.transpose() * p.tube.P_terminal * E;
    q -= 2.0 * E.transpose() * p.tube.P_terminal * p.x_ref;
    c0 += p.x_ref.dot(p.tube.P_terminal * p.x_ref);
  }
  Mat A = Mat::Zero(n * (N + 1), nv);
  Vec b = Vec::Zero(n * (N + 1));
  A.block(0, 0, n, n).setIdentity();
  A.block(0, nz + nb * m, n, g) = -G;
  b.head(n) = x;
  for (int k = 0; k < N; ++k) {
    A.block(n * (k + 1), n * (k + 1), n, n).setIdentity();
    A.block(n * (k + 1), n * k, n, n) = -p.sys.A;
    A.middleRows(n * (k + 1), n) -= p.sys.B * vsel(k);
  }
  const Mat& Fn = p.F_bar.normals();
  const Mat& Tn = p.X_T_bar.normals();
  Mat C = Mat::Zero(Fn.rows() * N + Tn.rows(), nv);
  Vec d(C.rows());
  for (int k = 0; k < N; ++k) {
    Mat E = Mat::Zero(n + m, nv);
    E.block(0, n * k, n, n).setIdentity();
    E.bottomRows(m) = vsel(k);
    C.middleRows(Fn.rows() * k, Fn.rows()) = Fn * E;
    d.segment(Fn.rows() * k, Fn.rows()) = p.F_bar.offsets();
  }
  C.bottomRows(Tn.rows()).middleCols(n * N, n) = Tn;
  d.tail(Tn.rows()) = p.X_T_bar.offsets();
  QpProblem qp;
  qp.P = P.sparseView();
  qp.q = q;
  qp.c0 = c0;
  qp.A = A.sparseView();
  qp.b = b;
  qp.C = C.sparseView();
  qp.d = d;
  qp.lb = Vec::Constant(nv, -std::numeric_limits<double>::infinity());
  qp.ub = Vec::Constant(nv, std::numeric_limits<double>::infinity());
  qp.lb.tail(g).setConstant(-1.0);
  qp.ub.tail(g).setConstant(1.0);
  return qp;
}

// Random 2-state, 1-input system with a box disturbance, stabilized by LQR.
struct RandomTube {
  tube::LTISystem sys;
  Zonotope W;
  tube::TubeDesign tube;
};

inline RandomTube random_tube(std::mt19937_64& rng) {
  RandomTube r;
  r.sys = {oracle::uniform_mat(rng, 2, 2, -1.2, 1.2), oracle::uniform_mat(rng, 2, 1), 1.0};
  r.W = Zonotope::box(Vec::Constant(2, -0.1), Vec::Constant(2, 0.1));
  r.tube = tube::design_tube(r.sys, Mat::Identity(2, 2), Mat::Constant(1, 1, 1.0), r.W);
  return r;
}

// Rejection sample from a bounded polytope's bounding box.
inline std::vector<Vec> sample_in(const HPolytope& P, std::mt19937_64& rng, int count, int max_draws = 2000000) {
  const auto [lo, hi] = P.bounding_box();
  std::vector<Vec> out;
  for (int d = 0; d < max_draws && static_cast<int>(out.size()) < count; ++d) {
    Vec x(lo.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = std::uniform_real_distribution<double>(lo(i), hi(i))(rng);
    if (P.contains(x)) out.push_back(x);
  }
  return out;
}

}  // namespace fixture
