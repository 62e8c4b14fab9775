#include "shmpc/mpc/problem.hpp"

#include "shmpc/error.hpp"

#include <chrono>

namespace shmpc::mpc {

using geometry::HPolytope;
using geometry::Zonotope;

condense::StageSetup ManeuverProblem::stage_setup(const condense::ApproxOptions& approx) const {
  return {sys, H(), F_bar, approx};
}

void ManeuverProblem::validate() const {
  sys.validate();
  const Eigen::Index n = sys.n(), m = sys.m();
  if (F.dim() != n + m) throw Error(ErrorKind::DimMismatch, "F must live in R^{n+m}");
  if (X_T.dim() != n) throw Error(ErrorKind::DimMismatch, "X_T must live in R^n");
  if (W.dim() != n) throw Error(ErrorKind::DimMismatch, "W must live in R^n");
  if (Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m)
    throw Error(ErrorKind::DimMismatch, "cost weights");
  if (x_ref.size() != n) throw Error(ErrorKind::DimMismatch, "reference state");
  if (N0 < 1 || N_max < 1) throw Error(ErrorKind::InvalidArgument, "horizon parameters must be positive");
  if (s0.horizon() != N0) throw Error(ErrorKind::InvalidArgument, "initial blocking must sum to N0");
  if (s0.size() > N_max) throw Error(ErrorKind::InvalidArgument, "initial blocking longer than N_max");
  Eigen::LLT<Mat> llt(H());
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::InvalidArgument, "stage weight must be positive definite");
}

ManeuverProblem make_problem_with_tube(tube::LTISystem sys, HPolytope F, HPolytope X_T, Zonotope W, Mat Q, Mat R,
                                       int N0, int N_max, Vec x_ref, blocking::BlockingVector s0,
                                       tube::TubeDesign tube, tube::TubeProduct product) {
  ManeuverProblem p;
  p.sys = std::move(sys);
  p.F = std::move(F);
  p.X_T = std::move(X_T);
  p.W = std::move(W);
  p.Q = std::move(Q);
  p.R = std::move(R);
  p.N0 = N0;
  p.N_max = N_max;
  p.x_ref = std::move(x_ref);
  p.s0 = std::move(s0);
  p.validate();
  p.tube = std::move(tube);
  if (p.tube.K.rows() != p.sys.m() || p.tube.K.cols() != p.sys.n() || p.tube.P_terminal.rows() != p.sys.n())
    throw Error(ErrorKind::DimMismatch, "tube design does not match the system");
  std::tie(p.F_bar, p.X_T_bar) = tube::tighten(p.F, p.X_T, p.tube.Z(), p.tube.K, product);
  return p;
}

ManeuverProblem make_problem(tube::LTISystem sys, HPolytope F, HPolytope X_T, Zonotope W, Mat Q, Mat R, int N0,
                             int N_max, Vec x_ref, blocking::BlockingVector s0, const ProblemOptions& opts) {
  tube::TubeDesign t = tube::design_tube(sys, Q, R, W, opts.rpi);
  return make_problem_with_tube(std::move(sys), std::move(F), std::move(X_T), std::move(W), std::move(Q),
                                std::move(R), N0, N_max, std::move(x_ref), std::move(s0), std::move(t),
                                opts.product);
}

AssembledQp assemble(const ManeuverProblem& problem, const condense::StageCache& stages, const Vec& x_k,
                     const blocking::BlockingVector& s) {
  const int n = static_cast<int>(problem.sys.n());
  const int m = static_cast<int>(problem.sys.m());
  if (x_k.size() != n || !x_k.allFinite()) throw Error(ErrorKind::InvalidArgument, "state must be finite of size n");
  if (stages.mode() == Mode::Full)
    for (int v : s)
      if (v != 1) throw Error(ErrorKind::InvalidArgument, "full mode needs unit blocking");
  const Mat& Gz = problem.tube.Z().generators();
  AssembledQp out;
  out.s = s;
  QpLayout& L = out.layout;
  L.n = n;
  L.m = m;
  L.blocks = s.size();
  L.g = static_cast<int>(Gz.cols());
  const int nv = L.size();

  std::vector<const condense::BlockStage*> st(static_cast<std::size_t>(L.blocks));
  for (int i = 0; i < L.blocks; ++i) st[i] = &stages.get(s[i]);

  using T = Eigen::Triplet<double>;
  std::vector<T> Pt, At, Ct;
  Vec q = Vec::Zero(nv);
  double c0 = 0.0;
  const Mat Hm = problem.H();
  Vec r = Vec::Zero(n + m);
  r.head(n) = problem.x_ref;
  const double rHr = r.dot(Hm * r);

  // Stage cost: xi' H_blk xi - 2 xi' G_track r + s r'Hr, with xi = (z_i, v_i) contiguous.
  for (int i = 0; i < L.blocks; ++i) {
    const int o = L.z(i);
    const Mat& Hb = st[i]->H_blk;
    for (int a = 0; a < n + m; ++a)
      for (int b = 0; b < n + m; ++b)
        if (Hb(a, b) != 0.0) Pt.emplace_back(o + a, o + b, 2.0 * Hb(a, b));
    q.segment(o, n + m) -= 2.0 * st[i]->G_track * r;
    c0 += s[i] * rHr;
  }
  {
    const int o = L.z(L.blocks);
    const Mat& P = problem.tube.P_terminal;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (P(a, b) != 0.0) Pt.emplace_back(o + a, o + b, 2.0 * P(a, b));
    q.segment(o, n) -= 2.0 * P * problem.x_ref;
    c0 += problem.x_ref.dot(P * problem.x_ref);
  }

  // Equalities: z_0 - G lambda = x_k; z_{i+1} - A_i z_i - B_i v_i = 0.
  const int me = n * (L.blocks + 1);
  Vec b = Vec::Zero(me);
  for (int a = 0; a < n; ++a) {
    At.emplace_back(a, L.z(0) + a, 1.0);
    for (int k = 0; k < L.g; ++k)
      if (Gz(a, k) != 0.0) At.emplace_back(a, L.lambda() + k, -Gz(a, k));
    b(a) = x_k(a);
  }
  for (int i = 0; i < L.blocks; ++i) {
    const int row = n * (i + 1);
    for (int a = 0; a < n; ++a) {
      At.emplace_back(row + a, L.z(i + 1) + a, 1.0);
      for (int c = 0; c < n; ++c)
        if (st[i]->A_blk(a, c) != 0.0) At.emplace_back(row + a, L.z(i) + c, -st[i]->A_blk(a, c));
      for (int c = 0; c < m; ++c)
        if (st[i]->B_blk(a, c) != 0.0) At.emplace_back(row + a, L.v(i) + c, -st[i]->B_blk(a, c));
    }
  }

  // Inequalities: stage sets on (z_i, v_i) and the tightened terminal set.
  Eigen::Index mi = problem.X_T_bar.num_halfspaces();
  for (int i = 0; i < L.blocks; ++i) mi += st[i]->F.num_halfspaces();
  Vec d(mi);
  Eigen::Index row = 0;
  for (int i = 0; i < L.blocks; ++i) {
    const Mat& F = st[i]->F.normals();
    const int o = L.z(i);
    for (Eigen::Index k = 0; k < F.rows(); ++k, ++row) {
      for (int a = 0; a < n + m; ++a)
        if (F(k, a) != 0.0) Ct.emplace_back(row, o + a, F(k, a));
      d(row) = st[i]->F.offsets()(k);
    }
  }
  {
    const Mat& F = problem.X_T_bar.normals();
    const int o = L.z(L.blocks);
    for (Eigen::Index k = 0; k < F.rows(); ++k, ++row) {
      for (int a = 0; a < n; ++a)
        if (F(k, a) != 0.0) Ct.emplace_back(row, o + a, F(k, a));
      d(row) = problem.X_T_bar.offsets()(k);
    }
  }

  QpProblem& qp = out.qp;
  qp.P.resize(nv, nv);
  qp.P.setFromTriplets(Pt.begin(), Pt.end());
  qp.q = q;
  qp.c0 = c0;
  qp.A.resize(me, nv);
  qp.A.setFromTriplets(At.begin(), At.end());
  qp.b = b;
  qp.C.resize(mi, nv);
  qp.C.setFromTriplets(Ct.begin(), Ct.end());
  qp.d = d;
  qp.lb = Vec::Constant(nv, -std::numeric_limits<double>::infinity());
  qp.ub = Vec::Constant(nv, std::numeric_limits<double>::infinity());
  qp.lb.tail(L.g).setConstant(-1.0);
  qp.ub.tail(L.g).setConstant(1.0);
  return out;
}

QpSolution solve(const AssembledQp& aqp, const QpOptions& opts, const QpResult* warm) {
  const QpLayout& L = aqp.layout;
  const auto t0 = std::chrono::steady_clock::now();
  QpResult r = solve_qp(aqp.qp, opts, warm);
  const auto t1 = std::chrono::steady_clock::now();
  QpSolution sol;
  sol.status = r.status;
  sol.iterations = r.iterations;
  sol.solve_seconds = std::chrono::duration<double>(t1 - t0).count();
  sol.cost = r.objective;
  sol.V_bar.resize(static_cast<Eigen::Index>(L.blocks) * L.m);
  sol.Z.resize(L.n, L.blocks + 1);
  for (int i = 0; i < L.blocks; ++i) sol.V_bar.segment(i * L.m, L.m) = r.x.segment(L.v(i), L.m);
  for (int i = 0; i <= L.blocks; ++i) sol.Z.col(i) = r.x.segment(L.z(i), L.n);
  sol.z0 = sol.Z.col(0);
  sol.lambda = r.x.tail(L.g);
  sol.max_violation = aqp.qp.max_violation(r.x);
  sol.raw = std::move(r);
  return sol;
}

Vec control(const Vec& x_k, const QpSolution& sol, const Mat& K) {
  const Eigen::Index m = K.rows();
  return sol.V_bar.head(m) - K * (x_k - sol.z0);
}

Vec rollout_point(const AssembledQp& aqp, const condense::StageCache& stages, const Vec& z0, const Vec& V) {
  const QpLayout& L = aqp.layout;
  if (V.size() != static_cast<Eigen::Index>(L.blocks) * L.m || z0.size() != L.n)
    throw Error(ErrorKind::DimMismatch, "rollout point dimensions");
  Vec x(L.size());
  Vec z = z0;
  for (int i = 0; i < L.blocks; ++i) {
    const auto& st = stages.get(aqp.s[i]);
    x.segment(L.z(i), L.n) = z;
    x.segment(L.v(i), L.m) = V.segment(i * L.m, L.m);
    z = st.A_blk * z + st.B_blk * V.segment(i * L.m, L.m);
  }
  x.segment(L.z(L.blocks), L.n) = z;
  x.tail(L.g).setZero();
  return x;
}

}  // namespace shmpc::mpc
