#include "shmpc/mpc/qp.hpp"

#include "shmpc/error.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace shmpc::mpc {

using RowSp = Eigen::SparseMatrix<double, Eigen::RowMajor>;

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::MaxIterations: return "max_iterations";
    case QpStatus::Numerical: return "numerical";
  }
  return "unknown";
}

double QpProblem::objective(const Vec& x) const { return 0.5 * x.dot(P * x) + q.dot(x) + c0; }

double QpProblem::max_violation(const Vec& x) const {
  double v = 0.0;
  if (A.rows()) v = std::max(v, (A * x - b).cwiseAbs().maxCoeff());
  if (C.rows()) v = std::max(v, (C * x - d).maxCoeff());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::isfinite(lb(i))) v = std::max(v, lb(i) - x(i));
    if (std::isfinite(ub(i))) v = std::max(v, x(i) - ub(i));
  }
  return v;
}

namespace {

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// G = [C; -I_lb; I_ub] applied without forming the bound rows.
struct Stack {
  const SpMat& C;
  std::vector<Eigen::Index> lo, up;
  Eigen::Index mc = 0, mi = 0, n = 0;

  Stack(const QpProblem& qp) : C(qp.C), mc(qp.C.rows()), n(qp.num_variables()) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::isfinite(qp.lb(i))) lo.push_back(i);
      if (std::isfinite(qp.ub(i))) up.push_back(i);
    }
    mi = mc + static_cast<Eigen::Index>(lo.size() + up.size());
  }

  Vec rhs(const QpProblem& qp) const {
    Vec h(mi);
    h.head(mc) = qp.d;
    Eigen::Index r = mc;
    for (auto i : lo) h(r++) = -qp.lb(i);
    for (auto i : up) h(r++) = qp.ub(i);
    return h;
  }

  // out = G x
  void mul(const Vec& x, Vec& out) const {
    out.resize(mi);
    if (mc) out.head(mc).noalias() = C * x;
    double* o = out.data() + mc;
    for (auto i : lo) *o++ = -x(i);
    for (auto i : up) *o++ = x(i);
  }

  // out = G' z
  void tmul(const Vec& z, Vec& out) const {
    out.resize(n);
    if (mc)
      out.noalias() = C.transpose() * z.head(mc);
    else
      out.setZero();
    const double* zz = z.data() + mc;
    for (auto i : lo) out(i) -= *zz++;
    for (auto i : up) out(i) += *zz++;
  }

  Vec mul(const Vec& x) const {
    Vec out;
    mul(x, out);
    return out;
  }
  Vec tmul(const Vec& z) const {
    Vec out;
    tmul(z, out);
    return out;
  }
};

// Reduced KKT matrix [[P + G'WG + rho I, A'], [A, -delta I]].
//
// Columns whose only couplings are a diagonal Hessian entry, their bounds and
// a few equality rows are eliminated in closed form; their Schur complement
// lands on the equality block. The rest is stored as an upper triangle in a
// fill-reducing order computed once, with values refreshed from the weights
// W through precomputed scatter positions.
class Kkt {
 public:
  Kkt(const SpMat& P, const SpMat& A, const Stack& G, double rho, double delta)
      : n_(P.rows()), me_(A.rows()), rho_(rho), delta_(delta), P_(P), A_(A), G_(G) {
    const RowSp Cr = G.C;
    std::vector<int> c_count(static_cast<std::size_t>(n_), 0);
    for (Eigen::Index k = 0; k < G.C.outerSize(); ++k) c_count[k] = static_cast<int>(G.C.col(k).nonZeros());
    Pdiag_ = Vec::Zero(n_);
    std::vector<bool> offdiag(static_cast<std::size_t>(n_), false);
    for (Eigen::Index k = 0; k < P.outerSize(); ++k)
      for (SpMat::InnerIterator it(P, k); it; ++it) {
        if (it.row() == it.col())
          Pdiag_(k) += it.value();
        else
          offdiag[k] = true;
      }
    slot_.assign(static_cast<std::size_t>(n_), -1);
    for (Eigen::Index j = 0; j < n_; ++j) {
      const bool eliminate = !offdiag[j] && c_count[j] == 0 && A.col(j).nonZeros() <= kMaxEliminatedNnz;
      if (eliminate)
        elim_.push_back(j);
      else
        slot_[j] = static_cast<int>(kept_.size()), kept_.push_back(j);
    }
    const Eigen::Index nk = static_cast<Eigen::Index>(kept_.size());
    const Eigen::Index N = nk + me_;
    auto row_of = [&](Eigen::Index eq) { return nk + eq; };

    std::vector<std::pair<Eigen::Index, Eigen::Index>> pat;
    for (Eigen::Index c = 0; c < N; ++c) pat.emplace_back(c, c);
    for (Eigen::Index k = 0; k < P.outerSize(); ++k)
      for (SpMat::InnerIterator it(P, k); it; ++it)
        if (it.row() > it.col()) pat.emplace_back(slot_[it.row()], slot_[it.col()]);
    for (Eigen::Index i = 0; i < Cr.outerSize(); ++i)
      for (RowSp::InnerIterator a(Cr, i); a; ++a)
        for (RowSp::InnerIterator b(Cr, i); b; ++b)
          if (a.col() > b.col()) pat.emplace_back(slot_[a.col()], slot_[b.col()]);
    for (Eigen::Index k : kept_)
      for (SpMat::InnerIterator it(A, k); it; ++it) pat.emplace_back(row_of(it.row()), slot_[k]);
    for (Eigen::Index k : elim_)
      for (SpMat::InnerIterator a(A, k); a; ++a)
        for (SpMat::InnerIterator b(A, k); b; ++b)
          if (a.row() > b.row()) pat.emplace_back(row_of(a.row()), row_of(b.row()));

    {
      std::vector<Eigen::Triplet<double>> t;
      t.reserve(2 * pat.size());
      for (auto [r, c] : pat) {
        t.emplace_back(r, c, 1.0);
        t.emplace_back(c, r, 1.0);
      }
      SpMat full(N, N);
      full.setFromTriplets(t.begin(), t.end());
      Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> pinv;
      Eigen::AMDOrdering<int>()(full, pinv);
      Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> p = pinv.inverse();
      perm_ = p.indices();
    }
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(pat.size());
    for (auto [r, c] : pat) {
      const int pr = perm_(r), pc = perm_(c);
      t.emplace_back(std::min(pr, pc), std::max(pr, pc), 0.0);
    }
    K_.resize(N, N);
    K_.setFromTriplets(t.begin(), t.end());
    K_.makeCompressed();

    for (Eigen::Index j : kept_) diag_.push_back(index(slot_[j], slot_[j]));
    for (Eigen::Index k = 0; k < P.outerSize(); ++k)
      for (SpMat::InnerIterator it(P, k); it; ++it)
        if (it.row() >= it.col() && slot_[k] >= 0) fixed_.push_back({index(slot_[it.row()], slot_[k]), it.value()});
    for (Eigen::Index k : kept_)
      for (SpMat::InnerIterator it(A, k); it; ++it) fixed_.push_back({index(row_of(it.row()), slot_[k]), it.value()});
    for (Eigen::Index r = 0; r < me_; ++r) eq_diag_.push_back(index(row_of(r), row_of(r)));
    row_start_.push_back(0);
    for (Eigen::Index i = 0; i < Cr.outerSize(); ++i) {
      for (RowSp::InnerIterator a(Cr, i); a; ++a)
        for (RowSp::InnerIterator b(Cr, i); b; ++b)
          if (a.col() >= b.col()) scatter_.push_back({index(slot_[a.col()], slot_[b.col()]), a.value() * b.value()});
      row_start_.push_back(scatter_.size());
    }
    schur_start_.push_back(0);
    for (Eigen::Index k : elim_) {
      for (SpMat::InnerIterator a(A, k); a; ++a)
        for (SpMat::InnerIterator b(A, k); b; ++b)
          if (a.row() >= b.row()) schur_.push_back({index(row_of(a.row()), row_of(b.row())), a.value() * b.value()});
      schur_start_.push_back(schur_.size());
    }
    elim_ptr_.push_back(0);
    for (Eigen::Index k : elim_) {
      for (SpMat::InnerIterator it(A, k); it; ++it) {
        elim_row_.push_back(static_cast<int>(it.row()));
        elim_val_.push_back(it.value());
      }
      elim_ptr_.push_back(static_cast<int>(elim_row_.size()));
    }
    ldlt_.analyzePattern(K_);
  }

  // Retries with stronger regularization when a pivot breaks down; the
  // refinement in solve() works against the unregularized matrix.
  bool factorize(const Vec& w) {
    w_ = w;
    for (double boost : {1.0, 1e3, 1e6})
      if (factorize(w, boost)) return true;
    return false;
  }

  bool factorize(const Vec& w, double boost) {
    // Diagonal contributed by the bound rows.
    Vec dg = Vec::Constant(n_, rho_ * boost);
    const Eigen::Index mc = G_.mc;
    Eigen::Index r = mc;
    for (auto i : G_.lo) dg(i) += w(r++);
    for (auto i : G_.up) dg(i) += w(r++);

    double* v = K_.valuePtr();
    std::fill(v, v + K_.nonZeros(), 0.0);
    for (const auto& e : fixed_) v[e.idx] += e.val;
    for (Eigen::Index idx : eq_diag_) v[idx] -= delta_ * boost;
    for (std::size_t k = 0; k < kept_.size(); ++k) v[diag_[k]] += dg(kept_[k]);
    for (Eigen::Index i = 0; i < mc; ++i) {
      const double wi = w(i);
      for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) v[scatter_[k].idx] += wi * scatter_[k].val;
    }
    dinv_.resize(static_cast<Eigen::Index>(elim_.size()));
    for (std::size_t k = 0; k < elim_.size(); ++k) {
      const double d = Pdiag_(elim_[k]) + dg(elim_[k]);
      if (!(d > 0)) return false;
      const double di = 1.0 / d;
      dinv_(static_cast<Eigen::Index>(k)) = di;
      for (std::size_t e = schur_start_[k]; e < schur_start_[k + 1]; ++e) v[schur_[e].idx] -= di * schur_[e].val;
    }
    ldlt_.factorize(K_);
    return ldlt_.info() == Eigen::Success;
  }

  // Solves the unregularized system; refines only when the regularization
  // leaves a visible residual, and stops as soon as a round does not help.
  void solve(const Vec& r1, const Vec& r2, Vec& dx, Vec& dy) const {
    reduced_solve(r1, r2, dx, dy);
    const double target = 1e-10 * std::max({1.0, inf_norm(r1), inf_norm(r2)});
    residual(r1, r2, dx, dy, e1_, e2_);
    double err = std::max(inf_norm(e1_), inf_norm(e2_));
    for (int it = 0; it < 3 && err > target; ++it) {
      reduced_solve(e1_, e2_, c1_, c2_);
      c1_ += dx;
      c2_ += dy;
      residual(r1, r2, c1_, c2_, e1_, e2_);
      const double next = std::max(inf_norm(e1_), inf_norm(e2_));
      if (!(next < err)) break;
      dx.swap(c1_);
      dy.swap(c2_);
      err = next;
    }
  }

 private:
  static constexpr Eigen::Index kMaxEliminatedNnz = 8;

  struct Entry {
    Eigen::Index idx;
    double val;
  };

  void reduced_solve(const Vec& r1, const Vec& r2, Vec& dx, Vec& dy) const {
    const Eigen::Index nk = static_cast<Eigen::Index>(kept_.size());
    b_.resize(nk + me_);
    for (Eigen::Index k = 0; k < nk; ++k) b_(perm_(k)) = r1(kept_[k]);
    r2e_ = r2;
    const std::size_t ne = elim_.size();
    for (std::size_t k = 0; k < ne; ++k) {
      const double f = r1(elim_[k]) * dinv_(static_cast<Eigen::Index>(k));
      for (int e = elim_ptr_[k]; e < elim_ptr_[k + 1]; ++e) r2e_(elim_row_[e]) -= elim_val_[e] * f;
    }
    for (Eigen::Index r = 0; r < me_; ++r) b_(perm_(nk + r)) = r2e_(r);
    ldlt_.matrixL().solveInPlace(b_);
    b_.array() /= ldlt_.vectorD().array();
    ldlt_.matrixU().solveInPlace(b_);
    dx.resize(n_);
    dy.resize(me_);
    for (Eigen::Index k = 0; k < nk; ++k) dx(kept_[k]) = b_(perm_(k));
    for (Eigen::Index r = 0; r < me_; ++r) dy(r) = b_(perm_(nk + r));
    for (std::size_t k = 0; k < ne; ++k) {
      double acc = r1(elim_[k]);
      for (int e = elim_ptr_[k]; e < elim_ptr_[k + 1]; ++e) acc -= elim_val_[e] * dy(elim_row_[e]);
      dx(elim_[k]) = acc * dinv_(static_cast<Eigen::Index>(k));
    }
  }

  void residual(const Vec& r1, const Vec& r2, const Vec& x, const Vec& y, Vec& e1, Vec& e2) const {
    G_.mul(x, gx_);
    gx_.array() *= w_.array();
    G_.tmul(gx_, e1);
    e1 = r1 - e1;
    e1.noalias() -= P_ * x;
    if (me_) {
      e1.noalias() -= A_.transpose() * y;
      e2 = r2;
      e2.noalias() -= A_ * x;
    } else {
      e2.resize(0);
    }
  }

  Eigen::Index index(Eigen::Index r0, Eigen::Index c0) const {
    int r = perm_(r0), c = perm_(c0);
    if (r > c) std::swap(r, c);
    const int* inner = K_.innerIndexPtr();
    const int* begin = inner + K_.outerIndexPtr()[c];
    const int* end = inner + K_.outerIndexPtr()[c + 1];
    const int* it = std::lower_bound(begin, end, r);
    return it - inner;
  }

  Eigen::Index n_, me_;
  double rho_, delta_;
  const SpMat& P_;
  const SpMat& A_;
  const Stack& G_;
  Vec Pdiag_;
  std::vector<int> slot_;
  std::vector<Eigen::Index> kept_, elim_;
  Eigen::VectorXi perm_;
  SpMat K_;
  std::vector<Eigen::Index> diag_;
  std::vector<Entry> fixed_;
  std::vector<Eigen::Index> eq_diag_;
  std::vector<Entry> scatter_;
  std::vector<std::size_t> row_start_;
  std::vector<Entry> schur_;
  std::vector<std::size_t> schur_start_;
  std::vector<int> elim_ptr_, elim_row_;
  std::vector<double> elim_val_;
  Vec dinv_;
  Vec w_;
  mutable Vec b_, r2e_, e1_, e2_, c1_, c2_, gx_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Upper, Eigen::NaturalOrdering<int>> ldlt_;
};

}  // namespace

QpResult solve_qp(const QpProblem& qp, const QpOptions& opts, const QpResult* warm) {
  const Eigen::Index n = qp.num_variables();
  if (qp.P.rows() != n || qp.P.cols() != n || qp.A.cols() != n || qp.C.cols() != n || qp.b.size() != qp.A.rows() ||
      qp.d.size() != qp.C.rows() || qp.lb.size() != n || qp.ub.size() != n)
    throw Error(ErrorKind::DimMismatch, "QP data dimensions");

  const Stack G(qp);
  const Eigen::Index mi = G.mi;
  const Vec h = G.rhs(qp);
  const SpMat& A = qp.A;
  const Vec& b = qp.b;
  const Eigen::Index me = A.rows();

  QpResult res;
  const double scale_q = std::max(1.0, inf_norm(qp.q));
  const double scale_b = std::max(1.0, inf_norm(b));
  const double scale_h = std::max(1.0, inf_norm(h));

  Vec x, y, z, s;
  // Work vectors, allocated once.
  Vec Px(n), Gtz(n), Aty(n), rd(n), rp(me), rs(mi), Gx(mi);
  Vec w(mi), tmp(mi), r1(n), dx(n), dy(me), dz(mi), ds(mi), rc(mi), sz(mi);

  auto residuals = [&] {
    Px.noalias() = qp.P * x;
    G.tmul(z, Gtz);
    if (me)
      Aty.noalias() = A.transpose() * y;
    else
      Aty.setZero();
    rd = Px + qp.q + Gtz + Aty;
    if (me) {
      rp = -b;
      rp.noalias() += A * x;
    }
    G.mul(x, Gx);
    rs = Gx + s - h;
  };
  auto converged = [&] {
    const double sz_sum = s.dot(z);
    const double mu = mi ? sz_sum / static_cast<double>(mi) : 0.0;
    res.primal_residual = std::max(inf_norm(rp) / scale_b, inf_norm(rs) / scale_h);
    res.dual_residual = inf_norm(rd) / scale_q;
    const double pobj = 0.5 * x.dot(Px) + qp.q.dot(x) + qp.c0;
    res.gap = mi ? sz_sum / std::max(1.0, std::abs(pobj)) : 0.0;
    return res.primal_residual <= opts.eps_feas && res.dual_residual <= opts.eps_feas && res.gap <= opts.eps_gap &&
           mu >= 0.0;
  };
  auto finish = [&](QpStatus st, int it) {
    res.status = st;
    res.reduced_accuracy = false;
    res.x = x;
    res.y = y;
    res.z = z;
    res.s = s;
    res.objective = qp.objective(x);
    res.iterations = it;
    return res;
  };

  if (warm && warm->x.size() == n && warm->y.size() == me && warm->z.size() == mi && warm->s.size() == mi &&
      (warm->s.array() > 0).all() && (warm->z.array() > 0).all()) {
    x = warm->x;
    y = warm->y;
    z = warm->z;
    s = warm->s;
    residuals();
    if (converged()) return finish(QpStatus::Optimal, 0);
  }

  Kkt kkt(qp.P, A, G, opts.reg_primal, opts.reg_dual);
  // Initial point: the KKT system with W = I, then shift slacks and duals inside the cone.
  {
    if (!kkt.factorize(Vec::Ones(mi))) return finish(QpStatus::Numerical, 0);
    G.tmul(h, r1);
    r1 -= qp.q;
    kkt.solve(r1, b, x, y);
    G.mul(x, z);
    z -= h;
    s = -z;
    if (mi) {
      const double ap = -s.minCoeff();
      if (ap >= -1e-8) s.array() += 1.0 + ap;
      const double ad = -z.minCoeff();
      if (ad >= -1e-8) z.array() += 1.0 + ad;
    }
  }

  // Largest step in (0, 1] keeping s + a ds and z + a dz nonnegative.
  auto max_step = [&]() {
    double a = 1.0;
    const double *sp = s.data(), *dsp = ds.data(), *zp = z.data(), *dzp = dz.data();
    for (Eigen::Index i = 0; i < mi; ++i) {
      if (dsp[i] < 0) a = std::min(a, -sp[i] / dsp[i]);
      if (dzp[i] < 0) a = std::min(a, -zp[i] / dzp[i]);
    }
    return a;
  };
  // dz = W (G dx + rs - Z^{-1} rc), ds = -Z^{-1}(rc + S dz)
  auto direction = [&] {
    tmp = rs - rc.cwiseQuotient(z);
    dz = w.cwiseProduct(tmp);
    G.tmul(dz, r1);
    r1 = -rd - r1;
    if (me) rp = -rp;
    kkt.solve(r1, rp, dx, dy);
    if (me) rp = -rp;
    G.mul(dx, dz);
    dz = w.cwiseProduct(dz + tmp);
    ds = -(rc + s.cwiseProduct(dz)).cwiseQuotient(z);
  };

  // Best iterate so far, measured against the full tolerances. Returned with
  // reduced_accuracy when the method stalls or breaks down after reaching the
  // reduced tolerances.
  struct Best {
    double merit = std::numeric_limits<double>::infinity();
    double pr = 0, du = 0, gap = 0;
    Vec x, y, z, s;
    int it = -1;
  } best;
  auto fallback = [&](QpStatus st, int it) {
    if (best.it >= 0 && best.pr <= opts.eps_feas_reduced && best.du <= opts.eps_feas_reduced &&
        best.gap <= opts.eps_gap_reduced) {
      x.swap(best.x);
      y.swap(best.y);
      z.swap(best.z);
      s.swap(best.s);
      QpResult r = finish(QpStatus::Optimal, it);
      r.primal_residual = best.pr;
      r.dual_residual = best.du;
      r.gap = best.gap;
      r.reduced_accuracy = true;
      return r;
    }
    return finish(st, it);
  };

  for (int it = 0; it < opts.max_iterations; ++it) {
    residuals();
    if (converged()) return finish(QpStatus::Optimal, it);
    const double merit = std::max({res.primal_residual / opts.eps_feas, res.dual_residual / opts.eps_feas,
                                   res.gap / opts.eps_gap});
    if (merit < 0.5 * best.merit) {
      best.merit = merit;
      best.pr = res.primal_residual;
      best.du = res.dual_residual;
      best.gap = res.gap;
      best.x = x;
      best.y = y;
      best.z = z;
      best.s = s;
      best.it = it;
    } else if (it - best.it >= opts.stall_iterations) {
      return fallback(QpStatus::MaxIterations, it);
    }

    // Farkas test: A'y + G'z ~ 0 with b'y + h'z < 0 certifies primal infeasibility.
    if (mi) {
      const double lin = (me ? b.dot(y) : 0.0) + h.dot(z);
      const double size = std::max(inf_norm(y), inf_norm(z));
      if (lin < 0 && size > 1e3 && inf_norm(Gtz + Aty) <= opts.eps_infeas * (-lin))
        return finish(QpStatus::Infeasible, it);
    }

    const double mu = mi ? s.dot(z) / static_cast<double>(mi) : 0.0;
    w = z.cwiseQuotient(s);
    if (!kkt.factorize(w)) return fallback(QpStatus::Numerical, it);

    sz = s.cwiseProduct(z);
    rc = sz;
    direction();
    const double a_aff = max_step();
    double sigma = 0.0;
    if (mi) {
      const double mu_aff = (s + a_aff * ds).dot(z + a_aff * dz) / static_cast<double>(mi);
      sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);
    }
    rc = sz + ds.cwiseProduct(dz);
    rc.array() -= sigma * mu;
    direction();
    const double step = std::min(1.0, 0.99 * max_step());
    x += step * dx;
    if (me) y += step * dy;
    z += step * dz;
    s += step * ds;
    if (!x.allFinite() || !z.allFinite()) return fallback(QpStatus::Numerical, it + 1);
  }
  residuals();
  if (converged()) return finish(QpStatus::Optimal, opts.max_iterations);
  return fallback(QpStatus::MaxIterations, opts.max_iterations);
}

namespace {

Json triplets(const SpMat& M) {
  Json rows = Json::array(), cols = Json::array(), vals = Json::array();
  for (Eigen::Index k = 0; k < M.outerSize(); ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it) {
      rows.push_back(it.row());
      cols.push_back(it.col());
      vals.push_back(it.value());
    }
  return {{"shape", {M.rows(), M.cols()}}, {"rows", rows}, {"cols", cols}, {"vals", vals}};
}

Json bounds(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out.push_back(std::isfinite(v(i)) ? Json(v(i)) : Json(nullptr));
  return out;
}

}  // namespace

Json to_json(const QpProblem& qp) {
  return {{"n", qp.num_variables()},
          {"P", triplets(qp.P)},
          {"q", shmpc::to_json(qp.q)},
          {"c0", qp.c0},
          {"A", triplets(qp.A)},
          {"b", shmpc::to_json(qp.b)},
          {"C", triplets(qp.C)},
          {"d", shmpc::to_json(qp.d)},
          {"lb", bounds(qp.lb)},
          {"ub", bounds(qp.ub)}};
}

}  // namespace shmpc::mpc
