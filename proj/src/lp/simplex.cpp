#include "shmpc/lp/simplex.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace shmpc::lp {

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Tableau layout: rows 0..m-1 are constraints, row m holds reduced costs.
// Columns 0..n-1 structural, n..n+m-1 artificial, last column the rhs.
class Tableau {
 public:
  Tableau(const Mat& A, const Vec& b, const SimplexOptions& opts)
      : m_(A.rows()), n_(A.cols()), opts_(opts), sign_(m_), basis_(m_) {
    T_.setZero(m_ + 1, n_ + m_ + 1);
    for (Eigen::Index i = 0; i < m_; ++i) {
      sign_(i) = b(i) < 0 ? -1.0 : 1.0;
      T_.row(i).head(n_) = sign_(i) * A.row(i);
      T_(i, n_ + i) = 1.0;
      T_(i, rhs()) = sign_(i) * b(i);
      basis_[i] = n_ + i;
    }
    bnorm_ = b.size() ? b.cwiseAbs().maxCoeff() : 0.0;
    max_iter_ = opts.max_iterations > 0 ? opts.max_iterations
                                        : static_cast<int>(50 * (m_ + n_) + 1000);
  }

  Eigen::Index rhs() const { return n_ + m_; }

  void set_phase1_costs() {
    T_.row(m_).setZero();
    for (Eigen::Index i = 0; i < m_; ++i) T_.row(m_) -= T_.row(i);
    for (Eigen::Index i = 0; i < m_; ++i) T_(m_, n_ + i) = 0.0;
  }

  void set_phase2_costs(const Vec& c) {
    T_.row(m_).setZero();
    T_.row(m_).head(n_) = c.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double cb = basis_[i] < n_ ? c(basis_[i]) : 0.0;
      if (cb != 0.0) T_.row(m_) -= cb * T_.row(i);
    }
  }

  // Returns Optimal, Unbounded (with entering column in unbounded_col_) or IterationLimit.
  Status iterate(bool allow_artificial) {
    int degenerate_run = 0;
    while (iterations_ < max_iter_) {
      const bool bland = degenerate_run > 30;
      const Eigen::Index limit = allow_artificial ? n_ + m_ : n_;
      Eigen::Index q = -1;
      double best = -opts_.optimality_tol;
      for (Eigen::Index j = 0; j < limit; ++j) {
        const double d = T_(m_, j);
        if (d < best) {
          q = j;
          if (bland) break;
          best = d;
        }
      }
      if (q < 0) return Status::Optimal;

      Eigen::Index r = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      double best_piv = 0.0;
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double piv = T_(i, q);
        if (piv <= opts_.pivot_tol) continue;
        const double ratio = std::max(T_(i, rhs()), 0.0) / piv;
        if (ratio < best_ratio - 1e-12) {
          best_ratio = ratio;
          best_piv = piv;
          r = i;
        } else if (ratio <= best_ratio + 1e-12) {
          const bool take = bland ? basis_[i] < basis_[r] : piv > best_piv;
          if (take) {
            best_ratio = std::min(best_ratio, ratio);
            best_piv = piv;
            r = i;
          }
        }
      }
      if (r < 0) {
        unbounded_col_ = q;
        return Status::Unbounded;
      }
      degenerate_run = best_ratio <= 1e-12 ? degenerate_run + 1 : 0;
      pivot(r, q);
      ++iterations_;
    }
    return Status::IterationLimit;
  }

  void pivot(Eigen::Index r, Eigen::Index q) {
    T_.row(r) /= T_(r, q);
    Vec col = T_.col(q);
    col(r) = 0.0;
    T_.noalias() -= col * T_.row(r);
    T_(r, q) = 1.0;
    basis_[r] = q;
  }

  // Pivots zero-level artificials out of the basis where a structural column allows it.
  void expel_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      Eigen::Index q = -1;
      double best = 1e-9;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(T_(i, j)) > best) {
          best = std::abs(T_(i, j));
          q = j;
        }
      }
      if (q >= 0) pivot(i, q);
    }
  }

  double objective_value() const { return -T_(m_, rhs()); }
  double infeasibility_tol() const { return opts_.feasibility_tol * std::max(1.0, bnorm_); }

  Vec primal() const {
    Vec x = Vec::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i)
      if (basis_[i] < n_) x(basis_[i]) = std::max(T_(i, rhs()), 0.0);
    return x;
  }

  // y for the original (unflipped) rows. Artificial i has cost `art_cost`.
  Vec row_duals(double art_cost) const {
    Vec y(m_);
    for (Eigen::Index i = 0; i < m_; ++i) y(i) = sign_(i) * (art_cost - T_(m_, n_ + i));
    return y;
  }

  Vec ray() const {
    Vec d = Vec::Zero(n_);
    d(unbounded_col_) = 1.0;
    for (Eigen::Index i = 0; i < m_; ++i)
      if (basis_[i] < n_) d(basis_[i]) = -T_(i, unbounded_col_);
    return d;
  }

  int iterations() const { return iterations_; }

 private:
  Eigen::Index m_, n_;
  SimplexOptions opts_;
  RowMat T_;
  Vec sign_;
  std::vector<Eigen::Index> basis_;
  double bnorm_ = 0.0;
  int max_iter_ = 0;
  int iterations_ = 0;
  Eigen::Index unbounded_col_ = -1;
};

}  // namespace

StandardResult solve_standard(const Mat& A, const Vec& b, const Vec& c,
                              const SimplexOptions& opts) {
  StandardResult res;
  Tableau tab(A, b, opts);

  tab.set_phase1_costs();
  Status s1 = tab.iterate(true);
  res.iterations = tab.iterations();
  if (s1 == Status::IterationLimit) return res;
  if (tab.objective_value() > tab.infeasibility_tol()) {
    res.status = Status::Infeasible;
    res.farkas = tab.row_duals(1.0);
    return res;
  }
  tab.expel_artificials();

  tab.set_phase2_costs(c);
  Status s2 = tab.iterate(false);
  res.iterations = tab.iterations();
  res.status = s2;
  if (s2 == Status::Unbounded) {
    res.ray = tab.ray();
    res.x = tab.primal();
    return res;
  }
  if (s2 != Status::Optimal) return res;
  res.x = tab.primal();
  res.duals = tab.row_duals(0.0);
  res.objective = c.dot(res.x);
  return res;
}

SupportResult maximize(const Mat& F, const Vec& f, const Vec& a, const SimplexOptions& opts) {
  // Dual: min f'y s.t. F'y = a, y >= 0.
  const StandardResult d = solve_standard(F.transpose(), a, f, opts);
  SupportResult out;
  switch (d.status) {
    case Status::Optimal:
      out.status = Status::Optimal;
      out.value = d.objective;
      out.point = d.duals;
      out.multipliers = d.x;
      break;
    case Status::Infeasible:
      // Farkas y: F y <= 0, a'y > 0, i.e. an improving recession direction.
      out.status = Status::Unbounded;
      out.ray = d.farkas;
      out.value = std::numeric_limits<double>::infinity();
      break;
    case Status::Unbounded:
      out.status = Status::Infeasible;
      break;
    case Status::IterationLimit:
      out.status = Status::IterationLimit;
      break;
  }
  return out;
}

}  // namespace shmpc::lp
