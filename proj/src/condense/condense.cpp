#include "shmpc/condense/condense.hpp"

#include "shmpc/error.hpp"
#include "shmpc/lp/linear_program.hpp"
#include "shmpc/lp/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace shmpc::condense {

using geometry::HPolytope;

std::pair<Mat, Mat> block_dynamics(const tube::LTISystem& sys, int s) {
  if (s < 1) throw Error(ErrorKind::InvalidArgument, "block length must be >= 1");
  sys.validate();
  Mat Aj = Mat::Identity(sys.n(), sys.n());
  Mat Bs = Mat::Zero(sys.n(), sys.m());
  for (int j = 0; j < s; ++j) {
    Bs += Aj * sys.B;
    Aj = sys.A * Aj;
  }
  return {Aj, Bs};
}

Mat block_cost(const Mat& H, const Mat& A_aug, int s) {
  if (s < 1) throw Error(ErrorKind::InvalidArgument, "block length must be >= 1");
  Mat Hs = Mat::Zero(H.rows(), H.cols());
  Mat Aj = Mat::Identity(A_aug.rows(), A_aug.cols());
  for (int j = 0; j < s; ++j) {
    Hs += Aj.transpose() * H * Aj;
    Aj = A_aug * Aj;
  }
  return 0.5 * (Hs + Hs.transpose());
}

Mat block_tracking(const Mat& H, const Mat& A_aug, int s) {
  Mat G = Mat::Zero(H.rows(), H.cols());
  Mat Aj = Mat::Identity(A_aug.rows(), A_aug.cols());
  for (int j = 0; j < s; ++j) {
    G += Aj.transpose() * H;
    Aj = A_aug * Aj;
  }
  return G;
}

namespace {

HPolytope stacked_preimages(const HPolytope& F_bar, const Mat& A_aug, const std::vector<int>& powers) {
  if (A_aug.rows() != F_bar.dim() || A_aug.cols() != F_bar.dim())
    throw Error(ErrorKind::DimMismatch, "augmented matrix does not match the constraint set");
  const Eigen::Index q = F_bar.num_halfspaces();
  Mat F(q * static_cast<Eigen::Index>(powers.size()), F_bar.dim());
  Vec f(F.rows());
  Mat Aj = Mat::Identity(A_aug.rows(), A_aug.cols());
  int cur = 0;
  for (std::size_t k = 0; k < powers.size(); ++k) {
    while (cur < powers[k]) {
      Aj = A_aug * Aj;
      ++cur;
    }
    F.middleRows(static_cast<Eigen::Index>(k) * q, q) = F_bar.normals() * Aj;
    f.segment(static_cast<Eigen::Index>(k) * q, q) = F_bar.offsets();
  }
  return HPolytope(F, f);
}

}  // namespace

HPolytope block_constraints_exact(const HPolytope& F_bar, const Mat& A_aug, int s, ExactMode mode) {
  if (s < 1) throw Error(ErrorKind::InvalidArgument, "block length must be >= 1");
  std::vector<int> powers(static_cast<std::size_t>(s));
  for (int j = 0; j < s; ++j) powers[j] = j;
  HPolytope P = stacked_preimages(F_bar, A_aug, powers);
  return mode == ExactMode::Minimal ? geometry::remove_redundancy(P) : P;
}

TemplateSpec TemplateSpec::midpoint(int s) {
  if (s < 1) throw Error(ErrorKind::InvalidArgument, "block length must be >= 1");
  std::vector<int> pi{0, (s - 1) / 2, s - 1};
  pi.erase(std::unique(pi.begin(), pi.end()), pi.end());
  return {pi};
}

HPolytope build_template(const HPolytope& F_bar, const Mat& A_aug, int s, const TemplateSpec& spec) {
  if (spec.pi.empty()) throw Error(ErrorKind::InvalidArgument, "template index set is empty");
  std::vector<int> pi = spec.pi;
  std::sort(pi.begin(), pi.end());
  pi.erase(std::unique(pi.begin(), pi.end()), pi.end());
  if (pi.front() < 0 || pi.back() > s - 1) throw Error(ErrorKind::InvalidArgument, "template index outside 0..s-1");
  return stacked_preimages(F_bar, A_aug, pi);
}

namespace {

// Cutting-plane master over y = (sigma, x_off[, t]).
struct Master {
  std::vector<Vec> rows;
  std::vector<double> rhs;

  void add(Vec row, double b) {
    rows.push_back(std::move(row));
    rhs.push_back(b);
  }

  lp::SupportResult solve(const Vec& objective) const {
    Mat G(static_cast<Eigen::Index>(rows.size()), objective.size());
    Vec g(G.rows());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      G.row(k).setZero();
      G.row(k).head(rows[k].size()) = rows[k].transpose();
      g(k) = rhs[k];
    }
    return lp::maximize(G, g, objective);
  }
};

struct Separation {
  bool clean = true;
  Mat Lambda;
};

// Adds a cut for each row of F whose true constraint
//   F_r x_off + h_T(sigma o F_r) <= f_r - margin_r / 2
// is violated at (sigma, x_off). Cuts are posed with the full margin, kept well
// above the LP feasibility tolerance so a cut cannot be returned twice.
Separation separate(const HPolytope& F_exact, const HPolytope& templ, const Vec& sigma, const Vec& x_off,
                    double tol, Master& master, bool record) {
  const Eigen::Index d = F_exact.dim();
  const Mat& F = F_exact.normals();
  const Vec& f = F_exact.offsets();
  Separation out;
  if (record) out.Lambda = Mat::Zero(F.rows(), templ.num_halfspaces());
  for (Eigen::Index r = 0; r < F.rows(); ++r) {
    const Vec a = sigma.cwiseProduct(F.row(r).transpose());
    const double margin = 100.0 * tol * std::max(1.0, std::abs(f(r)));
    const lp::SupportResult s = templ.support(a);
    Vec cut = Vec::Zero(2 * d);
    if (s.status == lp::Status::Unbounded) {
      cut.head(d) = F.row(r).transpose().cwiseProduct(s.ray);
      master.add(cut, 0.0);
      out.clean = false;
      continue;
    }
    if (s.status != lp::Status::Optimal) throw Error(ErrorKind::NoConvergence, "template support LP failed");
    const double lhs = F.row(r).dot(x_off) + s.value;
    if (lhs > f(r) - 0.5 * margin) {
      cut.head(d) = F.row(r).transpose().cwiseProduct(s.point);
      cut.tail(d) = F.row(r).transpose();
      master.add(cut, f(r) - margin);
      out.clean = false;
    }
    if (record && s.multipliers.size()) out.Lambda.row(r) = s.multipliers.cwiseMax(0.0).transpose();
  }
  return out;
}

}  // namespace

ApproxSolution inner_approximate_lp(const HPolytope& F_exact, const HPolytope& templ, const ApproxOptions& opts) {
  if (F_exact.dim() != templ.dim()) throw Error(ErrorKind::DimMismatch, "template dimension");
  const Eigen::Index d = F_exact.dim();
  constexpr double kCap = 1e6;
  const double sigma_cap = std::isfinite(opts.sigma_max) ? opts.sigma_max : kCap;
  if (!(opts.sigma_min > 0.0) || sigma_cap < opts.sigma_min)
    throw Error(ErrorKind::InvalidArgument, "invalid sigma bounds");

  Master master;
  for (Eigen::Index k = 0; k < d; ++k) {
    Vec e = Vec::Zero(2 * d);
    e(k) = 1.0;
    master.add(e, sigma_cap);
    master.add(-e, -opts.sigma_min);
    Vec x = Vec::Zero(2 * d);
    x(d + k) = 1.0;
    master.add(x, kCap);
    master.add(-x, kCap);
  }
  // Seed with the cuts at sigma = 1 (or the cap), x_off = 0.
  separate(F_exact, templ, Vec::Constant(d, std::min(1.0, sigma_cap)), Vec::Zero(d), opts.tol, master, false);

  ApproxSolution sol;
  Vec obj = Vec::Zero(2 * d);
  obj.head(d).setOnes();
  Vec y;
  int rounds = 0;
  for (;; ++rounds) {
    if (rounds >= opts.max_rounds) throw Error(ErrorKind::NoConvergence, "inner approximation: too many rounds");
    const lp::SupportResult r = master.solve(obj);
    if (r.status == lp::Status::Infeasible) throw Error(ErrorKind::Infeasible, "template cannot be placed inside the set");
    if (r.status != lp::Status::Optimal) throw Error(ErrorKind::NoConvergence, "inner approximation master LP failed");
    y = r.point;
    if (separate(F_exact, templ, y.head(d), y.tail(d), opts.tol, master, false).clean) break;
  }
  if (!std::isfinite(opts.sigma_max) && y.head(d).maxCoeff() >= kCap * (1.0 - 1e-9))
    throw Error(ErrorKind::Unbounded, "template scaling is unbounded; bound sigma_max");

  if (opts.center_tiebreak) {
    // Among (near) maximizers of sum(sigma), take the smallest ||x_off||_1.
    const double best = y.head(d).sum();
    Master second;
    for (std::size_t k = 0; k < master.rows.size(); ++k) second.add(master.rows[k], master.rhs[k]);
    for (Eigen::Index k = 0; k < d; ++k) {
      Vec row = Vec::Zero(3 * d);
      row(d + k) = 1.0;
      row(2 * d + k) = -1.0;
      second.add(row, 0.0);
      row(d + k) = -1.0;
      second.add(row, 0.0);
    }
    Vec floor_row = Vec::Zero(3 * d);
    floor_row.head(d).setConstant(-1.0);
    second.add(floor_row, -(best - opts.tol * std::max(1.0, best)));
    Vec obj2 = Vec::Zero(3 * d);
    obj2.tail(d).setConstant(-1.0);
    for (;; ++rounds) {
      if (rounds >= 2 * opts.max_rounds) throw Error(ErrorKind::NoConvergence, "inner approximation: too many rounds");
      const lp::SupportResult r = second.solve(obj2);
      if (r.status != lp::Status::Optimal) break;  // keep the phase-one point
      Master cuts;
      const bool clean = separate(F_exact, templ, r.point.head(d), r.point.segment(d, d), opts.tol, cuts, false).clean;
      for (std::size_t k = 0; k < cuts.rows.size(); ++k) second.add(cuts.rows[k], cuts.rhs[k]);
      if (clean) {
        y = r.point.head(2 * d);
        break;
      }
    }
  }

  sol.sigma = y.head(d);
  sol.x_off = y.tail(d);
  sol.rounds = rounds;
  Master unused;
  const Separation fin = separate(F_exact, templ, sol.sigma, sol.x_off, opts.tol, unused, true);
  if (!fin.clean) throw Error(ErrorKind::NoConvergence, "inner approximation failed its final check");
  sol.Lambda = fin.Lambda;
  return sol;
}

ApproxSolution inner_approximate_joint(const HPolytope& F_exact, const HPolytope& templ, const ApproxOptions& opts) {
  if (F_exact.dim() != templ.dim()) throw Error(ErrorKind::DimMismatch, "template dimension");
  const Eigen::Index d = F_exact.dim(), q = F_exact.num_halfspaces(), qt = templ.num_halfspaces();
  const Mat& F = F_exact.normals();
  const Vec& f = F_exact.offsets();
  const Mat& Ft = templ.normals();
  const Vec& ft = templ.offsets();
  lp::LinearProgram prog;
  prog.maximize();
  const int s0 = prog.add_variables(static_cast<int>(d), opts.sigma_min, opts.sigma_max, 1.0);
  const int x0 = prog.add_variables(static_cast<int>(d), -lp::kInf, lp::kInf, 0.0);
  const int l0 = prog.add_variables(static_cast<int>(q * qt), 0.0, lp::kInf, 0.0);
  auto L = [&](Eigen::Index r, Eigen::Index k) { return l0 + static_cast<int>(r * qt + k); };
  using T = lp::LinearProgram::Term;
  for (Eigen::Index r = 0; r < q; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      std::vector<T> t;
      for (Eigen::Index k = 0; k < qt; ++k)
        if (Ft(k, c) != 0.0) t.push_back({L(r, k), Ft(k, c)});
      if (F(r, c) != 0.0) t.push_back({s0 + static_cast<int>(c), -F(r, c)});
      prog.add_row(t, lp::Sense::Equal, 0.0);
    }
    std::vector<T> t;
    for (Eigen::Index k = 0; k < qt; ++k) t.push_back({L(r, k), ft(k)});
    for (Eigen::Index c = 0; c < d; ++c)
      if (F(r, c) != 0.0) t.push_back({x0 + static_cast<int>(c), F(r, c)});
    prog.add_row(t, lp::Sense::LessEqual, f(r));
  }
  const auto res = prog.solve();
  if (res.status == lp::Status::Infeasible) throw Error(ErrorKind::Infeasible, "template cannot be placed inside the set");
  if (res.status == lp::Status::Unbounded) throw Error(ErrorKind::Unbounded, "template scaling is unbounded");
  if (res.status != lp::Status::Optimal) throw Error(ErrorKind::NoConvergence, "joint inner approximation LP failed");
  ApproxSolution sol;
  sol.sigma = res.x.segment(s0, d);
  sol.x_off = res.x.segment(x0, d);
  sol.Lambda.resize(q, qt);
  for (Eigen::Index r = 0; r < q; ++r)
    for (Eigen::Index k = 0; k < qt; ++k) sol.Lambda(r, k) = std::max(0.0, res.x(L(r, k)));
  return sol;
}

HPolytope recover(const HPolytope& templ, const ApproxSolution& sol) {
  const Mat Fs = templ.normals() * sol.sigma.cwiseInverse().asDiagonal();
  return HPolytope(Fs, templ.offsets() + Fs * sol.x_off);
}

geometry::AffineSet as_affine(const HPolytope& templ, const ApproxSolution& sol) {
  return {sol.x_off, sol.sigma.asDiagonal().toDenseMatrix(), templ};
}

std::pair<ApproxSolution, HPolytope> inner_approximate(const HPolytope& F_exact, const HPolytope& templ,
                                                       const ApproxOptions& opts) {
  ApproxSolution sol = inner_approximate_lp(F_exact, templ, opts);
  HPolytope rec = recover(templ, sol);
  return {std::move(sol), std::move(rec)};
}

}  // namespace shmpc::condense
