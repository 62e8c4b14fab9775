#include "shmpc/sim/study.hpp"

#include "shmpc/error.hpp"
#include "shmpc/geometry/containment.hpp"
#include "shmpc/geometry/volume.hpp"
#include "shmpc/sim/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>

namespace shmpc::sim {

geometry::HPolytope convex_hull_2d(const std::vector<Eigen::Vector2d>& points) {
  std::vector<Eigen::Vector2d> p = points;
  std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
  };
  std::vector<Eigen::Vector2d> hull(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw Error(ErrorKind::EmptyResult, "degenerate point set");
  // Counter-clockwise order: the outward normal of edge a->b is (dy, -dx).
  Mat N(static_cast<Eigen::Index>(hull.size()), 2);
  Vec f(N.rows());
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Eigen::Vector2d& a = hull[i];
    const Eigen::Vector2d& b = hull[(i + 1) % hull.size()];
    const Eigen::Vector2d nrm(b.y() - a.y(), a.x() - b.x());
    N.row(static_cast<Eigen::Index>(i)) = nrm.transpose();
    f(static_cast<Eigen::Index>(i)) = nrm.dot(a);
  }
  return geometry::HPolytope(N, f);
}

StudyInstance random_study_instance(std::mt19937_64& rng, double tau, int points) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat Ac(2, 2), Bc(2, 1);
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) Ac(i, j) = u(rng);
    Bc(i, 0) = u(rng);
  }
  StudyInstance inst;
  inst.sys.tau = tau;
  zoh_discretize(Ac, Bc, tau, inst.sys.A, inst.sys.B);
  std::vector<Eigen::Vector2d> pts(static_cast<std::size_t>(points));
  for (auto& p : pts) p = Eigen::Vector2d(u(rng), u(rng));
  inst.X = convex_hull_2d(pts);
  inst.F = geometry::cartesian_product(inst.X, geometry::HPolytope::box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)));
  return inst;
}

StudyReport example_study(const StudyOptions& opts) {
  if (opts.count < 1) throw Error(ErrorKind::InvalidArgument, "study count must be >= 1");
  for (int s : opts.s_values)
    if (s < 1) throw Error(ErrorKind::InvalidArgument, "block lengths must be >= 1");
  StudyReport rep;
  rep.options = opts;
  for (int i = 0; i < opts.count; ++i) {
    auto rng = make_rng(opts.seed, i, 2);
    const StudyInstance inst = random_study_instance(rng, opts.tau, opts.points);
    condense::StageSetup setup{inst.sys, Mat::Identity(3, 3), inst.F, {}};
    for (int s : opts.s_values) {
      StudyRow row;
      row.instance = i;
      row.s = s;
      try {
        const auto minimal = condense::build_stage(setup, s, condense::Mode::Minimal);
        const auto approx = condense::build_stage(setup, s, condense::Mode::Approx);
        const double q_min = static_cast<double>(minimal.F.num_halfspaces());
        const double q_r = static_cast<double>(approx.F.num_halfspaces());
        row.q_r_over_min = q_r / q_min;
        row.q_r_over_0 = q_r / static_cast<double>(minimal.q_raw);
        const std::uint64_t vseed = opts.seed ^ (static_cast<std::uint64_t>(i) << 20) ^ static_cast<std::uint64_t>(s);
        row.V_ratio = geometry::mc_volume_ratio(approx.F, minimal.F, opts.volume_samples, vseed).ratio;
        row.certified = geometry::certify_containment(geometry::as_affine(approx.F), geometry::as_affine(minimal.F))
                            .has_value();
      } catch (const Error& e) {
        row.skipped = true;
        row.reason = e.what();
      }
      rep.rows.push_back(row);
    }
  }
  return rep;
}

namespace {

Json stats(std::vector<double> v) {
  if (v.empty()) return nullptr;
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  double sum = 0.0;
  for (double x : v) sum += x;
  return {{"mean", sum / static_cast<double>(v.size())}, {"q1", q(0.25)}, {"median", q(0.5)}, {"q3", q(0.75)}};
}

}  // namespace

Json StudyReport::aggregates() const {
  std::map<int, std::vector<const StudyRow*>> by_s;
  for (const auto& r : rows) by_s[r.s].push_back(&r);
  Json out = Json::object();
  for (const auto& [s, rs] : by_s) {
    std::vector<double> V, qm, q0;
    int skipped = 0, certified = 0;
    for (const StudyRow* r : rs) {
      if (r->skipped) {
        ++skipped;
        continue;
      }
      certified += r->certified;
      V.push_back(r->V_ratio);
      qm.push_back(r->q_r_over_min);
      q0.push_back(r->q_r_over_0);
    }
    out[std::to_string(s)] = {{"instances", rs.size()},
                              {"skipped", skipped},
                              {"certified", certified},
                              {"V_ratio", stats(V)},
                              {"q_r_over_min", stats(qm)},
                              {"q_r_over_0", stats(q0)}};
  }
  return out;
}

void StudyReport::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path);
  os << "instance,s,V_ratio,q_r_over_min,q_r_over_0,skipped\n" << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.instance << ',' << r.s << ',';
    if (r.skipped)
      os << ",,,1\n";
    else
      os << r.V_ratio << ',' << r.q_r_over_min << ',' << r.q_r_over_0 << ",0\n";
  }
}

}  // namespace shmpc::sim
