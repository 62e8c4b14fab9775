#pragma once

// Independent reference computations for tests. Nothing here calls the
// library's LP layer, so agreement is meaningful.

#include "shmpc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using shmpc::Mat;
using shmpc::Vec;

inline Vec uniform_vec(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

inline Mat uniform_mat(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Mat M(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = u(rng);
  return M;
}

inline bool in_halfspaces(const Mat& F, const Vec& f, const Vec& x, double tol = 1e-9) {
  return ((F * x - f).array() <= tol).all();
}

/// Vertices of a bounded 2-D or 3-D polytope by brute-force intersection of
/// every d-subset of planes.
inline std::vector<Vec> vertices(const Mat& F, const Vec& f, double tol = 1e-9) {
  const Eigen::Index q = F.rows(), d = F.cols();
  std::vector<Vec> out;
  auto add = [&](const Mat& S, const Vec& s) {
    Eigen::FullPivLU<Mat> lu(S);
    if (!lu.isInvertible()) return;
    Vec x = lu.solve(s);
    if (!in_halfspaces(F, f, x, tol)) return;
    for (const auto& v : out)
      if ((v - x).norm() < 1e-9) return;
    out.push_back(x);
  };
  if (d == 2) {
    for (Eigen::Index i = 0; i < q; ++i)
      for (Eigen::Index j = i + 1; j < q; ++j) {
        Mat S(2, 2);
        S << F.row(i), F.row(j);
        add(S, Vec((Vec(2) << f(i), f(j)).finished()));
      }
  } else if (d == 3) {
    for (Eigen::Index i = 0; i < q; ++i)
      for (Eigen::Index j = i + 1; j < q; ++j)
        for (Eigen::Index k = j + 1; k < q; ++k) {
          Mat S(3, 3);
          S << F.row(i), F.row(j), F.row(k);
          add(S, Vec((Vec(3) << f(i), f(j), f(k)).finished()));
        }
  }
  return out;
}

/// Area of a convex polygon given its (unordered) vertices in 2-D.
inline double polygon_area(std::vector<Eigen::Vector2d> p) {
  if (p.size() < 3) return 0.0;
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& v : p) c += v;
  c /= static_cast<double>(p.size());
  std::sort(p.begin(), p.end(), [&](const auto& a, const auto& b) {
    return std::atan2(a.y() - c.y(), a.x() - c.x()) < std::atan2(b.y() - c.y(), b.x() - c.x());
  });
  double area = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& a = p[i];
    const auto& b = p[(i + 1) % p.size()];
    area += a.x() * b.y() - a.y() * b.x();
  }
  return 0.5 * std::abs(area);
}

/// Exact volume of a bounded polytope in 2-D or 3-D via the facet pyramid decomposition
/// around the vertex centroid.
inline double exact_volume(const Mat& F, const Vec& f) {
  const auto V = vertices(F, f);
  const Eigen::Index d = F.cols();
  if (V.size() < static_cast<std::size_t>(d + 1)) return 0.0;
  Vec c = Vec::Zero(d);
  for (const auto& v : V) c += v;
  c /= static_cast<double>(V.size());
  if (d == 2) {
    std::vector<Eigen::Vector2d> p;
    for (const auto& v : V) p.emplace_back(v(0), v(1));
    return polygon_area(p);
  }
  double vol = 0.0;
  for (Eigen::Index i = 0; i < F.rows(); ++i) {
    const Eigen::Vector3d n = F.row(i).transpose().normalized();
    const double off = f(i) / F.row(i).norm();
    std::vector<Eigen::Vector3d> face;
    for (const auto& v : V)
      if (std::abs(n.dot(Eigen::Vector3d(v)) - off) < 1e-8) face.emplace_back(v);
    if (face.size() < 3) continue;
    // Skip duplicated facets (same plane seen twice).
    bool dup = false;
    for (Eigen::Index k = 0; k < i && !dup; ++k) {
      const Eigen::Vector3d nk = F.row(k).transpose().normalized();
      if ((nk - n).norm() < 1e-10 && std::abs(f(k) / F.row(k).norm() - off) < 1e-10) dup = true;
    }
    if (dup) continue;
    const Eigen::Vector3d u = n.unitOrthogonal();
    const Eigen::Vector3d w = n.cross(u);
    std::vector<Eigen::Vector2d> p;
    for (const auto& v : face) p.emplace_back(u.dot(v), w.dot(v));
    const double h = off - n.dot(Eigen::Vector3d(c));
    vol += polygon_area(p) * h / 3.0;
  }
  return vol;
}

}  // namespace oracle
