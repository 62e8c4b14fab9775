#pragma once

#include "shmpc/condense/stage.hpp"
#include "shmpc/json_util.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace shmpc::sim {

/// Convex hull of planar points as an H-polytope (monotone chain).
geometry::HPolytope convex_hull_2d(const std::vector<Eigen::Vector2d>& points);

struct StudyInstance {
  tube::LTISystem sys;
  geometry::HPolytope X;
  geometry::HPolytope F;  // X x U
};

/// Random second-order system with one input: continuous-time entries uniform
/// in [-1, 1], zero-order hold at tau; X is the hull of `points` uniform points
/// in [-1, 1]^2 and U = [-1, 1].
StudyInstance random_study_instance(std::mt19937_64& rng, double tau = 0.05, int points = 62);

struct StudyRow {
  int instance = 0;
  int s = 0;
  double V_ratio = 0.0;      // vol(approx) / vol(minimal)
  double q_r_over_min = 0.0; // rows(approx) / rows(minimal)
  double q_r_over_0 = 0.0;   // rows(approx) / rows(raw)
  bool skipped = false;
  bool certified = false;    // approx inside minimal by the multiplier certificate
  std::string reason;
};

struct StudyOptions {
  int count = 20;
  std::vector<int> s_values{10, 20, 30};
  std::uint64_t seed = 1;
  std::size_t volume_samples = 100000;
  double tau = 0.05;
  int points = 62;
};

struct StudyReport {
  StudyOptions options;
  std::vector<StudyRow> rows;

  /// Per s: count, skipped, certified, and mean/quartiles of each ratio over
  /// the non-skipped rows.
  Json aggregates() const;
  void write_csv(const std::string& path) const;
};

StudyReport example_study(const StudyOptions& opts);

}  // namespace shmpc::sim
