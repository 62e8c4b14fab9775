#include "shmpc/geometry/volume.hpp"

#include "shmpc/error.hpp"

#include <cmath>
#include <random>

namespace shmpc::geometry {

namespace {

struct Counts {
  double box_volume;
  std::size_t hits_a = 0, hits_b = 0;
};

Counts sample_box(const HPolytope& A, const HPolytope* B, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw Error(ErrorKind::InvalidArgument, "mc_volume needs at least one sample");
  const auto [lo, hi] = A.bounding_box();
  Counts c{(hi - lo).prod()};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec x(A.dim());
  for (std::size_t k = 0; k < samples; ++k) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = lo(i) + (hi(i) - lo(i)) * u(rng);
    if (A.contains(x, 0.0)) ++c.hits_a;
    if (B && B->contains(x, 0.0)) ++c.hits_b;
  }
  return c;
}

VolumeEstimate estimate(double box, std::size_t hits, std::size_t n) {
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {box * p, box * std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n, hits};
}

}  // namespace

VolumeEstimate mc_volume(const HPolytope& P, std::size_t samples, std::uint64_t seed) {
  const Counts c = sample_box(P, nullptr, samples, seed);
  return estimate(c.box_volume, c.hits_a, samples);
}

VolumeRatio mc_volume_ratio(const HPolytope& inner, const HPolytope& outer, std::size_t samples,
                            std::uint64_t seed) {
  if (inner.dim() != outer.dim()) throw Error(ErrorKind::DimMismatch, "volume ratio dimensions");
  const Counts c = sample_box(outer, &inner, samples, seed);
  VolumeRatio r;
  r.outer = estimate(c.box_volume, c.hits_a, samples);
  r.inner = estimate(c.box_volume, c.hits_b, samples);
  if (c.hits_a > 0) {
    // Conditional on landing in outer, inner hits are binomial.
    const double p = static_cast<double>(c.hits_b) / static_cast<double>(c.hits_a);
    r.ratio = p;
    r.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(c.hits_a));
  }
  return r;
}

}  // namespace shmpc::geometry
