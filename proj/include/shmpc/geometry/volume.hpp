#pragma once

#include "shmpc/geometry/hpolytope.hpp"

#include <cstddef>
#include <cstdint>

namespace shmpc::geometry {

struct VolumeEstimate {
  double volume = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::size_t hits = 0;
};

/// Rejection sampling in the axis-aligned bounding box (throws Unbounded).
VolumeEstimate mc_volume(const HPolytope& P, std::size_t samples, std::uint64_t seed);

struct VolumeRatio {
  double ratio = 0.0;  // vol(inner) / vol(outer)
  double std_error = 0.0;
  VolumeEstimate inner;
  VolumeEstimate outer;
};

/// Both sets scored on the same draws from the bounding box of `outer`,
/// which must contain `inner`.
VolumeRatio mc_volume_ratio(const HPolytope& inner, const HPolytope& outer, std::size_t samples,
                            std::uint64_t seed);

}  // namespace shmpc::geometry
