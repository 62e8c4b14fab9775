#pragma once

#include "shmpc/geometry/hpolytope.hpp"
#include "shmpc/geometry/zonotope.hpp"
#include "shmpc/json_util.hpp"

namespace shmpc::geometry {

/// {"dim": d, "normals": [[...], ...], "offsets": [...]}
Json to_json(const HPolytope& P);
HPolytope hpolytope_from_json(const Json& j);

/// {"dim": d, "center": [...], "generators": [[...], ...]}  (d rows, g columns)
Json to_json(const Zonotope& Z);
Zonotope zonotope_from_json(const Json& j);

}  // namespace shmpc::geometry
