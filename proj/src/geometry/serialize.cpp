#include "shmpc/geometry/serialize.hpp"

#include "shmpc/error.hpp"

namespace shmpc::geometry {

Json to_json(const HPolytope& P) {
  return {{"dim", P.dim()}, {"normals", shmpc::to_json(P.normals())}, {"offsets", shmpc::to_json(P.offsets())}};
}

HPolytope hpolytope_from_json(const Json& j) {
  const Eigen::Index d = j.at("dim").get<Eigen::Index>();
  Mat F = mat_from_json(j.at("normals"), d);
  if (F.cols() != d) throw Error(ErrorKind::DimMismatch, "polytope normals do not match dim");
  return HPolytope(F, vec_from_json(j.at("offsets")));
}

Json to_json(const Zonotope& Z) {
  return {{"dim", Z.dim()}, {"center", shmpc::to_json(Z.center())}, {"generators", shmpc::to_json(Z.generators())}};
}

Zonotope zonotope_from_json(const Json& j) {
  const Eigen::Index d = j.at("dim").get<Eigen::Index>();
  Vec c = vec_from_json(j.at("center"));
  Mat G = mat_from_json(j.at("generators"), 0);
  if (G.rows() == 0) G.resize(d, 0);
  if (c.size() != d || G.rows() != d) throw Error(ErrorKind::DimMismatch, "zonotope does not match dim");
  return Zonotope(c, G);
}

}  // namespace shmpc::geometry
