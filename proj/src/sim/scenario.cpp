#include "shmpc/sim/scenario.hpp"

#include "shmpc/error.hpp"
#include "shmpc/geometry/serialize.hpp"

#include <cmath>
#include <fstream>

namespace shmpc::sim {

using geometry::HPolytope;
using geometry::Zonotope;

const char* to_string(DisturbancePolicy p) { return p == DisturbancePolicy::Uniform ? "uniform" : "vertex"; }

DisturbancePolicy disturbance_from_string(const std::string& s) {
  if (s == "uniform") return DisturbancePolicy::Uniform;
  if (s == "vertex") return DisturbancePolicy::Vertex;
  throw Error(ErrorKind::InvalidArgument, "unknown disturbance policy '" + s + "' (uniform|vertex)");
}

namespace {

constexpr double kPi = 3.14159265358979323846;

Mat rotation6(double a) {
  Mat r(2, 2);
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return kron(r, Mat::Identity(3, 3));
}

// Rows over xi = (p_x, v_x, a_x, p_z, v_z, a_z, u_x, u_z).
HPolytope helicopter_constraints(double incline) {
  std::vector<std::pair<std::vector<std::pair<int, double>>, double>> rows = {
      {{{3, -1.0}}, 0.0},                        // p_z >= 0
      {{{1, 1.0}}, 15.0},  {{{1, -1.0}}, 4.0},   // v_x
      {{{4, 1.0}}, 5.0},   {{{4, -1.0}}, 10.0},  // v_z
      {{{1, -0.3}, {4, -1.0}}, 2.0},             // approach
      {{{2, 1.0}}, 4.0},   {{{2, -1.0}}, 4.0},   {{{5, 1.0}}, 5.0},  {{{5, -1.0}}, 5.0},
      {{{6, 1.0}}, 3.0},   {{{6, -1.0}}, 3.0},   {{{7, 1.0}}, 10.0}, {{{7, -1.0}}, 10.0},
      {{{0, std::tan(incline)}, {3, -1.0}}, -1.0},  // glideslope
  };
  Mat F = Mat::Zero(static_cast<Eigen::Index>(rows.size()), 8);
  Vec f(F.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (auto [c, v] : rows[i].first) F(static_cast<Eigen::Index>(i), c) = v;
    f(static_cast<Eigen::Index>(i)) = rows[i].second;
  }
  return HPolytope(F, f);
}

// The target box bounds and the setpoint are listed per derivative order,
// (p_x, p_z, v_x, v_z, a_x, a_z); this maps them to the state order.
Vec from_pairs(const Vec& v) {
  Vec out(6);
  out << v(0), v(2), v(4), v(1), v(3), v(5);
  return out;
}

Vec gravity_offset(double incline) {
  Vec e = Vec::Zero(6);
  e(5) = 9.81;
  return (Mat::Identity(6, 6) - rotation6(incline).transpose()) * e;
}

HPolytope helicopter_target(double incline) {
  Vec bl(6), bu(6);
  bl << 0.8, -1, 1, 0.9, 0.4, 4;
  bl = from_pairs(-bl);
  bu << 0.8, 2.2, 1, 0, 0.4, 4;
  bu = from_pairs(bu);
  const Mat Rot = rotation6(incline);
  const Vec g = gravity_offset(incline);
  return geometry::image_invertible(HPolytope::box(bl + g, bu + g), Rot);
}

void merge(Json& base, const Json& over) {
  for (auto it = over.begin(); it != over.end(); ++it) {
    if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object())
      merge(base[it.key()], it.value());
    else
      base[it.key()] = it.value();
  }
}

}  // namespace

Json helicopter_problem_json() {
  const double tau = 0.02;
  const double incline = 25.0 * kPi / 180.0;
  Mat Ai(3, 3);
  Ai << 1, tau, tau * tau / 2, 0, 1, tau, 0, 0, 1;
  Vec Bi(3);
  Bi << tau * tau * tau / 6, tau * tau / 2, tau;
  Vec wi(3);
  wi << tau * tau / 2, tau, 0;
  const Mat A = block_diag(Ai, Ai);
  const Mat B = block_diag(Mat(Bi), Mat(Bi));
  const Mat Wg = 0.2 * block_diag(Mat(wi), Mat(wi));

  Mat Q = Mat::Zero(6, 6);
  Q.diagonal() << 5, 5, 5, 5, 10, 10;
  Mat R = Mat::Zero(2, 2);
  R.diagonal() << 0.1, 1;
  Vec xr(6);
  xr << -0.7, 1.4, 0.2, -0.4, -4.1, -0.9;
  xr = from_pairs(xr);

  Json j;
  j["tau"] = tau;
  j["A"] = shmpc::to_json(A);
  j["B"] = shmpc::to_json(B);
  j["F"] = geometry::to_json(helicopter_constraints(incline));
  j["X_T"] = geometry::to_json(helicopter_target(incline));
  j["W"] = geometry::to_json(Zonotope(Vec::Zero(6), Wg));
  j["Q"] = shmpc::to_json(Q);
  j["R"] = shmpc::to_json(R);
  j["N0"] = 300;
  j["N_max"] = 10;
  j["x_ref"] = shmpc::to_json(xr);
  j["s0"] = std::vector<int>(10, 30);
  j["rpi"] = {{"alpha", 1e-6}, {"max_terms", 2000}};
  return j;
}

Json helicopter_config_json() {
  Json j;
  j["name"] = "heli";
  j["problem"] = helicopter_problem_json();
  j["seed"] = 1;
  j["runs"] = 1;
  j["modes"] = {"raw", "minimal", "approx"};
  j["disturbance"] = "uniform";
  // p_x, v_x, a_x, p_z, v_z, a_z
  j["x0_box"] = {{"lo", {-40.0, -4.0, -4.0, 0.0, -10.0, -5.0}}, {"hi", {0.0, 15.0, 4.0, 20.0, 5.0, 5.0}}};
  j["max_attempts"] = 2000;
  // The helicopter stage sets are unbounded along p_x; capping the template
  // scaling keeps the inner approximation well posed.
  j["approx"] = {{"sigma_min", 1e-6}, {"sigma_max", 1.0}};
  j["cache_dir"] = "";
  return j;
}

ScenarioConfig config_from_json(const Json& in) {
  Json j = in;
  if (in.contains("preset")) {
    const std::string preset = in.at("preset").get<std::string>();
    if (preset != "heli") throw Error(ErrorKind::InvalidArgument, "unknown preset '" + preset + "'");
    j = helicopter_config_json();
    Json over = in;
    over.erase("preset");
    merge(j, over);
  }
  try {
    ScenarioConfig c;
    c.name = j.value("name", std::string("scenario"));
    c.problem = j.at("problem");
    c.seed = j.value("seed", std::uint64_t{1});
    c.runs = j.value("runs", 1);
    if (c.runs < 1) throw Error(ErrorKind::InvalidArgument, "runs must be >= 1");
    if (j.contains("modes")) {
      c.modes.clear();
      for (const auto& m : j.at("modes")) c.modes.push_back(condense::mode_from_string(m.get<std::string>()));
    }
    c.disturbance = disturbance_from_string(j.value("disturbance", std::string("uniform")));
    if (j.contains("x0_box")) {
      c.x0_lo = vec_from_json(j.at("x0_box").at("lo"));
      c.x0_hi = vec_from_json(j.at("x0_box").at("hi"));
      if (c.x0_lo.size() != c.x0_hi.size() || (c.x0_hi.array() < c.x0_lo.array()).any())
        throw Error(ErrorKind::InvalidArgument, "x0_box must have lo <= hi");
    }
    c.max_attempts = j.value("max_attempts", 2000);
    if (j.contains("approx")) {
      const Json& a = j.at("approx");
      c.approx.sigma_min = a.value("sigma_min", c.approx.sigma_min);
      if (a.contains("sigma_max"))
        c.approx.sigma_max = a.at("sigma_max").is_null() ? std::numeric_limits<double>::infinity()
                                                         : a.at("sigma_max").get<double>();
    }
    c.cache_dir = j.value("cache_dir", std::string());
    return c;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
  }
}

Json to_json(const ScenarioConfig& c) {
  Json j;
  j["name"] = c.name;
  j["problem"] = c.problem;
  j["seed"] = c.seed;
  j["runs"] = c.runs;
  j["modes"] = Json::array();
  for (Mode m : c.modes) j["modes"].push_back(condense::to_string(m));
  j["disturbance"] = to_string(c.disturbance);
  if (c.x0_lo.size() > 0) j["x0_box"] = {{"lo", shmpc::to_json(c.x0_lo)}, {"hi", shmpc::to_json(c.x0_hi)}};
  j["max_attempts"] = c.max_attempts;
  j["approx"] = {{"sigma_min", c.approx.sigma_min}};
  j["approx"]["sigma_max"] = std::isfinite(c.approx.sigma_max) ? Json(c.approx.sigma_max) : Json(nullptr);
  j["cache_dir"] = c.cache_dir;
  return j;
}

ScenarioConfig load_config(const std::string& name_or_path) {
  if (name_or_path == "heli") return config_from_json(helicopter_config_json());
  return config_from_json(read_json_file(name_or_path));
}

mpc::ManeuverProblem build_problem(const ScenarioConfig& c) {
  try {
    const Json& p = c.problem;
    tube::LTISystem sys{mat_from_json(p.at("A")), mat_from_json(p.at("B")), p.value("tau", 0.0)};
    sys.validate();
    HPolytope F = geometry::hpolytope_from_json(p.at("F"));
    HPolytope X_T = geometry::hpolytope_from_json(p.at("X_T"));
    Zonotope W = geometry::zonotope_from_json(p.at("W"));
    mpc::ProblemOptions opts;
    if (p.contains("rpi")) {
      opts.rpi.alpha = p.at("rpi").value("alpha", opts.rpi.alpha);
      opts.rpi.max_terms = p.at("rpi").value("max_terms", opts.rpi.max_terms);
    }
    if (p.value("product", std::string("coupled")) == "cartesian") opts.product = tube::TubeProduct::Cartesian;
    return mpc::make_problem(std::move(sys), std::move(F), std::move(X_T), std::move(W), mat_from_json(p.at("Q")),
                             mat_from_json(p.at("R")), p.at("N0").get<int>(), p.at("N_max").get<int>(),
                             vec_from_json(p.at("x_ref")),
                             blocking::BlockingVector(p.at("s0").get<std::vector<int>>()), opts);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("problem section: ") + e.what());
  }
}

}  // namespace shmpc::sim
