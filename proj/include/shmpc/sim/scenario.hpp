#pragma once

#include "shmpc/json_util.hpp"
#include "shmpc/mpc/controller.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace shmpc::sim {

using condense::Mode;

enum class DisturbancePolicy { Uniform, Vertex };

const char* to_string(DisturbancePolicy p);
DisturbancePolicy disturbance_from_string(const std::string& s);

/// A scenario: problem data (kept as JSON so it round-trips unchanged into
/// every output) plus the run settings. See docs/config.md for the schema.
struct ScenarioConfig {
  std::string name;
  Json problem;
  std::uint64_t seed = 1;
  int runs = 1;
  std::vector<Mode> modes{Mode::Raw, Mode::Minimal, Mode::Approx};
  DisturbancePolicy disturbance = DisturbancePolicy::Uniform;
  Vec x0_lo;
  Vec x0_hi;
  int max_attempts = 2000;
  condense::ApproxOptions approx;
  std::string cache_dir;
};

/// Problem section of the helicopter landing preset.
Json helicopter_problem_json();

/// Full `heli` preset as a config document.
Json helicopter_config_json();

/// Parses a config document. A "preset" key loads that preset first and the
/// remaining keys override it (objects are merged recursively).
ScenarioConfig config_from_json(const Json& j);
Json to_json(const ScenarioConfig& c);

/// `name_or_path` is either a preset name ("heli") or a JSON file.
ScenarioConfig load_config(const std::string& name_or_path);

/// Designs the tube and tightens the sets. Deterministic in the config.
mpc::ManeuverProblem build_problem(const ScenarioConfig& c);

}  // namespace shmpc::sim
