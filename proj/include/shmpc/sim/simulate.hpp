#pragma once

#include "shmpc/sim/scenario.hpp"

#include <map>
#include <memory>
#include <random>

namespace shmpc::sim {

/// A scenario with its designed problem and lazily built stage caches.
class Scenario {
 public:
  explicit Scenario(ScenarioConfig config);

  const ScenarioConfig& config() const { return config_; }
  const mpc::ManeuverProblem& problem() const { return problem_; }

  /// Stage cache for `mode`, built (or loaded from config().cache_dir) on first use.
  std::shared_ptr<const condense::StageCache> stages(Mode mode);

 private:
  ScenarioConfig config_;
  mpc::ManeuverProblem problem_;
  std::map<Mode, std::shared_ptr<condense::StageCache>> caches_;
};

/// Independent stream for (seed, run, purpose).
std::mt19937_64 make_rng(std::uint64_t seed, int run, int purpose);

struct X0Sample {
  Vec x0;
  int attempts = 0;
  double acceptance_rate = 0.0;
};

/// Rejection sampling from the config's x0 box until the k = 0 approx-mode QP
/// is feasible. Throws SamplingExhausted after config().max_attempts tries.
X0Sample sample_x0(Scenario& sc, std::uint64_t seed, int run = 0);

/// One disturbance per step, drawn in W's generator coordinates.
std::vector<Vec> sample_disturbances(const geometry::Zonotope& W, int steps, DisturbancePolicy policy,
                                     std::mt19937_64& rng);

struct StepRecord {
  int k = 0;
  Vec x;
  Vec u;    // empty on the terminal row
  Vec z0;   // empty on the terminal row
  std::string s;  // blocking vector, space separated
  double J_stage = 0.0;  // stage cost, terminal cost on the terminal row
  double qp_cost = 0.0;
  double solve_seconds = 0.0;
  int iterations = 0;
  std::string status;
};

struct TrajectoryLog {
  std::string scenario;
  Mode mode = Mode::Approx;
  int run = 0;
  std::uint64_t seed = 0;
  Vec x0;
  std::vector<StepRecord> steps;  // N0 control rows and one terminal row
  bool arrived = false;
  int violations = 0;
  bool infeasible = false;
  std::string error;
  double J = 0.0;       // closed-loop stage costs plus terminal cost
  double J_open = 0.0;  // optimal value at k = 0

  std::vector<double> solve_times() const;
};

/// Closed loop from x0 with the given disturbance sequence. Infeasibility and
/// solver failures are recorded in the log instead of thrown.
TrajectoryLog run_closed_loop(Scenario& sc, Mode mode, const Vec& x0, const std::vector<Vec>& w, int run = 0);

/// All runs and modes of the config. Every mode of a run shares x0 and the
/// disturbance sequence.
std::vector<TrajectoryLog> simulate(Scenario& sc);

struct PlanResult {
  int run = 0;
  Vec x0;
  std::map<Mode, double> J;
  std::map<Mode, double> t_c;
  std::map<Mode, int> iterations;
};

/// One cold solve per mode at k = 0 for each sampled x0.
std::vector<PlanResult> plan_open_loop(Scenario& sc);

/// CSV with a documented header, one row per step.
void write_log_csv(const std::string& path, const TrajectoryLog& log);
TrajectoryLog read_log_csv(const std::string& path);

/// Per-mode aggregates: costs, ratios to the full mode when present, timing
/// statistics, arrival and violation counts.
Json summarize(const std::vector<TrajectoryLog>& logs);
Json summarize_plans(const std::vector<PlanResult>& plans);

double median(std::vector<double> v);

}  // namespace shmpc::sim
