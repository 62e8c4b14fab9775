#include "shmpc/sim/simulate.hpp"

#include "shmpc/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace shmpc::sim {

namespace {

constexpr double kMembershipTol = 1e-6;

double stage_cost(const mpc::ManeuverProblem& p, const Vec& x, const Vec& u) {
  const Vec dx = x - p.x_ref;
  return dx.dot(p.Q * dx) + u.dot(p.R * u);
}

double terminal_cost(const mpc::ManeuverProblem& p, const Vec& x) {
  const Vec dx = x - p.x_ref;
  return dx.dot(p.tube.P_terminal * dx);
}

}  // namespace

Scenario::Scenario(ScenarioConfig config) : config_(std::move(config)), problem_(build_problem(config_)) {
  if (config_.x0_lo.size() != 0 && config_.x0_lo.size() != problem_.sys.n())
    throw Error(ErrorKind::DimMismatch, "x0_box does not match the state dimension");
}

std::shared_ptr<const condense::StageCache> Scenario::stages(Mode mode) {
  auto it = caches_.find(mode);
  if (it != caches_.end()) return it->second;
  auto cache = mpc::make_stage_cache(problem_, mode, config_.approx, config_.cache_dir);
  caches_.emplace(mode, cache);
  return cache;
}

std::mt19937_64 make_rng(std::uint64_t seed, int run, int purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(run), static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

X0Sample sample_x0(Scenario& sc, std::uint64_t seed, int run) {
  const ScenarioConfig& c = sc.config();
  if (c.x0_lo.size() == 0) throw Error(ErrorKind::InvalidArgument, "config has no x0_box");
  auto rng = make_rng(seed, run, 0);
  auto stages = sc.stages(Mode::Approx);
  const auto& p = sc.problem();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 1; attempt <= c.max_attempts; ++attempt) {
    Vec x(c.x0_lo.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = c.x0_lo(i) + (c.x0_hi(i) - c.x0_lo(i)) * unit(rng);
    const mpc::QpSolution sol = mpc::solve(mpc::assemble(p, *stages, x, p.s0));
    if (sol.status == mpc::QpStatus::Optimal) return {x, attempt, 1.0 / attempt};
  }
  throw Error(ErrorKind::SamplingExhausted,
              "no feasible initial state in " + std::to_string(c.max_attempts) + " attempts");
}

std::vector<Vec> sample_disturbances(const geometry::Zonotope& W, int steps, DisturbancePolicy policy,
                                     std::mt19937_64& rng) {
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k)
    out.push_back(policy == DisturbancePolicy::Uniform ? W.sample(rng) : W.sample_vertex(rng));
  return out;
}

std::vector<double> TrajectoryLog::solve_times() const {
  std::vector<double> t;
  for (const auto& r : steps)
    if (r.u.size()) t.push_back(r.solve_seconds);
  return t;
}

TrajectoryLog run_closed_loop(Scenario& sc, Mode mode, const Vec& x0, const std::vector<Vec>& w, int run) {
  const auto& p = sc.problem();
  if (static_cast<int>(w.size()) < p.N0) throw Error(ErrorKind::InvalidArgument, "disturbance sequence too short");
  TrajectoryLog log;
  log.scenario = sc.config().name;
  log.mode = mode;
  log.run = run;
  log.seed = sc.config().seed;
  log.x0 = x0;
  mpc::ControllerOptions opts;
  opts.mode = mode;
  mpc::Controller ctrl(p, sc.stages(mode), opts);
  const Eigen::Index n = p.sys.n();
  Vec x = x0;
  for (int k = 0; k < p.N0; ++k) {
    StepRecord rec;
    rec.k = k;
    rec.x = x;
    try {
      const mpc::StepResult r = ctrl.step(x);
      rec.u = r.u;
      rec.z0 = r.sol.z0;
      rec.s = r.s.to_string();
      std::replace(rec.s.begin(), rec.s.end(), ',', ' ');
      rec.J_stage = stage_cost(p, x, r.u);
      rec.qp_cost = r.sol.cost;
      rec.solve_seconds = r.sol.solve_seconds;
      rec.iterations = r.sol.iterations;
      rec.status = r.sol.raw.reduced_accuracy ? "optimal_inaccurate" : mpc::to_string(r.sol.status);
      if (k == 0) log.J_open = r.sol.cost;
    } catch (const Error& e) {
      rec.status = e.kind() == ErrorKind::Infeasible ? "infeasible" : "failed";
      log.infeasible = true;
      log.error = e.what();
      log.steps.push_back(rec);
      return log;
    }
    Vec xi(n + p.sys.m());
    xi << x, rec.u;
    if (!p.F.contains(xi, kMembershipTol)) ++log.violations;
    log.J += rec.J_stage;
    x = p.sys.A * x + p.sys.B * rec.u + w[static_cast<std::size_t>(k)];
    log.steps.push_back(std::move(rec));
  }
  StepRecord last;
  last.k = p.N0;
  last.x = x;
  last.J_stage = terminal_cost(p, x);
  log.J += last.J_stage;
  log.arrived = p.X_T.contains(x, kMembershipTol);
  last.status = log.arrived ? "arrived" : "missed";
  log.steps.push_back(std::move(last));
  return log;
}

std::vector<TrajectoryLog> simulate(Scenario& sc) {
  const ScenarioConfig& c = sc.config();
  std::vector<TrajectoryLog> logs;
  for (int run = 0; run < c.runs; ++run) {
    const X0Sample x0 = sample_x0(sc, c.seed, run);
    auto rng = make_rng(c.seed, run, 1);
    const auto w = sample_disturbances(sc.problem().W, sc.problem().N0, c.disturbance, rng);
    for (Mode m : c.modes) logs.push_back(run_closed_loop(sc, m, x0.x0, w, run));
  }
  return logs;
}

std::vector<PlanResult> plan_open_loop(Scenario& sc) {
  const ScenarioConfig& c = sc.config();
  const auto& p = sc.problem();
  std::vector<PlanResult> out;
  for (int run = 0; run < c.runs; ++run) {
    PlanResult r;
    r.run = run;
    r.x0 = sample_x0(sc, c.seed, run).x0;
    for (Mode m : c.modes) {
      const blocking::BlockingVector s = m == Mode::Full ? blocking::BlockingVector::uniform(p.N0, 1) : p.s0;
      const mpc::QpSolution sol = mpc::solve(mpc::assemble(p, *sc.stages(m), r.x0, s));
      if (sol.status != mpc::QpStatus::Optimal)
        throw Error(ErrorKind::Infeasible, std::string("open-loop plan in mode ") + condense::to_string(m) + ": " +
                                               mpc::to_string(sol.status));
      r.J[m] = sol.cost;
      r.t_c[m] = sol.solve_seconds;
      r.iterations[m] = sol.iterations;
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------- CSV

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_log_csv(const std::string& path, const TrajectoryLog& log) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path);
  const Eigen::Index n = log.x0.size();
  Eigen::Index m = 0;
  for (const auto& r : log.steps) m = std::max(m, r.u.size());
  os << "scenario,seed,run,mode,k";
  for (Eigen::Index i = 0; i < n; ++i) os << ",x_" << i;
  for (Eigen::Index i = 0; i < m; ++i) os << ",u_" << i;
  for (Eigen::Index i = 0; i < n; ++i) os << ",z0_" << i;
  os << ",s,J_stage,qp_cost,solve_seconds,iterations,status\n";
  for (const auto& r : log.steps) {
    os << log.scenario << ',' << log.seed << ',' << log.run << ',' << condense::to_string(log.mode) << ',' << r.k;
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << fmt(r.x(i));
    for (Eigen::Index i = 0; i < m; ++i) os << ',' << (r.u.size() ? fmt(r.u(i)) : "");
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << (r.z0.size() ? fmt(r.z0(i)) : "");
    os << ',' << r.s << ',' << fmt(r.J_stage) << ',' << fmt(r.qp_cost) << ',' << fmt(r.solve_seconds) << ','
       << r.iterations << ',' << r.status << '\n';
  }
}

TrajectoryLog read_log_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot read " + path);
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::Io, path + " is empty");
  const auto header = split_csv(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  auto count = [&](const std::string& prefix) {
    Eigen::Index c = 0;
    while (col.count(prefix + std::to_string(c))) ++c;
    return c;
  };
  const Eigen::Index n = count("x_"), m = count("u_");
  if (n == 0 || count("z0_") != n) throw Error(ErrorKind::InvalidArgument, path + ": missing state columns");
  for (const char* key : {"scenario", "seed", "run", "mode", "k", "s", "J_stage", "qp_cost", "solve_seconds",
                          "iterations", "status"})
    if (!col.count(key)) throw Error(ErrorKind::InvalidArgument, path + ": missing column " + key);

  TrajectoryLog log;
  auto vec = [&](const std::vector<std::string>& f, const std::string& prefix, Eigen::Index size) {
    if (size == 0 || f[col[prefix + "0"]].empty()) return Vec();
    Vec v(size);
    for (Eigen::Index i = 0; i < size; ++i) v(i) = std::stod(f[col[prefix + std::to_string(i)]]);
    return v;
  };
  bool first = true;
  try {
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const auto f = split_csv(line);
      if (f.size() != header.size()) throw Error(ErrorKind::InvalidArgument, path + ": ragged row");
      if (first) {
        log.scenario = f[col["scenario"]];
        log.seed = std::stoull(f[col["seed"]]);
        log.run = std::stoi(f[col["run"]]);
        log.mode = condense::mode_from_string(f[col["mode"]]);
        first = false;
      }
      StepRecord r;
      r.k = std::stoi(f[col["k"]]);
      r.x = vec(f, "x_", n);
      r.u = vec(f, "u_", m);
      r.z0 = vec(f, "z0_", n);
      r.s = f[col["s"]];
      r.J_stage = std::stod(f[col["J_stage"]]);
      r.qp_cost = std::stod(f[col["qp_cost"]]);
      r.solve_seconds = std::stod(f[col["solve_seconds"]]);
      r.iterations = std::stoi(f[col["iterations"]]);
      r.status = f[col["status"]];
      log.steps.push_back(std::move(r));
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidArgument, path + ": malformed number");
  }
  if (log.steps.empty()) throw Error(ErrorKind::InvalidArgument, path + ": no rows");
  log.x0 = log.steps.front().x;
  log.J_open = log.steps.front().qp_cost;
  for (const auto& r : log.steps) log.J += r.J_stage;
  const std::string& last = log.steps.back().status;
  log.arrived = last == "arrived";
  log.infeasible = last == "infeasible" || last == "failed";
  return log;
}

// ---------------------------------------------------------------- summaries

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

namespace {

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json summarize(const std::vector<TrajectoryLog>& logs) {
  std::map<std::pair<std::string, int>, double> full_J, full_J_open;
  for (const auto& l : logs)
    if (l.mode == Mode::Full && !l.infeasible) {
      full_J[{l.scenario, l.run}] = l.J;
      full_J_open[{l.scenario, l.run}] = l.J_open;
    }
  std::map<Mode, std::vector<const TrajectoryLog*>> by_mode;
  for (const auto& l : logs) by_mode[l.mode].push_back(&l);

  Json out = Json::object();
  for (const auto& [mode, ls] : by_mode) {
    std::vector<double> J, J_open, ratio, ratio_open, times;
    int arrived = 0, violations = 0, infeasible = 0;
    for (const TrajectoryLog* l : ls) {
      arrived += l->arrived;
      violations += l->violations;
      infeasible += l->infeasible;
      if (l->infeasible) continue;
      J.push_back(l->J);
      J_open.push_back(l->J_open);
      const auto key = std::make_pair(l->scenario, l->run);
      if (full_J.count(key)) {
        ratio.push_back(l->J / full_J[key]);
        ratio_open.push_back(l->J_open / full_J_open[key]);
      }
      const auto t = l->solve_times();
      times.insert(times.end(), t.begin(), t.end());
    }
    Json m;
    m["runs"] = ls.size();
    m["arrived"] = arrived;
    m["violations"] = violations;
    m["infeasible"] = infeasible;
    m["J_mean"] = number(mean(J));
    m["J_open_mean"] = number(mean(J_open));
    m["J_over_J_full_mean"] = number(mean(ratio));
    m["J_open_over_J_full_mean"] = number(mean(ratio_open));
    m["t_c_mean"] = number(mean(times));
    m["t_c_median"] = number(median(times));
    m["t_c_max"] = number(times.empty() ? NAN : *std::max_element(times.begin(), times.end()));
    out[condense::to_string(mode)] = m;
  }
  return out;
}

Json summarize_plans(const std::vector<PlanResult>& plans) {
  std::map<Mode, std::vector<double>> J, t, ratio;
  for (const auto& p : plans)
    for (const auto& [m, j] : p.J) {
      J[m].push_back(j);
      t[m].push_back(p.t_c.at(m));
      if (p.J.count(Mode::Full)) ratio[m].push_back(j / p.J.at(Mode::Full));
    }
  Json out = Json::object();
  for (const auto& [m, js] : J) {
    Json e;
    e["runs"] = js.size();
    e["J_mean"] = number(mean(js));
    e["J_over_J_full_mean"] = number(mean(ratio[m]));
    e["t_c_mean"] = number(mean(t[m]));
    e["t_c_median"] = number(median(t[m]));
    out[condense::to_string(m)] = e;
  }
  return out;
}

}  // namespace shmpc::sim
