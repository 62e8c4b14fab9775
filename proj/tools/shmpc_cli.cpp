// shmpc command line: tube, stages, plan, simulate, study, report.
//
// Exit codes: 0 success, 1 infeasibility-type or numerical failure, 2 bad input.

#include "shmpc/error.hpp"
#include "shmpc/sim/simulate.hpp"
#include "shmpc/sim/study.hpp"
#include "shmpc/tube/tube.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace shmpc;

namespace {

constexpr const char* kSchemaHelp = R"(Config files are JSON (see docs/config.md). Top-level keys:
  preset        "heli" to start from the helicopter preset; other keys override it
  name          scenario label written into every log
  problem       {tau, A, B, F:{dim,normals,offsets}, X_T:{...}, W:{dim,center,generators},
                 Q, R, N0, N_max, x_ref, s0:[...], rpi:{alpha,max_terms}, product}
  seed, runs    RNG seed and number of runs
  modes         subset of ["full","raw","minimal","approx"]
  disturbance   "uniform" | "vertex"
  x0_box        {lo:[...], hi:[...]} box for initial-state rejection sampling
  max_attempts  sampling cap per run
  approx        {sigma_min, sigma_max (null = unbounded)}
  cache_dir     directory for stage caches ("" = in memory)
--config also accepts the preset name "heli" directly.)";

struct Common {
  std::string config = "heli";
  std::string out = "out";
  std::string mode;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::string disturbance;
  std::string cache;
};

std::vector<condense::Mode> parse_modes(const std::string& s) {
  if (s == "all") return {condense::Mode::Full, condense::Mode::Raw, condense::Mode::Minimal, condense::Mode::Approx};
  std::vector<condense::Mode> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(condense::mode_from_string(item));
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "empty --mode");
  return out;
}

sim::ScenarioConfig load(const Common& c) {
  sim::ScenarioConfig cfg = sim::load_config(c.config);
  if (!c.mode.empty()) cfg.modes = parse_modes(c.mode);
  if (c.seed) cfg.seed = *c.seed;
  if (c.runs) {
    if (*c.runs < 1) throw Error(ErrorKind::InvalidArgument, "--runs must be >= 1");
    cfg.runs = *c.runs;
  }
  if (!c.disturbance.empty()) cfg.disturbance = sim::disturbance_from_string(c.disturbance);
  if (!c.cache.empty()) cfg.cache_dir = c.cache;
  return cfg;
}

fs::path prepare_out(const std::string& dir) {
  fs::create_directories(dir);
  return fs::path(dir);
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void add_common(CLI::App* app, Common& c, bool with_runs) {
  app->add_option("--config", c.config, "preset name or JSON config file")->capture_default_str();
  app->add_option("--out", c.out, "output directory")->capture_default_str();
  app->add_option("--mode", c.mode, "comma-separated subset of full,raw,minimal,approx, or all");
  app->add_option("--seed", c.seed, "RNG seed");
  if (with_runs) app->add_option("--runs", c.runs, "number of runs");
  app->add_option("--disturbance", c.disturbance, "uniform or vertex");
  app->add_option("--cache", c.cache, "stage cache directory");
}

int cmd_tube(const Common& c) {
  const auto cfg = load(c);
  const auto p = sim::build_problem(cfg);
  const auto out = prepare_out(c.out);
  Json j = tube::to_json(p.tube);
  j["seed"] = cfg.seed;
  j["scenario"] = cfg.name;
  const bool cert = tube::certify_rpi(p.sys.A - p.sys.B * p.tube.K, p.W, p.tube.rpi);
  j["certified"] = cert;
  write_json_file((out / "tube.json").string(), j);
  std::cout << "tube: method=" << tube::to_string(p.tube.rpi.method) << " s_rpi=" << p.tube.rpi.s_rpi
            << " generators=" << p.tube.Z().num_generators() << " alpha=" << p.tube.rpi.alpha
            << " certified=" << (cert ? "yes" : "no") << "\n";
  std::cout << "wrote " << (out / "tube.json").string() << "\n";
  return cert ? 0 : 1;
}

int cmd_stages(Common c) {
  if (c.cache.empty()) c.cache = c.out;
  auto cfg = load(c);
  prepare_out(cfg.cache_dir);
  sim::Scenario sc(cfg);
  for (auto m : cfg.modes) {
    const auto t0 = std::chrono::steady_clock::now();
    auto cache = sc.stages(m);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << condense::to_string(m) << ":";
    for (int s : mpc::required_lengths(sc.problem(), m))
      std::cout << " s=" << s << "/" << cache->get(s).F.num_halfspaces() << "rows";
    std::cout << "  (" << cache->files_loaded() << " loaded, " << cache->files_written() << " written, " << dt
              << " s)\n";
  }
  return 0;
}

int cmd_plan(const Common& c) {
  const auto cfg = load(c);
  sim::Scenario sc(cfg);
  const auto plans = sim::plan_open_loop(sc);
  const auto out = prepare_out(c.out);
  std::ofstream os(out / "plan.csv");
  os << "scenario,seed,run,mode,J,J_over_J_full,t_c,iterations\n";
  for (const auto& p : plans)
    for (const auto& [m, J] : p.J) {
      os << cfg.name << ',' << cfg.seed << ',' << p.run << ',' << condense::to_string(m) << ',' << num(J) << ',';
      if (p.J.count(condense::Mode::Full)) os << num(J / p.J.at(condense::Mode::Full));
      os << ',' << num(p.t_c.at(m)) << ',' << p.iterations.at(m) << '\n';
    }
  Json summary = {{"scenario", cfg.name}, {"seed", cfg.seed}, {"runs", cfg.runs}, {"modes", sim::summarize_plans(plans)}};
  write_json_file((out / "plan_summary.json").string(), summary);
  std::cout << summary["modes"].dump(2) << "\n";
  return 0;
}

int cmd_simulate(const Common& c) {
  const auto cfg = load(c);
  sim::Scenario sc(cfg);
  const auto out = prepare_out(c.out);
  const auto logs = sim::simulate(sc);
  bool ok = true;
  for (const auto& l : logs) {
    const std::string name = "log_" + std::string(condense::to_string(l.mode)) + "_run" + std::to_string(l.run) + ".csv";
    sim::write_log_csv((out / name).string(), l);
    std::cout << condense::to_string(l.mode) << " run " << l.run << ": arrived=" << (l.arrived ? "yes" : "no")
              << " violations=" << l.violations << " J=" << l.J << (l.infeasible ? " INFEASIBLE: " + l.error : "")
              << "\n";
    ok = ok && l.arrived && !l.infeasible && l.violations == 0;
  }
  Json summary = {{"scenario", cfg.name}, {"seed", cfg.seed}, {"config", sim::to_json(cfg)}, {"modes", sim::summarize(logs)}};
  write_json_file((out / "summary.json").string(), summary);
  return ok ? 0 : 1;
}

int cmd_study(const Common& c, int count, const std::string& s_list, std::size_t samples) {
  sim::StudyOptions o;
  o.count = count;
  o.seed = c.seed.value_or(1);
  o.volume_samples = samples;
  o.s_values.clear();
  std::stringstream ss(s_list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      o.s_values.push_back(std::stoi(item));
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::InvalidArgument, "--s expects comma-separated integers");
    }
  }
  const auto rep = sim::example_study(o);
  const auto out = prepare_out(c.out);
  rep.write_csv((out / "study.csv").string());
  Json summary = {{"seed", o.seed}, {"count", o.count}, {"volume_samples", o.volume_samples}, {"by_s", rep.aggregates()}};
  write_json_file((out / "study_summary.json").string(), summary);
  std::cout << summary["by_s"].dump(2) << "\n";
  return 0;
}

int cmd_report(const std::string& in, const std::string& out_dir) {
  if (!fs::is_directory(in)) throw Error(ErrorKind::Io, "not a directory: " + in);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(in))
    if (e.path().extension() == ".csv" && e.path().filename().string().rfind("log_", 0) == 0) files.push_back(e.path());
  if (files.empty()) throw Error(ErrorKind::InvalidArgument, "no log_*.csv files in " + in);
  std::sort(files.begin(), files.end());
  std::vector<sim::TrajectoryLog> logs;
  for (const auto& f : files) logs.push_back(sim::read_log_csv(f.string()));
  const Json modes = sim::summarize(logs);
  const auto out = prepare_out(out_dir);
  write_json_file((out / "report.json").string(), {{"files", files.size()}, {"modes", modes}});
  std::ofstream os(out / "report.csv");
  const std::vector<std::string> keys{"runs", "arrived", "violations", "infeasible", "J_mean", "J_open_mean",
                                      "J_over_J_full_mean", "J_open_over_J_full_mean", "t_c_mean", "t_c_median",
                                      "t_c_max"};
  os << "mode";
  for (const auto& k : keys) os << ',' << k;
  os << '\n';
  for (const auto& [m, v] : modes.items()) {
    os << m;
    for (const auto& k : keys) {
      os << ',';
      if (!v.at(k).is_null()) os << (v.at(k).is_number_float() ? num(v.at(k).get<double>()) : v.at(k).dump());
    }
    os << '\n';
  }
  std::cout << modes.dump(2) << "\n";
  return 0;
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::DimMismatch:
    case ErrorKind::Io:
    case ErrorKind::InvalidSplit:
      return 2;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust shrinking-horizon tube MPC with move blocking"};
  app.footer(kSchemaHelp);
  app.require_subcommand(1);

  Common tube_o, stages_o, plan_o, sim_o, study_o;
  int count = 20;
  std::string s_list = "10,20,30";
  std::size_t samples = 100000;
  std::string report_in, report_out;

  auto* tube_cmd = app.add_subcommand("tube", "compute and serialize the tube design");
  add_common(tube_cmd, tube_o, false);
  auto* stages_cmd = app.add_subcommand("stages", "precompute block stage caches into --out (or --cache)");
  add_common(stages_cmd, stages_o, false);
  auto* plan_cmd = app.add_subcommand("plan", "open-loop plans at k = 0");
  add_common(plan_cmd, plan_o, true);
  auto* sim_cmd = app.add_subcommand("simulate", "closed-loop runs, one CSV log per run and mode");
  add_common(sim_cmd, sim_o, true);
  auto* study_cmd = app.add_subcommand("study", "random second-order constraint reduction study");
  study_cmd->add_option("--out", study_o.out, "output directory")->capture_default_str();
  study_cmd->add_option("--seed", study_o.seed, "RNG seed");
  study_cmd->add_option("--count", count, "number of random systems")->capture_default_str();
  study_cmd->add_option("--s", s_list, "comma-separated block lengths")->capture_default_str();
  study_cmd->add_option("--samples", samples, "Monte Carlo samples per volume")->capture_default_str();
  auto* report_cmd = app.add_subcommand("report", "aggregate log_*.csv files into report.csv/report.json");
  report_cmd->add_option("input", report_in, "directory with logs")->required();
  report_cmd->add_option("--out", report_out, "output directory (default: input)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*tube_cmd) return cmd_tube(tube_o);
    if (*stages_cmd) return cmd_stages(stages_o);
    if (*plan_cmd) return cmd_plan(plan_o);
    if (*sim_cmd) return cmd_simulate(sim_o);
    if (*study_cmd) return cmd_study(study_o, count, s_list, samples);
    if (*report_cmd) return cmd_report(report_in, report_out.empty() ? report_in : report_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const int rc = exit_code(e);
    if (rc == 2) std::cerr << "\n" << kSchemaHelp << "\n";
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
