#include "shmpc/condense/stage.hpp"

#include "shmpc/error.hpp"
#include "shmpc/geometry/serialize.hpp"

#include <cstdio>
#include <filesystem>

namespace shmpc::condense {

const char* to_string(Mode m) {
  switch (m) {
    case Mode::Full: return "full";
    case Mode::Raw: return "raw";
    case Mode::Minimal: return "minimal";
    case Mode::Approx: return "approx";
  }
  return "unknown";
}

Mode mode_from_string(const std::string& s) {
  if (s == "full") return Mode::Full;
  if (s == "raw") return Mode::Raw;
  if (s == "minimal") return Mode::Minimal;
  if (s == "approx") return Mode::Approx;
  throw Error(ErrorKind::InvalidArgument, "unknown mode '" + s + "' (full|raw|minimal|approx)");
}

std::uint64_t StageSetup::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  h = hash_combine(h, 2.0);  // format version
  h = hash_combine(h, sys.A);
  h = hash_combine(h, sys.B);
  h = hash_combine(h, H);
  h = hash_combine(h, F_bar.normals());
  h = hash_combine(h, Mat(F_bar.offsets()));
  h = hash_combine(h, approx.sigma_min);
  h = hash_combine(h, approx.sigma_max);
  h = hash_combine(h, approx.tol);
  h = hash_combine(h, approx.center_tiebreak ? 1.0 : 0.0);
  return h;
}

namespace {

void fill_dynamics(const StageSetup& setup, BlockStage& st) {
  const Mat Aa = setup.A_aug();
  std::tie(st.A_blk, st.B_blk) = block_dynamics(setup.sys, st.length);
  st.H_blk = block_cost(setup.H, Aa, st.length);
  st.G_track = block_tracking(setup.H, Aa, st.length);
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

BlockStage build_stage(const StageSetup& setup, int s, Mode mode) {
  if (s < 1) throw Error(ErrorKind::InvalidArgument, "block length must be >= 1");
  if (mode == Mode::Full && s != 1) throw Error(ErrorKind::InvalidArgument, "full mode only uses length-1 stages");
  BlockStage st;
  st.length = s;
  st.mode = mode;
  fill_dynamics(setup, st);
  const Mat Aa = setup.A_aug();
  switch (mode) {
    case Mode::Full:
    case Mode::Raw:
      st.F = block_constraints_exact(setup.F_bar, Aa, s, ExactMode::Raw);
      st.q_raw = static_cast<int>(st.F.num_halfspaces());
      break;
    case Mode::Minimal:
      st.F = block_constraints_exact(setup.F_bar, Aa, s, ExactMode::Minimal);
      st.q_raw = static_cast<int>(setup.F_bar.num_halfspaces()) * s;
      break;
    case Mode::Approx: {
      const geometry::HPolytope exact = block_constraints_exact(setup.F_bar, Aa, s, ExactMode::Minimal);
      const geometry::HPolytope templ =
          geometry::remove_redundancy(build_template(setup.F_bar, Aa, s, TemplateSpec::midpoint(s)));
      auto [sol, rec] = inner_approximate(exact, templ, setup.approx);
      st.F = std::move(rec);
      st.sigma = sol.sigma;
      st.x_off = sol.x_off;
      st.q_raw = static_cast<int>(setup.F_bar.num_halfspaces()) * s;
      st.q_template = static_cast<int>(templ.num_halfspaces());
      break;
    }
  }
  return st;
}

Json to_json(const BlockStage& st, std::uint64_t setup_hash) {
  Json j = {{"hash", hex(setup_hash)},
            {"length", st.length},
            {"mode", to_string(st.mode)},
            {"F", geometry::to_json(st.F)},
            {"q_raw", st.q_raw},
            {"q_template", st.q_template}};
  if (st.mode == Mode::Approx) {
    j["sigma"] = shmpc::to_json(st.sigma);
    j["x_off"] = shmpc::to_json(st.x_off);
  }
  return j;
}

BlockStage stage_from_json(const Json& j, const StageSetup& setup) {
  if (j.at("hash").get<std::string>() != hex(setup.hash()))
    throw Error(ErrorKind::InvalidArgument, "stage file belongs to a different setup");
  BlockStage st;
  st.length = j.at("length").get<int>();
  st.mode = mode_from_string(j.at("mode").get<std::string>());
  fill_dynamics(setup, st);
  st.F = geometry::hpolytope_from_json(j.at("F"));
  st.q_raw = j.at("q_raw").get<int>();
  st.q_template = j.at("q_template").get<int>();
  if (st.mode == Mode::Approx) {
    st.sigma = vec_from_json(j.at("sigma"));
    st.x_off = vec_from_json(j.at("x_off"));
  }
  return st;
}

StageCache::StageCache(StageSetup setup, Mode mode, std::string directory)
    : setup_(std::move(setup)), hash_(setup_.hash()), mode_(mode), dir_(std::move(directory)) {}

std::string StageCache::path_for(int s) const {
  return dir_ + "/stage_" + hex(hash_) + "_" + to_string(mode_) + "_" + std::to_string(s) + ".json";
}

void StageCache::precompute(const std::vector<int>& lengths) {
  for (int s : lengths) get_or_build(s);
}

bool StageCache::has(int s) const {
  std::lock_guard<std::mutex> lock(mu_);
  return stages_.count(s) > 0;
}

const BlockStage& StageCache::get(int s) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = stages_.find(s);
  if (it == stages_.end())
    throw Error(ErrorKind::MissingStage, "no " + std::string(to_string(mode_)) + " stage for length " + std::to_string(s));
  return *it->second;
}

const BlockStage& StageCache::get_or_build(int s) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = stages_.find(s);
    if (it != stages_.end()) return *it->second;
  }
  std::shared_ptr<BlockStage> st;
  bool from_file = false;
  if (!dir_.empty() && std::filesystem::exists(path_for(s))) {
    try {
      st = std::make_shared<BlockStage>(stage_from_json(read_json_file(path_for(s)), setup_));
      from_file = true;
    } catch (const Error&) {
      st.reset();  // stale or foreign file: rebuild and overwrite
    }
  }
  if (!st) st = std::make_shared<BlockStage>(build_stage(setup_, s, mode_));
  bool wrote = false;
  if (!from_file && !dir_.empty()) {
    std::filesystem::create_directories(dir_);
    write_json_file(path_for(s), to_json(*st, hash_));
    wrote = true;
  }
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = stages_.emplace(s, std::move(st));
  if (inserted) {
    loaded_ += from_file ? 1 : 0;
    written_ += wrote ? 1 : 0;
  }
  return *it->second;
}

}  // namespace shmpc::condense
