#pragma once

#include "shmpc/condense/condense.hpp"
#include "shmpc/json_util.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace shmpc::condense {

/// Constraint handling of the blocked QP.
///   Full: per-step formulation, every interval has length 1.
///   Raw: stacked preimages. Minimal: raw without redundant rows.
///   Approx: scaled template inner approximation.
enum class Mode { Full, Raw, Minimal, Approx };

const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

/// Inputs every block stage depends on.
struct StageSetup {
  tube::LTISystem sys;
  Mat H;
  geometry::HPolytope F_bar;
  ApproxOptions approx;

  Mat A_aug() const { return augmented_matrix(sys.A, sys.B); }
  std::uint64_t hash() const;
};

struct BlockStage {
  int length = 0;
  Mode mode = Mode::Raw;
  Mat A_blk;
  Mat B_blk;
  Mat H_blk;
  Mat G_track;  // sum_j (A_aug^j)' H
  geometry::HPolytope F;
  int q_raw = 0;
  int q_template = 0;
  Vec sigma;  // Approx only
  Vec x_off;  // Approx only
};

/// Builds the stage of one interval length.
BlockStage build_stage(const StageSetup& setup, int s, Mode mode);

Json to_json(const BlockStage& st, std::uint64_t setup_hash);
/// Restores a stage; throws InvalidArgument when the hash does not match.
BlockStage stage_from_json(const Json& j, const StageSetup& setup);

/// Memo of stages by length for one mode, optionally backed by a directory of
/// JSON files keyed by (setup hash, length, mode).
class StageCache {
 public:
  StageCache(StageSetup setup, Mode mode, std::string directory = "");

  Mode mode() const { return mode_; }
  const StageSetup& setup() const { return setup_; }

  /// Builds (or loads) every listed length that is not cached yet.
  void precompute(const std::vector<int>& lengths);
  bool has(int s) const;
  /// Throws MissingStage.
  const BlockStage& get(int s) const;
  /// Builds on demand.
  const BlockStage& get_or_build(int s);

  int files_loaded() const { return loaded_; }
  int files_written() const { return written_; }

 private:
  std::string path_for(int s) const;

  StageSetup setup_;
  std::uint64_t hash_;
  Mode mode_;
  std::string dir_;
  mutable std::mutex mu_;
  std::map<int, std::shared_ptr<const BlockStage>> stages_;
  int loaded_ = 0;
  int written_ = 0;
};

}  // namespace shmpc::condense
