#pragma once

#include "shmpc/linalg.hpp"

#include <functional>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

namespace shmpc::blocking {

/// Interval lengths s = (s_1, ..., s_Nbar) of a move-blocking matrix.
/// Indices in this API are 0-based.
class BlockingVector {
 public:
  BlockingVector() = default;
  explicit BlockingVector(std::vector<int> s);
  BlockingVector(std::initializer_list<int> s) : BlockingVector(std::vector<int>(s)) {}

  /// `count` intervals of equal `length`.
  static BlockingVector uniform(int count, int length);

  int size() const { return static_cast<int>(s_.size()); }
  int horizon() const { return horizon_; }
  int operator[](int i) const { return s_.at(static_cast<std::size_t>(i)); }
  const std::vector<int>& values() const { return s_; }
  auto begin() const { return s_.begin(); }
  auto end() const { return s_.end(); }

  /// Block-diagonal 0/1 matrix diag(1_{s_1}, ..., 1_{s_Nbar}), N x Nbar.
  Mat to_matrix() const;
  std::string to_string() const;  // "30,30,..."

  bool operator==(const BlockingVector& o) const { return s_ == o.s_; }

 private:
  std::vector<int> s_;
  int horizon_ = 0;
};

enum class TransitionKind { DecrementFirst, DropAndSplit, DropOnly };

const char* to_string(TransitionKind k);

/// For DropAndSplit, j indexes the vector after the first entry was dropped.
struct BlockingTransition {
  TransitionKind kind = TransitionKind::DecrementFirst;
  int j = -1;
  int i = 0;
};

/// (s_1, ..., s_j - i, i, ..., s_Nbar). Throws InvalidSplit.
BlockingVector split(const BlockingVector& s, int j, int i);

/// Returns (j, i) for a split of `s`.
using SplitStrategy = std::function<std::pair<int, int>(const BlockingVector&)>;

/// Largest interval (last one on ties), split at ceil(s_j / 2). Throws NoSplittable.
std::pair<int, int> choose_split(const BlockingVector& s);

/// One shrinking-horizon step of the blocking vector (sum(s) == N_k).
std::pair<BlockingVector, BlockingTransition> advance(const BlockingVector& s, int N_k, int N_max,
                                                      const SplitStrategy& strategy = choose_split);

/// Shifts a blocked input sequence (size Nbar*m) across `t`.
Vec warm_start(const Vec& V_prev, const BlockingTransition& t, int m);

/// Per-step inputs (M kron I_m) V, size horizon*m.
Vec expand(const BlockingVector& s, const Vec& V, int m);

/// All interval lengths visited by repeated `advance` from s0 down to horizon 1.
std::vector<int> reachable_lengths(const BlockingVector& s0, int N_max, const SplitStrategy& strategy = choose_split);

}  // namespace shmpc::blocking
