#include "shmpc/blocking/blocking.hpp"

#include "shmpc/error.hpp"

#include <numeric>
#include <set>

namespace shmpc::blocking {

BlockingVector::BlockingVector(std::vector<int> s) : s_(std::move(s)) {
  if (s_.empty()) throw Error(ErrorKind::InvalidArgument, "blocking vector must be nonempty");
  for (int v : s_)
    if (v < 1) throw Error(ErrorKind::InvalidArgument, "blocking intervals must be >= 1");
  horizon_ = std::accumulate(s_.begin(), s_.end(), 0);
}

BlockingVector BlockingVector::uniform(int count, int length) {
  return BlockingVector(std::vector<int>(static_cast<std::size_t>(count), length));
}

Mat BlockingVector::to_matrix() const {
  Mat M = Mat::Zero(horizon_, size());
  int row = 0;
  for (int j = 0; j < size(); ++j)
    for (int k = 0; k < s_[j]; ++k) M(row++, j) = 1.0;
  return M;
}

std::string BlockingVector::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < s_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s_[i]);
  }
  return out;
}

const char* to_string(TransitionKind k) {
  switch (k) {
    case TransitionKind::DecrementFirst: return "decrement_first";
    case TransitionKind::DropAndSplit: return "drop_and_split";
    case TransitionKind::DropOnly: return "drop_only";
  }
  return "unknown";
}

BlockingVector split(const BlockingVector& s, int j, int i) {
  if (j < 0 || j >= s.size()) throw Error(ErrorKind::InvalidSplit, "split index out of range");
  if (s[j] <= 1 || i < 1 || i > s[j] - 1) throw Error(ErrorKind::InvalidSplit, "split length out of range");
  std::vector<int> v = s.values();
  v[j] = s[j] - i;
  v.insert(v.begin() + j + 1, i);
  return BlockingVector(std::move(v));
}

std::pair<int, int> choose_split(const BlockingVector& s) {
  int best = -1;
  for (int j = 0; j < s.size(); ++j)
    if (best < 0 || s[j] >= s[best]) best = j;
  if (s[best] <= 1) throw Error(ErrorKind::NoSplittable, "all intervals have length 1");
  return {best, (s[best] + 1) / 2};
}

std::pair<BlockingVector, BlockingTransition> advance(const BlockingVector& s, int N_k, int N_max,
                                                      const SplitStrategy& strategy) {
  if (N_k <= 1) throw Error(ErrorKind::HorizonExhausted, "no step left to advance");
  if (s.horizon() != N_k) throw Error(ErrorKind::InvalidArgument, "blocking vector does not sum to the horizon");
  BlockingTransition t;
  std::vector<int> v = s.values();
  if (v.front() > 1) {
    --v.front();
    t.kind = TransitionKind::DecrementFirst;
    return {BlockingVector(std::move(v)), t};
  }
  v.erase(v.begin());
  BlockingVector dropped(std::move(v));
  if (N_k > N_max) {
    const auto [j, i] = strategy(dropped);
    t.kind = TransitionKind::DropAndSplit;
    t.j = j;
    t.i = i;
    return {split(dropped, j, i), t};
  }
  t.kind = TransitionKind::DropOnly;
  return {dropped, t};
}

Vec warm_start(const Vec& V_prev, const BlockingTransition& t, int m) {
  if (m <= 0 || V_prev.size() % m != 0) throw Error(ErrorKind::DimMismatch, "warm start input dimension");
  if (t.kind == TransitionKind::DecrementFirst) return V_prev;
  const Eigen::Index nb = V_prev.size() / m;
  if (nb < 2) throw Error(ErrorKind::DimMismatch, "nothing left after dropping the first block");
  const Vec rest = V_prev.tail((nb - 1) * m);
  if (t.kind == TransitionKind::DropOnly) return rest;
  if (t.j < 0 || t.j >= nb - 1) throw Error(ErrorKind::DimMismatch, "split index outside the warm start");
  Vec out(nb * m);
  out.head((t.j + 1) * m) = rest.head((t.j + 1) * m);
  out.segment((t.j + 1) * m, m) = rest.segment(t.j * m, m);
  out.tail((nb - 2 - t.j) * m) = rest.tail((nb - 2 - t.j) * m);
  return out;
}

Vec expand(const BlockingVector& s, const Vec& V, int m) {
  if (V.size() != static_cast<Eigen::Index>(s.size()) * m) throw Error(ErrorKind::DimMismatch, "expand: size");
  Vec U(static_cast<Eigen::Index>(s.horizon()) * m);
  Eigen::Index row = 0;
  for (int j = 0; j < s.size(); ++j)
    for (int k = 0; k < s[j]; ++k, ++row) U.segment(row * m, m) = V.segment(j * m, m);
  return U;
}

std::vector<int> reachable_lengths(const BlockingVector& s0, int N_max, const SplitStrategy& strategy) {
  std::set<int> lengths(s0.begin(), s0.end());
  BlockingVector s = s0;
  for (int N = s0.horizon(); N > 1; --N) {
    s = advance(s, N, N_max, strategy).first;
    lengths.insert(s.begin(), s.end());
  }
  return {lengths.begin(), lengths.end()};
}

}  // namespace shmpc::blocking
