#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "shmpc/blocking/blocking.hpp"
#include "shmpc/error.hpp"
#include "support/oracles.hpp"

#include <map>

using namespace shmpc;
using namespace shmpc::blocking;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an exception");
  return ErrorKind::InvalidArgument;
}

BlockingVector random_vector(std::mt19937_64& rng, int max_len, int max_block) {
  std::uniform_int_distribution<int> len(1, max_len), blk(1, max_block);
  std::vector<int> v(static_cast<std::size_t>(len(rng)));
  for (auto& x : v) x = blk(rng);
  return BlockingVector(v);
}

}  // namespace

TEST_CASE("to_matrix") {
  Mat expected(4, 2);
  expected << 1, 0, 1, 0, 1, 0, 0, 1;
  CHECK(BlockingVector{3, 1}.to_matrix() == expected);
  CHECK(BlockingVector{1}.to_matrix() == Mat::Ones(1, 1));
  const Mat M = BlockingVector{2, 2}.to_matrix();
  CHECK(M.colwise().sum()(0) == 2);
  CHECK(M.colwise().sum()(1) == 2);
  CHECK((M.rowwise().sum().array() == 1.0).all());
}

TEST_CASE("expand matches the Kronecker product with the blocking matrix") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const BlockingVector s = random_vector(rng, 6, 5);
    const int m = 1 + t % 3;
    const Vec V = oracle::uniform_vec(rng, s.size() * m);
    const Vec U = kron(s.to_matrix(), Mat::Identity(m, m)) * V;
    CHECK((expand(s, V, m) - U).norm() == 0.0);
  }
}

TEST_CASE("split") {
  CHECK(split({3, 1}, 0, 2) == BlockingVector{1, 2, 1});
  CHECK(split({2}, 0, 1) == BlockingVector{1, 1});
  CHECK(kind_of([] { split({1, 2}, 0, 1); }) == ErrorKind::InvalidSplit);
  CHECK(kind_of([] { split({3}, 0, 3); }) == ErrorKind::InvalidSplit);
  CHECK(kind_of([] { split({3}, 0, 0); }) == ErrorKind::InvalidSplit);
  CHECK(kind_of([] { split({3}, 1, 1); }) == ErrorKind::InvalidSplit);

  std::mt19937_64 rng(7);
  int done = 0;
  while (done < 1000) {
    const BlockingVector s = random_vector(rng, 8, 9);
    const int j = std::uniform_int_distribution<int>(0, s.size() - 1)(rng);
    if (s[j] < 2) continue;
    const int i = std::uniform_int_distribution<int>(1, s[j] - 1)(rng);
    const BlockingVector r = split(s, j, i);
    CHECK(r.horizon() == s.horizon());
    CHECK(r.size() == s.size() + 1);
    for (int v : r) CHECK(v >= 1);
    CHECK(r[j] == s[j] - i);
    CHECK(r[j + 1] == i);
    ++done;
  }
}

TEST_CASE("choose_split") {
  CHECK(choose_split({4, 2}) == std::pair{0, 2});
  CHECK(choose_split({3, 3}) == std::pair{1, 2});
  CHECK(choose_split({1, 5, 1}) == std::pair{1, 3});
  CHECK(kind_of([] { choose_split({1, 1}); }) == ErrorKind::NoSplittable);
}

TEST_CASE("advance examples") {
  auto [a, ta] = advance({1, 3, 1}, 5, 3);
  CHECK(a == BlockingVector{1, 2, 1});
  CHECK(ta.kind == TransitionKind::DropAndSplit);
  CHECK(ta.j == 0);
  CHECK(ta.i == 2);
  auto [b, tb] = advance({4, 1}, 5, 2);
  CHECK(b == BlockingVector{3, 1});
  CHECK(tb.kind == TransitionKind::DecrementFirst);
  auto [c, tc] = advance({1, 1}, 2, 10);
  CHECK(c == BlockingVector{1});
  CHECK(tc.kind == TransitionKind::DropOnly);
  CHECK(kind_of([] { advance({1}, 1, 10); }) == ErrorKind::HorizonExhausted);
}

TEST_CASE("advance conservation and efficiency along full runs") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const int N_max = std::uniform_int_distribution<int>(1, 8)(rng);
    BlockingVector s = random_vector(rng, N_max, 12);
    for (int N = s.horizon(); N > 1; --N) {
      const int prev_len = s.size();
      auto [next, tr] = advance(s, N, N_max);
      CHECK(next.horizon() == N - 1);
      CHECK(next.size() <= N_max);
      if (N > N_max) CHECK(next.size() == std::min(N_max, prev_len));
      if (tr.kind == TransitionKind::DropAndSplit) {
        CHECK(s[0] == 1);
        CHECK(N > N_max);
      }
      s = next;
    }
    CHECK(s == BlockingVector{1});
  }
}

TEST_CASE("warm start examples") {
  Vec V(2);
  V << 3.0, -1.0;
  CHECK(warm_start(V, {TransitionKind::DecrementFirst, -1, 0}, 1) == V);
  const Vec W = warm_start(V, {TransitionKind::DropAndSplit, 0, 2}, 1);
  REQUIRE(W.size() == 2);
  // s' = (3,1) truncated from (1,3,1); V_prev had three blocks (x, a, b).
  Vec V3(3);
  V3 << 9.0, 3.0, -1.0;
  const Vec W3 = warm_start(V3, {TransitionKind::DropAndSplit, 0, 2}, 1);
  Vec expected(3);
  expected << 3.0, 3.0, -1.0;
  CHECK(W3 == expected);
  CHECK((expand(BlockingVector{1, 2, 1}, W3, 1) - expand(BlockingVector{1, 3, 1}, V3, 1).tail(4)).norm() == 0.0);
  Vec V4(3);
  V4 << 1.0, 2.0, 3.0;
  Vec tail(2);
  tail << 2.0, 3.0;
  CHECK(warm_start(V4, {TransitionKind::DropOnly, -1, 0}, 1) == tail);
  CHECK(kind_of([&] { warm_start(V4, {TransitionKind::DropOnly, -1, 0}, 2); }) == ErrorKind::DimMismatch);
}

TEST_CASE("warm start exactness for every transition kind") {
  std::mt19937_64 rng(5);
  std::map<TransitionKind, int> seen;
  for (int t = 0; t < 1000; ++t) {
    const int N_max = std::uniform_int_distribution<int>(1, 6)(rng);
    const int m = std::uniform_int_distribution<int>(1, 3)(rng);
    BlockingVector s = random_vector(rng, N_max, 6);
    if (s.horizon() < 2) continue;
    const Vec V = oracle::uniform_vec(rng, s.size() * m);
    const auto [next, tr] = advance(s, s.horizon(), N_max);
    const Vec W = warm_start(V, tr, m);
    REQUIRE(W.size() == next.size() * m);
    const Vec lhs = expand(next, W, m);
    const Vec rhs = expand(s, V, m).tail((s.horizon() - 1) * m);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() == 0.0);
    ++seen[tr.kind];
  }
  CHECK(seen[TransitionKind::DecrementFirst] > 0);
  CHECK(seen[TransitionKind::DropAndSplit] > 0);
  CHECK(seen[TransitionKind::DropOnly] > 0);
}

TEST_CASE("reachable lengths from the helicopter initial blocking") {
  const auto L = reachable_lengths(BlockingVector::uniform(10, 30), 10);
  CHECK(L.front() == 1);
  CHECK(L.back() == 30);
  CHECK(std::is_sorted(L.begin(), L.end()));
}
