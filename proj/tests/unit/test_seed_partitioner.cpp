#include <gtest/gtest.h>

#include <bit>
#include <set>

#include "grem/seed_partitioner.hpp"
#include "grem/synth.hpp"
#include "support/random_graphs.hpp"

namespace grem {
namespace {

Count chunk_cut(const EdgeChunk& c, const std::vector<Side>& side) {
  Count cut = 0;
  for (const Edge& e : c.edges())
    if (!e.is_self_loop() && side[*c.local_index(e.src)] != side[*c.local_index(e.dst)]) ++cut;
  return cut;
}

std::array<Count, 2> sizes_of(const std::vector<Side>& side) {
  std::array<Count, 2> s{0, 0};
  for (Side x : side) ++s[static_cast<std::size_t>(x)];
  return s;
}

// Minimum cut over all bipartitions with sizes floor(n/2) and ceil(n/2).
Count brute_force_min_cut(const EdgeChunk& c) {
  const std::size_t n = c.num_nodes();
  Count best = ~Count{0};
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const auto ones = static_cast<std::size_t>(std::popcount(mask));
    if (ones != n / 2 && ones != (n + 1) / 2) continue;
    std::vector<Side> side(n);
    for (std::size_t i = 0; i < n; ++i) side[i] = (mask >> i) & 1u;
    best = std::min(best, chunk_cut(c, side));
  }
  return best;
}

EdgeChunk chunk_from(const std::function<void(const synth::EdgeSink&)>& gen) {
  std::vector<Edge> e;
  gen([&](const Edge& x) { e.push_back(x); });
  return EdgeChunk(0, std::move(e));
}

TEST(SeedBisect, TwoCliquesWithBridgeHitOptimum) {
  auto c = chunk_from([](const synth::EdgeSink& s) { synth::clique_union_edges({2, 4, 1}, s); });
  EXPECT_EQ(brute_force_min_cut(c), 1u);
  auto side = seed_bisect(c, {}, 4);
  EXPECT_EQ(chunk_cut(c, side), 1u);
  for (NodeId v = 1; v < 4; ++v) EXPECT_EQ(side[v], side[0]);
  for (NodeId v = 5; v < 8; ++v) EXPECT_EQ(side[v], side[4]);
  EXPECT_NE(side[0], side[4]);
}

TEST(SeedBisect, PathSplitsInTheMiddle) {
  auto c = chunk_from([](const synth::EdgeSink& s) { synth::path_edges(4, s); });
  EXPECT_EQ(brute_force_min_cut(c), 1u);
  auto side = seed_bisect(c, {}, 2);
  EXPECT_EQ(chunk_cut(c, side), 1u);
  EXPECT_EQ(side[0], side[1]);
  EXPECT_EQ(side[2], side[3]);
}

TEST(SeedBisect, RandomAlgorithmIsBalancedAndDeterministic) {
  auto c = chunk_from([](const synth::EdgeSink& s) { synth::path_edges(10, s); });
  SeedConfig cfg{SeedAlgorithm::random, 0, 17};
  auto a = seed_bisect(c, cfg, 5);
  EXPECT_EQ(sizes_of(a), (std::array<Count, 2>{5, 5}));
  EXPECT_EQ(a, seed_bisect(c, cfg, 5));
  cfg.rng_seed = 18;
  EXPECT_EQ(sizes_of(seed_bisect(c, cfg, 5)), (std::array<Count, 2>{5, 5}));
}

TEST(SeedBisect, InfeasibleCapacity) {
  auto c = chunk_from([](const synth::EdgeSink& s) { synth::path_edges(10, s); });
  EXPECT_THROW(seed_bisect(c, {}, 4), UsageError);
  EXPECT_THROW(seed_bisect(EdgeChunk(0, {}), {}, 4), UsageError);
}

TEST(SeedBisect, HandlesDisconnectedChunks) {
  // Four components; BFS has to restart.
  auto c = chunk_from([](const synth::EdgeSink& s) { synth::clique_union_edges({4, 3, 0}, s); });
  auto side = seed_bisect(c, {}, 6);
  EXPECT_EQ(sizes_of(side), (std::array<Count, 2>{6, 6}));
  EXPECT_EQ(chunk_cut(c, side), 0u);
}

TEST(SeedBisect, RefinementNeverIncreasesCutAndKeepsBalance) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    EdgeChunk c(0, testing::random_edges(40, 90, seed));
    const Count cap = (c.num_nodes() + 1) / 2;
    Count prev = ~Count{0};
    for (unsigned passes = 0; passes <= 4; ++passes) {
      auto side = seed_bisect(c, {SeedAlgorithm::bfs_grow, passes, 0}, cap);
      const auto s = sizes_of(side);
      EXPECT_LE(s[0] > s[1] ? s[0] - s[1] : s[1] - s[0], 1u) << "seed " << seed;
      EXPECT_LE(std::max(s[0], s[1]), cap);
      const Count cut = chunk_cut(c, side);
      EXPECT_LE(cut, prev) << "seed " << seed << " passes " << passes;
      prev = cut;
    }
  }
}

TEST(SeedBisect, LooseCapacityStillBalanced) {
  EdgeChunk c(0, testing::random_edges(30, 60, 99));
  auto side = seed_bisect(c, {}, c.num_nodes());
  const auto s = sizes_of(side);
  EXPECT_LE(s[0] > s[1] ? s[0] - s[1] : s[1] - s[0], 1u);
}

TEST(SeedBisect, DeterministicForSameInput) {
  EdgeChunk c(0, testing::random_edges(60, 200, 5));
  const Count cap = (c.num_nodes() + 1) / 2;
  EXPECT_EQ(seed_bisect(c, {}, cap), seed_bisect(c, {}, cap));
}

}  // namespace
}  // namespace grem
