#pragma once

// In-memory bisection of the first chunk's nodes.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "grem/error.hpp"
#include "grem/types.hpp"

namespace grem {

enum class SeedAlgorithm { bfs_grow, random };

struct SeedConfig {
  SeedAlgorithm algorithm = SeedAlgorithm::bfs_grow;
  unsigned refinement_passes = 2;  // bfs_grow only
  std::uint64_t rng_seed = 0;
};

namespace detail {

// Chunk-local graph with dense local ids, used by the seed refinement.
struct LocalGraph {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> adj;  // sorted per node, with multiplicity

  explicit LocalGraph(const EdgeChunk& chunk) {
    const std::size_t n = chunk.num_nodes();
    offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + chunk.neighbors_at(i).size();
    adj.resize(offsets[n]);
    for (std::size_t i = 0; i < n; ++i) {
      auto nb = chunk.neighbors_at(i);
      for (std::size_t j = 0; j < nb.size(); ++j) adj[offsets[i] + j] = *chunk.local_index(nb[j]);
      std::sort(adj.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                adj.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]));
    }
  }
  std::size_t size() const noexcept { return offsets.size() - 1; }
  std::size_t degree(std::size_t u) const noexcept { return offsets[u + 1] - offsets[u]; }
  auto begin(std::size_t u) const noexcept { return adj.begin() + static_cast<std::ptrdiff_t>(offsets[u]); }
  auto end(std::size_t u) const noexcept { return adj.begin() + static_cast<std::ptrdiff_t>(offsets[u + 1]); }
  long multiplicity(std::size_t u, std::size_t v) const noexcept {
    auto [lo, hi] = std::equal_range(begin(u), end(u), v);
    return static_cast<long>(hi - lo);
  }
};

inline Count local_cut(const LocalGraph& g, const std::vector<Side>& side) {
  Count cut = 0;
  for (std::size_t u = 0; u < g.size(); ++u)
    for (auto it = g.begin(u); it != g.end(u); ++it)
      if (*it > u && side[*it] != side[u]) ++cut;
  return cut;
}

// Boundary refinement that keeps the two sides within one node of each other.
// A node with positive gain moves alone if balance allows, otherwise it is
// swapped with the best partner on the other side. Every accepted action
// strictly lowers the cut.
class BalancedRefiner {
 public:
  BalancedRefiner(const LocalGraph& g, std::vector<Side>& side) : g_(g), side_(side), gain_(g.size(), 0) {
    for (Side s : side_) ++count_[static_cast<std::size_t>(s)];
    for (std::size_t u = 0; u < g_.size(); ++u) {
      gain_[u] = compute_gain(u);
      by_gain_[static_cast<std::size_t>(side_[u])].insert({-gain_[u], u});
    }
  }

  void pass(Count capacity) {
    for (std::size_t u = 0; u < g_.size(); ++u) {
      if (gain_[u] <= 0) continue;
      const auto from = static_cast<std::size_t>(side_[u]);
      const std::size_t to = 1 - from;
      const long diff_after = static_cast<long>(count_[to] + 1) - static_cast<long>(count_[from] - 1);
      if (std::labs(diff_after) <= 1 && count_[to] + 1 <= capacity) {
        move(u);
        continue;
      }
      const long gu = gain_[u];
      long best = 0;
      std::size_t partner = u;
      for (auto [neg_gain, v] : by_gain_[to]) {
        const long gv = -neg_gain;
        if (gu + gv <= best) break;
        const long swap_gain = gu + gv - 2 * g_.multiplicity(u, v);
        if (swap_gain > best) {
          best = swap_gain;
          partner = v;
        }
      }
      if (partner != u) {
        move(u);
        move(partner);
      }
    }
  }

 private:
  long compute_gain(std::size_t u) const {
    long ext = 0, in = 0;
    for (auto it = g_.begin(u); it != g_.end(u); ++it) (side_[*it] == side_[u] ? in : ext) += 1;
    return ext - in;
  }

  void set_gain(std::size_t u, long g) {
    auto& bucket = by_gain_[static_cast<std::size_t>(side_[u])];
    bucket.erase({-gain_[u], u});
    gain_[u] = g;
    bucket.insert({-g, u});
  }

  void move(std::size_t u) {
    const auto from = static_cast<std::size_t>(side_[u]);
    by_gain_[from].erase({-gain_[u], u});
    --count_[from];
    side_[u] = static_cast<Side>(1 - from);
    ++count_[1 - from];
    gain_[u] = -gain_[u];
    by_gain_[1 - from].insert({-gain_[u], u});
    for (auto it = g_.begin(u); it != g_.end(u); ++it) {
      const std::size_t v = *it;
      if (v == u) continue;
      // v's edge to u flipped between internal and external.
      set_gain(v, gain_[v] + (side_[v] == side_[u] ? -2 : 2));
    }
  }

  const LocalGraph& g_;
  std::vector<Side>& side_;
  std::vector<long> gain_;
  std::array<Count, 2> count_{0, 0};
  std::array<std::set<std::pair<long, std::size_t>>, 2> by_gain_;
};

inline std::vector<Side> bfs_grow(const LocalGraph& g) {
  const std::size_t n = g.size();
  const std::size_t target = (n + 1) / 2;
  std::vector<std::size_t> by_degree(n);
  std::iota(by_degree.begin(), by_degree.end(), 0);
  std::stable_sort(by_degree.begin(), by_degree.end(),
                   [&](std::size_t a, std::size_t b) { return g.degree(a) > g.degree(b); });

  std::vector<Side> side(n, 1);
  std::vector<bool> seen(n, false);
  std::size_t grown = 0;
  std::size_t start_cursor = 0;
  std::deque<std::size_t> frontier;
  while (grown < target) {
    if (frontier.empty()) {
      while (seen[by_degree[start_cursor]]) ++start_cursor;
      const std::size_t s = by_degree[start_cursor];
      seen[s] = true;
      frontier.push_back(s);
    }
    const std::size_t u = frontier.front();
    frontier.pop_front();
    side[u] = 0;
    ++grown;
    // Local ids follow global id order and adjacency is sorted, so this
    // enqueues neighbors in ascending node id.
    for (auto it = g.begin(u); it != g.end(u); ++it) {
      if (!seen[*it]) {
        seen[*it] = true;
        frontier.push_back(*it);
      }
    }
  }
  return side;
}

}  // namespace detail

// Labels every node of the chunk with 0 or 1, aligned with chunk.nodes().
inline std::vector<Side> seed_bisect(const EdgeChunk& chunk, const SeedConfig& config, Count capacity) {
  const std::size_t n = chunk.num_nodes();
  if (n == 0) throw UsageError("seed bisection needs a nonempty chunk");
  if (capacity * 2 < n)
    throw UsageError("capacity " + std::to_string(capacity) + " cannot hold " + std::to_string(n) +
                     " seed nodes in two partitions");

  if (config.algorithm == SeedAlgorithm::random) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(config.rng_seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Side> side(n, 1);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) side[order[i]] = 0;
    return side;
  }

  detail::LocalGraph g(chunk);
  auto side = detail::bfs_grow(g);
  if (config.refinement_passes > 0) {
    detail::BalancedRefiner refiner(g, side);
    for (unsigned p = 0; p < config.refinement_passes; ++p) refiner.pass(capacity);
  }
  return side;
}

}  // namespace grem
