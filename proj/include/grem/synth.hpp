#pragma once

// Deterministic synthetic graphs with ground-truth block labels.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "grem/edge_stream.hpp"
#include "grem/error.hpp"
#include "grem/types.hpp"

namespace grem::synth {

using EdgeSink = std::function<void(const Edge&)>;

struct SbmSpec {
  Count blocks = 2;
  Count nodes_per_block = 0;
  double p_in = 0.0;
  double p_out = 0.0;
  std::uint64_t rng_seed = 0;

  Count num_nodes() const noexcept { return blocks * nodes_per_block; }

  void validate() const {
    if (blocks < 1 || nodes_per_block < 1) throw UsageError("SBM needs at least one block and one node per block");
    if (!(p_out >= 0.0 && p_out <= p_in && p_in <= 1.0)) throw UsageError("SBM needs 0 <= p_out <= p_in <= 1");
  }
};

struct CliqueUnionSpec {
  Count blocks = 2;
  Count block_size = 0;
  Count bridges = 0;  // edges between each consecutive block pair
};

struct Generated {
  EdgeFile file;
  std::vector<std::uint32_t> labels;
  std::uint32_t num_blocks = 0;
};

// Up to this many nodes every pair draws its own Bernoulli; above it pairs
// are skipped geometrically.
inline constexpr Count kPairwiseLimit = 2048;

namespace detail {

// Walks `count` pair slots with geometric gaps between successes.
template <class Emit>
void geometric_pairs(std::uint64_t count, double p, std::mt19937_64& rng, Emit emit) {
  if (p <= 0.0 || count == 0) return;
  if (p >= 1.0) {
    for (std::uint64_t i = 0; i < count; ++i) emit(i);
    return;
  }
  std::geometric_distribution<std::uint64_t> gap(p);
  std::uint64_t at = gap(rng);
  while (at < count) {
    emit(at);
    const std::uint64_t g = gap(rng);
    if (g >= count - at) break;
    at += g + 1;
  }
}

}  // namespace detail

inline void sbm_edges(const SbmSpec& spec, const EdgeSink& sink) {
  spec.validate();
  const Count n = spec.num_nodes(), s = spec.nodes_per_block;
  std::mt19937_64 rng(spec.rng_seed);
  if (n <= kPairwiseLimit) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = u + 1; v < n; ++v) {
        const double p = u / s == v / s ? spec.p_in : spec.p_out;
        if (coin(rng) < p) sink({u, v});
      }
    return;
  }
  for (Count a = 0; a < spec.blocks; ++a) {
    // Intra-block pairs (i < j) in row order; the row cursor only moves forward.
    NodeId row = 0;
    std::uint64_t row_start = 0;
    detail::geometric_pairs(s * (s - 1) / 2, spec.p_in, rng, [&](std::uint64_t idx) {
      while (idx >= row_start + (s - 1 - row)) {
        row_start += s - 1 - row;
        ++row;
      }
      const NodeId i = row, j = row + 1 + (idx - row_start);
      sink({a * s + i, a * s + j});
    });
    for (Count b = a + 1; b < spec.blocks; ++b)
      detail::geometric_pairs(s * s, spec.p_out, rng,
                              [&](std::uint64_t idx) { sink({a * s + idx / s, b * s + idx % s}); });
  }
}

// Cliques on consecutive id ranges, edges (i, j) with i < j in row order,
// followed by bridges: the t-th bridge between blocks b and b + 1 joins
// their t-th nodes.
inline void clique_union_edges(const CliqueUnionSpec& spec, const EdgeSink& sink) {
  if (spec.blocks < 1 || spec.block_size < 1) throw UsageError("clique union needs nonempty blocks");
  if (spec.bridges > spec.block_size) throw UsageError("more bridges than nodes per block");
  if (spec.bridges > 0 && spec.blocks < 2) throw UsageError("bridges need at least two blocks");
  const Count s = spec.block_size;
  for (Count b = 0; b < spec.blocks; ++b)
    for (NodeId i = 0; i < s; ++i)
      for (NodeId j = i + 1; j < s; ++j) sink({b * s + i, b * s + j});
  for (Count b = 0; b + 1 < spec.blocks; ++b)
    for (Count t = 0; t < spec.bridges; ++t) sink({b * s + t, (b + 1) * s + t});
}

inline void path_edges(Count n, const EdgeSink& sink) {
  if (n < 1) throw UsageError("path needs at least one node");
  for (NodeId i = 0; i + 1 < n; ++i) sink({i, i + 1});
}

// Node 0 is the center.
inline void star_edges(Count n, const EdgeSink& sink) {
  if (n < 1) throw UsageError("star needs at least one node");
  for (NodeId i = 1; i < n; ++i) sink({0, i});
}

namespace detail {

inline Generated emit(const fs::path& out, Count n, std::vector<std::uint32_t> labels, std::uint32_t blocks,
                      const std::function<void(const EdgeSink&)>& gen) {
  EdgeWriter w(out, n);
  gen([&](const Edge& e) { w.write(e); });
  return {w.finish(), std::move(labels), blocks};
}

inline std::vector<std::uint32_t> block_labels(Count blocks, Count size) {
  std::vector<std::uint32_t> l(blocks * size);
  for (Count v = 0; v < l.size(); ++v) l[v] = static_cast<std::uint32_t>(v / size);
  return l;
}

}  // namespace detail

inline Generated generate_sbm(const SbmSpec& spec, const fs::path& out) {
  spec.validate();
  if (spec.blocks > std::numeric_limits<std::uint32_t>::max()) throw UsageError("too many blocks");
  return detail::emit(out, spec.num_nodes(), detail::block_labels(spec.blocks, spec.nodes_per_block),
                      static_cast<std::uint32_t>(spec.blocks), [&](const EdgeSink& s) { sbm_edges(spec, s); });
}

inline Generated generate_clique_union(const CliqueUnionSpec& spec, const fs::path& out) {
  return detail::emit(out, spec.blocks * spec.block_size, detail::block_labels(spec.blocks, spec.block_size),
                      static_cast<std::uint32_t>(spec.blocks), [&](const EdgeSink& s) { clique_union_edges(spec, s); });
}

// Labels split the path into a first and second half.
inline Generated generate_path(Count n, const fs::path& out) {
  std::vector<std::uint32_t> l(n);
  for (Count v = 0; v < n; ++v) l[v] = v < (n + 1) / 2 ? 0 : 1;
  return detail::emit(out, n, std::move(l), n > 1 ? 2 : 1, [&](const EdgeSink& s) { path_edges(n, s); });
}

// A star has no community structure; every node gets label 0.
inline Generated generate_star(Count n, const fs::path& out) {
  return detail::emit(out, n, std::vector<std::uint32_t>(n, 0), 1, [&](const EdgeSink& s) { star_edges(n, s); });
}

}  // namespace grem::synth
