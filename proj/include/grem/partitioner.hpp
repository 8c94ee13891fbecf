#pragma once

// Streaming greedy bisection with continuous refinement (GREM), the
// fixed-assignment streaming greedy baseline, and recursive p-way driver.
//
// A bisection streams the edge file in chunks. The first chunk's nodes are
// seeded by an in-memory bisection. Every later chunk visits its nodes in
// ascending id order and reassigns each one to the side holding most of its
// neighbors, where a previously placed node averages the fresh chunk-local
// counts with its stored estimate (each older chunk weighs half as much as
// the next). The baseline leaves placed nodes untouched.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include "grem/edge_stream.hpp"
#include "grem/error.hpp"
#include "grem/io_util.hpp"
#include "grem/labels.hpp"
#include "grem/seed_partitioner.hpp"
#include "grem/types.hpp"

namespace grem {

namespace fs = std::filesystem;

struct GremConfig {
  Count chunk_edges = 0;         // absolute chunk size; 0 means use chunk_fraction
  double chunk_fraction = 1.0;   // of |E|
  double capacity_slack = 0.0;   // P = ceil((1 + slack) * V / 2)
  bool refine = true;            // false: fixed greedy assignments
  SeedConfig seed;
  unsigned passes = 1;
  bool prefetch = true;

  ChunkPlan plan_for(Count num_edges) const {
    return chunk_edges > 0 ? ChunkPlan::by_edges(num_edges, chunk_edges)
                           : ChunkPlan::by_fraction(num_edges, chunk_fraction);
  }

  Count capacity_for(Count num_nodes, Count parts = 2) const {
    if (capacity_slack < 0.0) throw UsageError("capacity slack must be non-negative");
    if (capacity_slack == 0.0) return ceil_div(num_nodes, parts);
    const auto cap = static_cast<Count>(
        std::ceil((1.0L + capacity_slack) * static_cast<long double>(num_nodes) / parts - 1e-12L));
    return std::max(cap, ceil_div(num_nodes, parts));
  }

  void validate() const {
    if (passes < 1) throw UsageError("passes must be at least 1");
    if (capacity_slack < 0.0 || !std::isfinite(capacity_slack))
      throw UsageError("capacity slack must be a finite non-negative number");
    if (chunk_edges == 0 && !(chunk_fraction > 0.0 && chunk_fraction <= 1.0))
      throw UsageError("chunk fraction must be in (0, 1]");
  }
};

using NbrCounts = std::array<float, 2>;

// Chunk-local neighbors of `node` currently in partition 0 and 1.
inline NbrCounts cnt_nbrs(NodeId node, const EdgeChunk& chunk, std::span<const Side> parts) {
  NbrCounts c{0.0f, 0.0f};
  for (NodeId nbr : chunk.neighbors(node)) {
    const Side s = parts[nbr];
    if (s != kUnassigned) c[static_cast<std::size_t>(s)] += 1.0f;
  }
  return c;
}

// Greedy side choice: the majority side if it has room, else the smaller
// partition (ties to 0).
inline Side assign(float nbrs0, float nbrs1, const std::array<Count, 2>& sizes, Count capacity) {
  if (sizes[0] >= capacity && sizes[1] >= capacity)
    throw UsageError("assign called with both partitions at capacity " + std::to_string(capacity));
  if (nbrs0 < nbrs1 && sizes[1] < capacity) return 1;
  if (nbrs1 < nbrs0 && sizes[0] < capacity) return 0;
  return sizes[1] < sizes[0] ? 1 : 0;
}

inline void fix_sizes(Side new_part, Side old_part, std::array<Count, 2>& sizes) noexcept {
  ++sizes[static_cast<std::size_t>(new_part)];
  if (old_part != kUnassigned) --sizes[static_cast<std::size_t>(old_part)];
}

// Applies seed labels (aligned with chunk.nodes()) and records the initial
// neighbor estimates of the seeded nodes.
inline void seed_state(PartitionState& state, const EdgeChunk& chunk, std::span<const Side> seed) {
  if (seed.size() != chunk.num_nodes()) throw UsageError("seed labels must cover every chunk node");
  const auto nodes = chunk.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (seed[i] != 0 && seed[i] != 1) throw UsageError("seed labels must be 0 or 1");
    state.parts[nodes[i]] = seed[i];
  }
  state.sizes = state.recount_sizes();
  if (!state.within_capacity()) throw UsageError("seed partition exceeds capacity");
  for (NodeId n : nodes) state.nbr_counts[n] = cnt_nbrs(n, chunk, state.parts);
}

// Greedy pass over one chunk. Nodes are visited in ascending id and see the
// reassignments made earlier in the same chunk.
inline void process_chunk(PartitionState& state, const EdgeChunk& chunk, bool refine) {
  const auto nodes = chunk.nodes();
  const Count cap = state.capacity;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const NodeId n = nodes[i];
    const Side old_part = state.parts[n];
    if (!refine && old_part != kUnassigned) continue;

    NbrCounts c{0.0f, 0.0f};
    for (NodeId nbr : chunk.neighbors_at(i)) {
      const Side s = state.parts[nbr];
      if (s != kUnassigned) c[static_cast<std::size_t>(s)] += 1.0f;
    }
    if (old_part != kUnassigned) {
      c[0] = (state.nbr_counts[n][0] + c[0]) / 2.0f;
      c[1] = (state.nbr_counts[n][1] + c[1]) / 2.0f;
    }

    Side next;
    if (old_part != kUnassigned && state.sizes[0] >= cap && state.sizes[1] >= cap)
      next = old_part;  // both full: a move would overflow the target side
    else
      next = assign(c[0], c[1], state.sizes, cap);

    state.parts[n] = next;
    fix_sizes(next, old_part, state.sizes);
    state.nbr_counts[n] = c;
  }
}

inline void process_chunk(PartitionState& state, const EdgeChunk& chunk, const GremConfig& config) {
  process_chunk(state, chunk, config.refine);
}

// Places never-seen nodes one at a time on the currently smaller side.
inline void place_unseen(PartitionState& state) {
  for (std::size_t n = 0; n < state.parts.size(); ++n) {
    if (state.parts[n] != kUnassigned) continue;
    const Side s = state.sizes[1] < state.sizes[0] ? 1 : 0;
    state.parts[n] = s;
    ++state.sizes[static_cast<std::size_t>(s)];
  }
}

// Streams the file once and counts edges whose endpoints carry different
// labels. Self-loops are never cut.
inline CutReport count_cuts(const EdgeFile& input, std::span<const std::uint32_t> labels, std::uint32_t num_parts) {
  if (labels.size() != input.meta.num_nodes)
    throw DataError("labels cover " + std::to_string(labels.size()) + " nodes, graph has " +
                    std::to_string(input.meta.num_nodes));
  if (num_parts < 1) throw UsageError("num_parts must be at least 1");
  CutReport r;
  EdgeReader reader(input);
  std::vector<Edge> block;
  while (reader.read(block, 1 << 16) > 0) {
    for (const Edge& e : block) {
      const auto a = labels[e.src], b = labels[e.dst];
      if (a == kNoLabel || b == kNoLabel || a >= num_parts || b >= num_parts)
        throw DataError("unlabeled endpoint in edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) + ")");
      ++r.total_edges;
      if (a != b) ++r.cut_edges;
    }
    block.clear();
  }
  r.cut_fraction = r.total_edges ? static_cast<double>(r.cut_edges) / static_cast<double>(r.total_edges) : 0.0;
  r.partition_sizes.assign(num_parts, 0);
  for (auto l : labels)
    if (l != kNoLabel && l < num_parts) ++r.partition_sizes[l];
  const Count ideal = ceil_div(labels.size(), num_parts);
  const Count largest = *std::max_element(r.partition_sizes.begin(), r.partition_sizes.end());
  r.balance_ratio = static_cast<double>(largest) / static_cast<double>(ideal);
  return r;
}

struct Checkpoint {
  enum class Stage { seeded, chunk, final } stage;
  unsigned pass = 0;
  std::size_t chunk_index = 0;
  const PartitionState& state;
};

using SeedFn = std::function<std::vector<Side>(const EdgeChunk&, Count capacity)>;
using CheckpointFn = std::function<void(const Checkpoint&)>;

struct BisectOptions {
  std::optional<Count> capacity;  // overrides config.capacity_slack
  SeedFn seed;                    // overrides config.seed
  CheckpointFn observer;
  ResidentMeter* meter = nullptr;
};

struct BisectResult {
  std::vector<std::uint32_t> labels;
  CutReport report;
  Count capacity = 0;
  std::size_t state_bytes = 0;
};

inline BisectResult bisect(const EdgeFile& input, const GremConfig& config, const BisectOptions& options = {}) {
  config.validate();
  const Count n = input.meta.num_nodes;
  const Count cap = options.capacity.value_or(config.capacity_for(n));
  if (2 * cap < n) throw UsageError("capacity too small for a bisection of " + std::to_string(n) + " nodes");

  PartitionState state(n, cap);
  const ChunkPlan plan = config.plan_for(input.meta.num_edges);
  auto notify = [&](Checkpoint::Stage stage, unsigned pass, std::size_t chunk) {
    if (!state.within_capacity()) throw std::logic_error("partition above capacity after chunk " + std::to_string(chunk));
    if (options.observer) options.observer(Checkpoint{stage, pass, chunk, state});
  };

  for (unsigned pass = 0; pass < config.passes; ++pass) {
    ChunkStream stream(input, plan, options.meter, config.prefetch);
    while (auto chunk = stream.next()) {
      if (pass == 0 && chunk->index() == 0) {
        auto seed = options.seed ? options.seed(*chunk, cap) : seed_bisect(*chunk, config.seed, cap);
        seed_state(state, *chunk, seed);
        notify(Checkpoint::Stage::seeded, pass, 0);
      } else {
        process_chunk(state, *chunk, config.refine);
        notify(Checkpoint::Stage::chunk, pass, chunk->index());
      }
    }
  }
  place_unseen(state);
  notify(Checkpoint::Stage::final, config.passes, plan.num_chunks);

  BisectResult out;
  out.capacity = cap;
  out.state_bytes = state.state_bytes();
  out.labels.resize(n);
  for (Count i = 0; i < n; ++i) out.labels[i] = static_cast<std::uint32_t>(state.parts[i]);
  out.report = count_cuts(input, out.labels, 2);
  return out;
}

struct PartitionResult {
  std::vector<std::uint32_t> labels;
  CutReport report;
  Count leaf_capacity = 0;
};

namespace detail {

inline void write_remap(const fs::path& p, std::span<const NodeId> old_ids) {
  std::vector<std::uint8_t> bytes(old_ids.size() * 8);
  for (std::size_t i = 0; i < old_ids.size(); ++i) io::put_u64(bytes.data() + 8 * i, old_ids[i]);
  io::write_all(p, bytes);
}

inline std::vector<NodeId> read_remap(const fs::path& p) {
  auto bytes = io::read_all(p);
  if (bytes.size() % 8 != 0) throw DataError("remap file length not a multiple of 8: " + p.string());
  std::vector<NodeId> ids(bytes.size() / 8);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = io::get_u64(bytes.data() + 8 * i);
  return ids;
}

struct InducedHalf {
  EdgeFile file;
  fs::path remap;
};

// Splits `input` by a bisection into the two induced subgraphs (edges with
// both endpoints on one side), with dense ids in ascending old-id order. Each
// half gets an edge file and a remap sidecar holding the old id per new id.
inline std::array<std::optional<InducedHalf>, 2> extract_halves(const EdgeFile& input,
                                                                 std::span<const std::uint32_t> side,
                                                                 const fs::path& stem) {
  const Count n = input.meta.num_nodes;
  std::vector<NodeId> new_id(n);
  std::array<std::vector<NodeId>, 2> old_ids;
  for (Count v = 0; v < n; ++v) {
    auto& ids = old_ids[side[v]];
    new_id[v] = ids.size();
    ids.push_back(v);
  }
  std::array<std::optional<InducedHalf>, 2> halves;
  std::array<std::unique_ptr<EdgeWriter>, 2> writers;
  for (std::size_t h = 0; h < 2; ++h) {
    if (old_ids[h].empty()) continue;
    const fs::path edges = stem.string() + "." + std::to_string(h) + ".edges";
    writers[h] = std::make_unique<EdgeWriter>(edges, old_ids[h].size());
    halves[h] = InducedHalf{EdgeFile{edges, {}, EdgeFormat::binary}, stem.string() + "." + std::to_string(h) + ".remap"};
    write_remap(halves[h]->remap, old_ids[h]);
  }
  EdgeReader reader(input);
  std::vector<Edge> block;
  while (reader.read(block, 1 << 16) > 0) {
    for (const Edge& e : block) {
      const auto s = side[e.src];
      if (s == side[e.dst]) writers[s]->write({new_id[e.src], new_id[e.dst]});
    }
    block.clear();
  }
  for (std::size_t h = 0; h < 2; ++h)
    if (writers[h]) halves[h]->file = writers[h]->finish();
  return halves;
}

class ScratchDir {
 public:
  explicit ScratchDir(const fs::path& parent) {
    static std::atomic<unsigned> counter{0};
    std::error_code ec;
    fs::create_directories(parent, ec);
    for (unsigned attempt = 0; attempt < 1000; ++attempt) {
      path_ = parent / ("grem-scratch-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
      if (fs::create_directory(path_, ec)) return;
    }
    throw IoError("workdir not writable: " + parent.string());
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const noexcept { return path_; }

 private:
  fs::path path_;
};

inline void partition_recursive(const EdgeFile& input, std::span<const NodeId> original, Count leaves,
                                Count leaf_capacity, std::uint32_t label_base, const GremConfig& config,
                                const fs::path& scratch, const std::string& tag,
                                std::vector<std::uint32_t>& out) {
  if (leaves == 1) {
    for (NodeId v : original) out[v] = label_base;
    return;
  }
  BisectOptions opts;
  opts.capacity = (leaves / 2) * leaf_capacity;
  auto split = bisect(input, config, opts);
  auto halves = extract_halves(input, split.labels, scratch / tag);
  split = {};
  for (std::size_t h = 0; h < 2; ++h) {
    if (!halves[h]) continue;
    auto remap = read_remap(halves[h]->remap);
    std::vector<NodeId> child_original(remap.size());
    for (std::size_t i = 0; i < remap.size(); ++i) child_original[i] = original[remap[i]];
    remap = {};
    const auto child = EdgeFile::open(halves[h]->file.path);
    partition_recursive(child, child_original, leaves / 2, leaf_capacity,
                        label_base + static_cast<std::uint32_t>(h * (leaves / 2)), config, scratch,
                        tag + std::to_string(h), out);
    std::error_code ec;
    fs::remove(halves[h]->file.path, ec);
    fs::remove(halves[h]->remap, ec);
  }
}

}  // namespace detail

// p-way partitioning by recursive bisection. Each leaf holds at most
// ceil((1 + slack) * V / p) nodes; a subtree with q leaves is bisected with
// capacity (q / 2) times that. Cuts are counted against the original file.
inline PartitionResult partition(const EdgeFile& input, Count p, const GremConfig& config, const fs::path& workdir) {
  if (p < 2 || (p & (p - 1)) != 0) throw UsageError("number of parts must be a power of two >= 2");
  if (p > kNoLabel) throw UsageError("too many parts");
  config.validate();
  const Count n = input.meta.num_nodes;
  PartitionResult out;
  out.leaf_capacity = config.capacity_for(n, p);
  if (p == 2) {
    BisectOptions opts;
    opts.capacity = out.leaf_capacity;
    auto r = bisect(input, config, opts);
    out.labels = std::move(r.labels);
    out.report = std::move(r.report);
    return out;
  }
  detail::ScratchDir scratch(workdir);
  std::vector<NodeId> identity(n);
  for (Count v = 0; v < n; ++v) identity[v] = v;
  out.labels.assign(n, kNoLabel);
  detail::partition_recursive(input, identity, p, out.leaf_capacity, 0, config, scratch.path(), "sub", out.labels);
  out.report = count_cuts(input, out.labels, static_cast<std::uint32_t>(p));
  return out;
}

}  // namespace grem
