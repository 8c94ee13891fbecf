#pragma once

// Core value types shared by the streaming partitioner, the edge-cut model,
// the storage layout and the placement planner.

#include <algorithm>
#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grem/error.hpp"

namespace grem {

using NodeId = std::uint64_t;
using Count = std::uint64_t;

// Partition label of a node during a bisection.
using Side = std::int8_t;
inline constexpr Side kUnassigned = -1;

// Label value used on disk for a node without a partition.
inline constexpr std::uint32_t kNoLabel = 0xFFFFFFFFu;

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;

  bool is_self_loop() const noexcept { return src == dst; }
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

enum class IdWidth : std::uint32_t { u32 = 32, u64 = 64 };

inline constexpr std::size_t id_bytes(IdWidth w) noexcept { return w == IdWidth::u32 ? 4 : 8; }
inline constexpr std::size_t edge_record_bytes(IdWidth w) noexcept { return 2 * id_bytes(w); }

// Smallest width able to hold every id below num_nodes.
inline constexpr IdWidth width_for(Count num_nodes) noexcept {
  return num_nodes <= (Count{1} << 32) ? IdWidth::u32 : IdWidth::u64;
}

struct GraphMeta {
  Count num_nodes = 1;
  Count num_edges = 0;
  IdWidth id_width = IdWidth::u32;

  void validate() const {
    if (num_nodes < 1) throw DataError("graph must have at least one node");
    if (id_width == IdWidth::u32 && num_nodes > (Count{1} << 32))
      throw DataError("num_nodes does not fit 32-bit ids");
  }
  void check_edge(const Edge& e) const {
    if (e.src >= num_nodes || e.dst >= num_nodes)
      throw DataError("edge endpoint out of range: (" + std::to_string(e.src) + ", " +
                      std::to_string(e.dst) + ") with num_nodes " + std::to_string(num_nodes));
  }

  friend bool operator==(const GraphMeta&, const GraphMeta&) = default;
};

// Tracks how many edges are held in memory by chunk buffers. Thread-safe.
class ResidentMeter {
 public:
  void acquire(Count n) noexcept {
    const Count now = current_.fetch_add(n) + n;
    Count peak = peak_.load();
    while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
    }
  }
  void release(Count n) noexcept { current_.fetch_sub(n); }

  Count current() const noexcept { return current_.load(); }
  Count peak() const noexcept { return peak_.load(); }
  void reset_peak() noexcept { peak_.store(current_.load()); }

 private:
  std::atomic<Count> current_{0};
  std::atomic<Count> peak_{0};
};

// RAII claim on a ResidentMeter, released when the owning buffer dies.
class ResidentLease {
 public:
  ResidentLease() = default;
  ResidentLease(ResidentMeter* meter, Count n) : meter_(meter), n_(n) {
    if (meter_) meter_->acquire(n_);
  }
  ResidentLease(const ResidentLease&) = delete;
  ResidentLease& operator=(const ResidentLease&) = delete;
  ResidentLease(ResidentLease&& o) noexcept : meter_(o.meter_), n_(o.n_) { o.meter_ = nullptr; }
  ResidentLease& operator=(ResidentLease&& o) noexcept {
    if (this != &o) {
      reset();
      meter_ = o.meter_;
      n_ = o.n_;
      o.meter_ = nullptr;
    }
    return *this;
  }
  ~ResidentLease() { reset(); }

  void reset() noexcept {
    if (meter_) meter_->release(n_);
    meter_ = nullptr;
  }

 private:
  ResidentMeter* meter_ = nullptr;
  Count n_ = 0;
};

// A contiguous slice of the edge list plus a symmetric adjacency index over
// the nodes it touches. Self-loops mark their node as present but add no
// neighbor entries; parallel edges appear with multiplicity.
class EdgeChunk {
 public:
  EdgeChunk() = default;

  EdgeChunk(std::size_t index, std::vector<Edge> edges, ResidentLease lease = {})
      : index_(index), edges_(std::move(edges)), lease_(std::move(lease)) {
    build_index();
  }

  std::size_t index() const noexcept { return index_; }
  std::span<const Edge> edges() const noexcept { return edges_; }

  // Unique nodes of the chunk in ascending id order.
  std::span<const NodeId> nodes() const noexcept { return nodes_; }
  std::size_t num_nodes() const noexcept { return nodes_.size(); }

  std::optional<std::size_t> local_index(NodeId n) const noexcept {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), n);
    if (it == nodes_.end() || *it != n) return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
  }

  std::span<const NodeId> neighbors_at(std::size_t local) const noexcept {
    return std::span<const NodeId>(adjacency_).subspan(offsets_[local],
                                                       offsets_[local + 1] - offsets_[local]);
  }

  // Neighbors of a global node id; empty when the node is not in the chunk.
  std::span<const NodeId> neighbors(NodeId n) const noexcept {
    auto li = local_index(n);
    if (!li) return {};
    return neighbors_at(*li);
  }

  std::size_t adjacency_entries() const noexcept { return adjacency_.size(); }

 private:
  void build_index() {
    nodes_.reserve(edges_.size() * 2);
    for (const Edge& e : edges_) {
      nodes_.push_back(e.src);
      nodes_.push_back(e.dst);
    }
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
    nodes_.shrink_to_fit();

    std::vector<std::size_t> src_local(edges_.size());
    std::vector<std::size_t> dst_local(edges_.size());
    offsets_.assign(nodes_.size() + 1, 0);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      src_local[i] = *local_index(edges_[i].src);
      dst_local[i] = *local_index(edges_[i].dst);
      if (edges_[i].is_self_loop()) continue;
      ++offsets_[src_local[i] + 1];
      ++offsets_[dst_local[i] + 1];
    }
    for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
    adjacency_.resize(offsets_.back());
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      if (edges_[i].is_self_loop()) continue;
      adjacency_[cursor[src_local[i]]++] = edges_[i].dst;
      adjacency_[cursor[dst_local[i]]++] = edges_[i].src;
    }
  }

  std::size_t index_ = 0;
  std::vector<Edge> edges_;
  std::vector<NodeId> nodes_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adjacency_;
  ResidentLease lease_;
};

// Live state of one streaming bisection.
struct PartitionState {
  std::vector<Side> parts;
  std::array<Count, 2> sizes{0, 0};
  std::vector<std::array<float, 2>> nbr_counts;
  Count capacity = 0;

  PartitionState() = default;
  PartitionState(Count num_nodes, Count cap)
      : parts(num_nodes, kUnassigned), nbr_counts(num_nodes, {0.0f, 0.0f}), capacity(cap) {}

  Count num_nodes() const noexcept { return parts.size(); }

  std::array<Count, 2> recount_sizes() const noexcept {
    std::array<Count, 2> s{0, 0};
    for (Side p : parts)
      if (p != kUnassigned) ++s[static_cast<std::size_t>(p)];
    return s;
  }
  bool sizes_consistent() const noexcept { return recount_sizes() == sizes; }
  bool within_capacity() const noexcept { return sizes[0] <= capacity && sizes[1] <= capacity; }

  // Bytes of per-node state, independent of chunk size.
  std::size_t state_bytes() const noexcept {
    return parts.size() * sizeof(Side) + nbr_counts.size() * sizeof(nbr_counts[0]);
  }
};

struct CutReport {
  Count total_edges = 0;
  Count cut_edges = 0;
  double cut_fraction = 0.0;
  std::vector<Count> partition_sizes;
  double balance_ratio = 1.0;
};

// Per-node degree and majority-side degree relative to a reference bisection.
struct NodeStats {
  std::vector<Count> k;
  std::vector<Count> k0;

  std::size_t size() const noexcept { return k.size(); }
  Count total_degree() const noexcept {
    Count s = 0;
    for (Count d : k) s += d;
    return s;
  }
};

inline Count ceil_div(Count a, Count b) noexcept { return a / b + (a % b != 0); }

}  // namespace grem
