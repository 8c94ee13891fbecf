#pragma once

// Partition-to-worker placement, replication selection and a static
// estimate of neighborhood-sampling traffic.
//
// Plan text format, one line per worker, then an optional replication line:
//   0: 3,1
//   1: 0,2
//   replicated: 7,12

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "grem/edge_stream.hpp"
#include "grem/error.hpp"
#include "grem/types.hpp"

namespace grem {

struct PlacementPlan {
  std::uint32_t num_workers = 0;
  std::vector<std::vector<std::uint32_t>> assignment;  // worker -> partitions in processing order
  std::vector<NodeId> replicated_nodes;               // ascending

  std::uint32_t num_parts() const {
    std::size_t n = 0;
    for (const auto& a : assignment) n += a.size();
    return static_cast<std::uint32_t>(n);
  }

  // partition -> worker; throws if the assignment is not an exact cover.
  std::vector<std::uint32_t> owner_of_parts() const {
    const auto p = num_parts();
    std::vector<std::uint32_t> owner(p, kNoLabel);
    for (std::uint32_t w = 0; w < assignment.size(); ++w)
      for (auto part : assignment[w]) {
        if (part >= p || owner[part] != kNoLabel) throw DataError("placement plan is not an exact partition cover");
        owner[part] = w;
      }
    return owner;
  }
};

// Shuffles the partition ids, then cuts them into num_workers contiguous
// slices; the first p mod num_workers workers get one extra partition.
inline PlacementPlan plan_assignment(std::uint32_t p, std::uint32_t num_workers, std::uint64_t rng_seed) {
  if (num_workers < 1) throw UsageError("need at least one worker");
  if (p < num_workers)
    throw UsageError("cannot spread " + std::to_string(p) + " partitions over " + std::to_string(num_workers) +
                     " workers");
  std::vector<std::uint32_t> order(p);
  std::iota(order.begin(), order.end(), 0u);
  std::mt19937_64 rng(rng_seed);
  std::shuffle(order.begin(), order.end(), rng);
  PlacementPlan plan;
  plan.num_workers = num_workers;
  plan.assignment.resize(num_workers);
  const std::uint32_t base = p / num_workers, extra = p % num_workers;
  std::size_t at = 0;
  for (std::uint32_t w = 0; w < num_workers; ++w) {
    const std::size_t take = base + (w < extra ? 1 : 0);
    plan.assignment[w].assign(order.begin() + static_cast<std::ptrdiff_t>(at),
                              order.begin() + static_cast<std::ptrdiff_t>(at + take));
    at += take;
  }
  return plan;
}

// Degree per node from one streaming pass; self-loops excluded, both
// endpoints counted, multiplicity kept.
inline std::vector<Count> node_degrees(const EdgeFile& input) {
  std::vector<Count> deg(input.meta.num_nodes, 0);
  EdgeReader reader(input);
  std::vector<Edge> block;
  while (reader.read(block, 1 << 16) > 0) {
    for (const Edge& e : block) {
      if (e.is_self_loop()) continue;
      ++deg[e.src];
      ++deg[e.dst];
    }
    block.clear();
  }
  return deg;
}

// The `budget` highest-degree nodes, ties by ascending id; returned ascending.
inline std::vector<NodeId> select_replicated(const EdgeFile& input, Count budget) {
  if (budget > input.meta.num_nodes)
    throw UsageError("replication budget " + std::to_string(budget) + " exceeds node count");
  if (budget == 0) return {};
  const auto deg = node_degrees(input);
  std::vector<NodeId> ids(deg.size());
  std::iota(ids.begin(), ids.end(), NodeId{0});
  auto by_rank = [&](NodeId a, NodeId b) { return deg[a] != deg[b] ? deg[a] > deg[b] : a < b; };
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(budget), ids.end(), by_rank);
  ids.resize(budget);
  std::sort(ids.begin(), ids.end());
  return ids;
}

namespace detail {

inline std::vector<std::uint64_t> parse_id_list(std::string_view s, std::size_t line_no) {
  std::vector<std::uint64_t> out;
  s = trim(s);
  while (!s.empty()) {
    const auto comma = s.find(',');
    const auto tok = trim(s.substr(0, comma));
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size())
      throw DataError("malformed id list on plan line " + std::to_string(line_no));
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    s = s.substr(comma + 1);
  }
  return out;
}

template <class T>
void write_id_list(std::ostream& out, std::span<const T> ids) {
  for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? "," : "") << ids[i];
}

}  // namespace detail

inline void write_plan(std::ostream& out, const PlacementPlan& plan) {
  for (std::uint32_t w = 0; w < plan.assignment.size(); ++w) {
    out << w << ": ";
    detail::write_id_list<std::uint32_t>(out, plan.assignment[w]);
    out << '\n';
  }
  if (!plan.replicated_nodes.empty()) {
    out << "replicated: ";
    detail::write_id_list<NodeId>(out, plan.replicated_nodes);
    out << '\n';
  }
}

inline PlacementPlan read_plan(std::istream& in) {
  PlacementPlan plan;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = detail::trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto colon = s.find(':');
    if (colon == std::string_view::npos) throw DataError("missing ':' on plan line " + std::to_string(line_no));
    const auto key = detail::trim(s.substr(0, colon));
    auto ids = detail::parse_id_list(s.substr(colon + 1), line_no);
    if (key == "replicated") {
      plan.replicated_nodes.assign(ids.begin(), ids.end());
      std::sort(plan.replicated_nodes.begin(), plan.replicated_nodes.end());
      continue;
    }
    std::uint32_t w = 0;
    auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), w);
    if (ec != std::errc{} || ptr != key.data() + key.size() || w != plan.assignment.size())
      throw DataError("worker ids must be 0, 1, ... in order (plan line " + std::to_string(line_no) + ")");
    std::vector<std::uint32_t> parts;
    for (auto v : ids) {
      if (v >= kNoLabel) throw DataError("partition id out of range on plan line " + std::to_string(line_no));
      parts.push_back(static_cast<std::uint32_t>(v));
    }
    plan.assignment.push_back(std::move(parts));
  }
  plan.num_workers = static_cast<std::uint32_t>(plan.assignment.size());
  if (plan.num_workers == 0) throw DataError("plan lists no workers");
  plan.owner_of_parts();
  return plan;
}

struct WorkerTraffic {
  Count local = 0;
  Count remote = 0;
};

struct CommConfig {
  std::vector<Count> fanouts{30, 20, 10};
  Count num_seeds = 1000;
  std::uint64_t rng_seed = 0;
};

// Undirected adjacency with distinct neighbors per node, self-loops dropped.
struct Adjacency {
  std::vector<Count> offsets;
  std::vector<NodeId> nbrs;

  static Adjacency build(const EdgeFile& input) {
    const Count n = input.meta.num_nodes;
    auto edges = read_all_edges(input);
    std::vector<std::pair<NodeId, NodeId>> arcs;
    arcs.reserve(2 * edges.size());
    for (const Edge& e : edges) {
      if (e.is_self_loop()) continue;
      arcs.emplace_back(e.src, e.dst);
      arcs.emplace_back(e.dst, e.src);
    }
    std::vector<Edge>().swap(edges);
    std::sort(arcs.begin(), arcs.end());
    arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
    Adjacency a;
    a.offsets.assign(n + 1, 0);
    for (const auto& [u, v] : arcs) ++a.offsets[u + 1];
    std::partial_sum(a.offsets.begin(), a.offsets.end(), a.offsets.begin());
    a.nbrs.reserve(arcs.size());
    for (const auto& arc : arcs) a.nbrs.push_back(arc.second);
    return a;
  }

  std::span<const NodeId> of(NodeId u) const {
    return {nbrs.data() + offsets[u], static_cast<std::size_t>(offsets[u + 1] - offsets[u])};
  }
};

// Simulates multi-hop uniform neighbor sampling from uniformly drawn seed
// nodes. Every distinct node a seed's sample touches (the seed excluded) is
// one fetch, charged to the worker owning the seed's partition: local when
// that worker holds the node's partition or the node is replicated.
inline std::vector<WorkerTraffic> estimate_comm(const Adjacency& adj, std::span<const std::uint32_t> labels,
                                                const PlacementPlan& plan, const CommConfig& config) {
  const Count n = adj.offsets.empty() ? 0 : adj.offsets.size() - 1;
  if (n == 0 || adj.nbrs.empty()) throw DataError("cannot estimate traffic on an empty graph");
  if (labels.size() != n) throw DataError("labels do not cover the graph");
  const auto owner = plan.owner_of_parts();
  for (auto l : labels)
    if (l >= owner.size()) throw DataError("label " + std::to_string(l) + " is not covered by the plan");
  std::vector<bool> replicated(n, false);
  for (auto v : plan.replicated_nodes) {
    if (v >= n) throw DataError("replicated node out of range");
    replicated[v] = true;
  }

  std::vector<WorkerTraffic> out(plan.assignment.size());
  std::mt19937_64 rng(config.rng_seed);
  std::uniform_int_distribution<NodeId> pick_seed(0, n - 1);
  std::vector<NodeId> frontier, next, pool;
  std::unordered_set<NodeId> fetched;
  for (Count s = 0; s < config.num_seeds; ++s) {
    const NodeId seed = pick_seed(rng);
    const auto worker = owner[labels[seed]];
    fetched.clear();
    frontier.assign(1, seed);
    for (Count fanout : config.fanouts) {
      next.clear();
      for (NodeId u : frontier) {
        auto nb = adj.of(u);
        pool.assign(nb.begin(), nb.end());
        const std::size_t take = std::min<std::size_t>(fanout, pool.size());
        // Partial Fisher-Yates: first `take` entries become the sample.
        for (std::size_t i = 0; i < take; ++i) {
          std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
          std::swap(pool[i], pool[pick(rng)]);
          const NodeId v = pool[i];
          if (v != seed && fetched.insert(v).second) {
            next.push_back(v);
            if (replicated[v] || owner[labels[v]] == worker)
              ++out[worker].local;
            else
              ++out[worker].remote;
          }
        }
      }
      frontier.swap(next);
      if (frontier.empty()) break;
    }
  }
  return out;
}

inline std::vector<WorkerTraffic> estimate_comm(const EdgeFile& input, std::span<const std::uint32_t> labels,
                                                const PlacementPlan& plan, const CommConfig& config) {
  return estimate_comm(Adjacency::build(input), labels, plan, config);
}

inline void write_comm_csv(std::ostream& out, std::span<const WorkerTraffic> traffic) {
  out << "worker,local,remote\n";
  for (std::size_t w = 0; w < traffic.size(); ++w) out << w << ',' << traffic[w].local << ',' << traffic[w].remote << '\n';
}

}  // namespace grem
