#pragma once

// Step-by-step interpreter of the streaming bisection, written directly from
// the pseudo-code and sharing no code with the library beyond plain types.
// Neighbor counts use the double loop over chunk edges.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "grem/types.hpp"

namespace grem::testing {

struct ReferenceResult {
  std::vector<int> parts;
  std::vector<std::array<float, 2>> nbr_counts;
  std::array<std::uint64_t, 2> sizes{0, 0};
  // sizes observed after seeding and after every chunk
  std::vector<std::array<std::uint64_t, 2>> checkpoints;
};

// Seed labels for the first chunk, keyed by node id.
using ReferenceSeed = std::function<std::map<std::uint64_t, int>(const std::vector<std::uint64_t>& chunk_nodes)>;

inline std::array<float, 2> reference_cnt_nbrs(std::uint64_t n, const std::vector<Edge>& edges,
                                               const std::vector<int>& parts) {
  std::array<float, 2> local{0.0f, 0.0f};
  for (const Edge& e : edges) {
    if (e.src == e.dst) continue;
    std::uint64_t nbr;
    if (e.src == n)
      nbr = e.dst;
    else if (e.dst == n)
      nbr = e.src;
    else
      continue;
    if (parts[nbr] != -1) local[parts[nbr]] += 1.0f;
  }
  return local;
}

inline int reference_assign(float nbrs0, float nbrs1, const std::array<std::uint64_t, 2>& sizes, std::uint64_t cap) {
  if (nbrs0 < nbrs1 && sizes[1] < cap) return 1;
  if (nbrs1 < nbrs0 && sizes[0] < cap) return 0;
  return sizes[0] <= sizes[1] ? 0 : 1;
}

inline ReferenceResult reference_grem(const std::vector<Edge>& all_edges, std::uint64_t num_nodes,
                                      std::uint64_t chunk_size, std::uint64_t cap, bool refine, unsigned passes,
                                      const ReferenceSeed& seed) {
  ReferenceResult r;
  r.parts.assign(num_nodes, -1);
  r.nbr_counts.assign(num_nodes, {0.0f, 0.0f});
  std::vector<std::vector<Edge>> chunks;
  for (std::size_t at = 0; at < all_edges.size(); at += chunk_size)
    chunks.emplace_back(all_edges.begin() + static_cast<std::ptrdiff_t>(at),
                        all_edges.begin() + static_cast<std::ptrdiff_t>(std::min(at + chunk_size, all_edges.size())));

  auto nodes_of = [](const std::vector<Edge>& edges) {
    std::set<std::uint64_t> s;
    for (const Edge& e : edges) {
      s.insert(e.src);
      s.insert(e.dst);
    }
    return std::vector<std::uint64_t>(s.begin(), s.end());
  };

  for (unsigned pass = 0; pass < passes; ++pass) {
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      const auto& edges = chunks[c];
      const auto nodes = nodes_of(edges);
      if (pass == 0 && c == 0) {
        const auto labels = seed(nodes);
        for (auto n : nodes) r.parts[n] = labels.at(n);
        r.sizes = {0, 0};
        for (int p : r.parts)
          if (p != -1) ++r.sizes[p];
        for (auto n : nodes) r.nbr_counts[n] = reference_cnt_nbrs(n, edges, r.parts);
      } else {
        for (auto n : nodes) {
          const int old = r.parts[n];
          if (!refine && old != -1) continue;
          auto counts = reference_cnt_nbrs(n, edges, r.parts);
          if (old != -1) {
            counts[0] = (r.nbr_counts[n][0] + counts[0]) / 2.0f;
            counts[1] = (r.nbr_counts[n][1] + counts[1]) / 2.0f;
          }
          int next;
          if (r.sizes[0] >= cap && r.sizes[1] >= cap) {
            if (old == -1) throw std::logic_error("reference: no room for a new node");
            next = old;
          } else {
            next = reference_assign(counts[0], counts[1], r.sizes, cap);
          }
          r.parts[n] = next;
          ++r.sizes[next];
          if (old != -1) --r.sizes[old];
          r.nbr_counts[n] = counts;
        }
      }
      r.checkpoints.push_back(r.sizes);
    }
  }
  for (std::uint64_t n = 0; n < num_nodes; ++n) {
    if (r.parts[n] != -1) continue;
    const int side = r.sizes[1] < r.sizes[0] ? 1 : 0;
    r.parts[n] = side;
    ++r.sizes[side];
  }
  r.checkpoints.push_back(r.sizes);
  return r;
}

}  // namespace grem::testing
