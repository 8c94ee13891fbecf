#pragma once

// Analytical edge-cut model for one-shot greedy assignment from a chunk.
//
// A node with k neighbors, k0 of them on its majority side, sees a
// hypergeometric sample of d = round(x * k) of them when the chunk holds a
// fraction x of all edges. It is placed correctly when the sample majority
// agrees with the full-information majority. Refinement across m chunks acts
// like one chunk of fraction m * x; m = 2 is the analysed case, other values
// are a heuristic extension.

#include <cmath>
#include <charconv>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "grem/edge_stream.hpp"
#include "grem/error.hpp"
#include "grem/types.hpp"

namespace grem {

// How a sampled tie k0' = k1' is scored. half_credit treats it as a fair
// coin; favor_correct counts it as a correct placement.
enum class TiePolicy { half_credit, favor_correct };

struct HypergeomValue {
  double pmf = 0.0;
  double cdf = 0.0;
};

namespace detail {

inline double log_choose(Count n, Count r) noexcept {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(r) + 1.0) -
         std::lgamma(static_cast<double>(n - r) + 1.0);
}

// Pr(X = i) for X ~ Hypergeometric(population k, successes k0, draws d).
inline double hypergeom_pmf(Count k, Count k0, Count d, Count i) noexcept {
  const Count lo = d > k - k0 ? d - (k - k0) : 0;
  const Count hi = std::min(d, k0);
  if (i < lo || i > hi) return 0.0;
  return std::exp(log_choose(k0, i) + log_choose(k - k0, d - i) - log_choose(k, d));
}

inline double hypergeom_cdf(Count k, Count k0, Count d, Count t) noexcept {
  const Count lo = d > k - k0 ? d - (k - k0) : 0;
  const Count hi = std::min(d, k0);
  if (t < lo) return 0.0;
  if (t >= hi) return 1.0;
  // Sum the shorter tail.
  double s = 0.0;
  if (t - lo <= hi - t) {
    for (Count i = lo; i <= t; ++i) s += hypergeom_pmf(k, k0, d, i);
    return std::min(s, 1.0);
  }
  for (Count i = t + 1; i <= hi; ++i) s += hypergeom_pmf(k, k0, d, i);
  return std::max(0.0, 1.0 - s);
}

}  // namespace detail

inline HypergeomValue hypergeom_pmf_cdf(Count k, Count k0, Count d, Count t) {
  if (k0 > k || d > k || t > d)
    throw UsageError("hypergeometric parameters out of domain: k=" + std::to_string(k) + " k0=" + std::to_string(k0) +
                     " d=" + std::to_string(d) + " t=" + std::to_string(t));
  return {detail::hypergeom_pmf(k, k0, d, t), detail::hypergeom_cdf(k, k0, d, t)};
}

// Number of sampled neighbors for a chunk fraction x and multiplier m.
inline Count effective_draws(Count k, double x, double multiplier) noexcept {
  const double x_eff = std::min(multiplier * x, 1.0);
  const auto d = static_cast<Count>(std::llround(x_eff * static_cast<double>(k)));
  return std::clamp<Count>(d, 1, k);
}

// Probability that the sampled majority matches the full majority.
inline double prob_correct(Count k, Count k0, double x, double multiplier = 1.0,
                           TiePolicy ties = TiePolicy::half_credit) {
  if (k < 1) throw UsageError("prob_correct needs k >= 1");
  if (k0 > k || 2 * k0 < k) throw UsageError("k0 must be the majority side count (k/2 <= k0 <= k)");
  if (!(x > 0.0 && x <= 1.0)) throw UsageError("chunk fraction must be in (0, 1]");
  if (!(multiplier >= 1.0)) throw UsageError("multiplier must be >= 1");
  // An even split is a fair coin whatever the sample.
  if (ties == TiePolicy::half_credit && 2 * k0 == k) return 0.5;
  Count d = effective_draws(k, x, multiplier);
  // Dropping one of 2j draws at random leaves a uniform sample of 2j - 1, so
  // a coin-flip tie at even d scores exactly like the odd draw d - 1.
  if (ties == TiePolicy::half_credit && d % 2 == 0) --d;
  // Pr(k0' < d / 2) = Pr(k0' <= ceil(d / 2) - 1)
  const double below = detail::hypergeom_cdf(k, k0, d, (d - 1) / 2);
  return std::clamp(1.0 - below, 0.0, 1.0);
}

// One streaming pass: per node, degree k (self-loops excluded, multiplicity
// kept) and k0 = neighbors on the side holding more of them.
inline NodeStats compute_node_stats(const EdgeFile& input, std::span<const std::uint32_t> labels) {
  const Count n = input.meta.num_nodes;
  if (labels.size() != n) throw DataError("labels do not cover the graph");
  for (auto l : labels)
    if (l > 1) throw DataError("reference labels must be a bisection (0/1)");
  std::vector<std::array<Count, 2>> per_side(n, {0, 0});
  EdgeReader reader(input);
  std::vector<Edge> block;
  while (reader.read(block, 1 << 16) > 0) {
    for (const Edge& e : block) {
      if (e.is_self_loop()) continue;
      ++per_side[e.src][labels[e.dst]];
      ++per_side[e.dst][labels[e.src]];
    }
    block.clear();
  }
  NodeStats s;
  s.k.resize(n);
  s.k0.resize(n);
  for (Count v = 0; v < n; ++v) {
    s.k[v] = per_side[v][0] + per_side[v][1];
    s.k0[v] = std::max(per_side[v][0], per_side[v][1]);
  }
  return s;
}

struct TheoryCurvePoint {
  double x = 1.0;
  double multiplier = 1.0;
  double expected_cuts = 0.0;
  double expected_cut_fraction = 0.0;
};

// Expected per-endpoint cut count: a correctly placed node cuts k - k0 edges,
// a misplaced one k0. Each cut edge is counted at both endpoints, so the
// fraction normalises by the degree sum 2|E|.
inline TheoryCurvePoint expected_cuts(const NodeStats& stats, double x, double multiplier = 1.0,
                                      TiePolicy ties = TiePolicy::half_credit) {
  if (stats.size() == 0) throw UsageError("node stats are empty");
  if (!(x > 0.0 && x <= 1.0)) throw UsageError("chunk fraction must be in (0, 1]");
  if (!(multiplier >= 1.0)) throw UsageError("multiplier must be >= 1");
  std::map<std::pair<Count, Count>, Count> groups;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (stats.k0[i] > stats.k[i] || 2 * stats.k0[i] < stats.k[i]) throw DataError("inconsistent node stats");
    if (stats.k[i] > 0) ++groups[{stats.k[i], stats.k0[i]}];
  }
  TheoryCurvePoint pt{x, multiplier, 0.0, 0.0};
  for (const auto& [kk, count] : groups) {
    const auto [k, k0] = kk;
    const double p = prob_correct(k, k0, x, multiplier, ties);
    // (k - k0) p + k0 (1 - p), arranged to be monotone in p under rounding
    const double term = static_cast<double>(k0) - p * static_cast<double>(2 * k0 - k);
    pt.expected_cuts += static_cast<double>(count) * term;
  }
  const Count degree_sum = stats.total_degree();
  pt.expected_cut_fraction = degree_sum ? pt.expected_cuts / static_cast<double>(degree_sum) : 0.0;
  return pt;
}

inline std::vector<TheoryCurvePoint> theory_curve(const NodeStats& stats, std::span<const double> xs,
                                                  double multiplier = 1.0, TiePolicy ties = TiePolicy::half_credit) {
  std::vector<TheoryCurvePoint> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(expected_cuts(stats, x, multiplier, ties));
  return out;
}

inline std::string format_real(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline void write_theory_csv(std::ostream& out, std::span<const TheoryCurvePoint> points, bool header = true) {
  if (header) out << "x,expected_cuts,expected_cut_fraction,multiplier\n";
  for (const auto& p : points)
    out << format_real(p.x) << ',' << format_real(p.expected_cuts) << ',' << format_real(p.expected_cut_fraction)
        << ',' << format_real(p.multiplier) << '\n';
}

}  // namespace grem
