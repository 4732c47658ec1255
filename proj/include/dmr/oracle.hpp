#pragma once

#include <algorithm>
#include <vector>

#include "dmr/common.hpp"
#include "dmr/graph.hpp"
#include "dmr/matching.hpp"

namespace dmr {

namespace detail {

// Augmenting-path search (Kuhn) over an edge-id subset of a bipartite graph.
class BipartiteMatcher {
 public:
  BipartiteMatcher(const DynGraph& g, const std::vector<EdgeId>& edges)
      : g_(g), mate_(g.vertex_count(), kNoEdge) {
    adj_.assign(g.vertex_count(), {});
    left_.clear();
    std::vector<uint8_t> is_left(g.vertex_count(), 0);
    for (EdgeId e : edges) {
      auto [u, v] = g.endpoints(e);
      VertexId l = u, r = v;
      if (g.bipartite_declared()) {
        if (g.side(u) != Side::left) std::swap(l, r);
      }
      adj_[l].push_back(e);
      if (!is_left[l]) {
        is_left[l] = 1;
        left_.push_back(l);
      }
    }
  }

  size_t solve() {
    size_t matched = 0;
    for (VertexId s : left_) {
      visited_.assign(g_.vertex_count(), 0);
      if (try_augment(s)) ++matched;
    }
    return matched;
  }

  std::vector<EdgeId> matching_edges() const {
    std::vector<EdgeId> out;
    for (VertexId v = 0; v < g_.vertex_count(); ++v) {
      EdgeId e = mate_[v];
      if (e == kNoEdge) continue;
      auto [u, w] = g_.endpoints(e);
      if (v == std::min(u, w)) out.push_back(e);
    }
    return out;
  }

 private:
  bool try_augment(VertexId u) {
    for (EdgeId e : adj_[u]) {
      VertexId v = g_.other_endpoint(e, u);
      if (visited_[v]) continue;
      visited_[v] = 1;
      if (mate_[v] == kNoEdge ||
          try_augment(g_.other_endpoint(mate_[v], v))) {
        mate_[v] = e;
        mate_[u] = e;
        return true;
      }
    }
    return false;
  }

  const DynGraph& g_;
  std::vector<std::vector<EdgeId>> adj_;
  std::vector<VertexId> left_;
  std::vector<EdgeId> mate_;
  std::vector<uint8_t> visited_;
};

// Branch-and-bound maximum matching used for small general graphs. Picks the
// lowest live vertex with an incident edge and branches on leaving it
// unmatched or matching each incident edge.
inline size_t exhaustive_max_matching(const DynGraph& g,
                                      const std::vector<EdgeId>& edges,
                                      std::vector<uint8_t>& used_vertex,
                                      std::vector<EdgeId>* best_edges,
                                      std::vector<EdgeId>& current,
                                      size_t start) {
  // Find first edge with both endpoints free, scanning from `start`.
  size_t pick = edges.size();
  for (size_t i = start; i < edges.size(); ++i) {
    auto [u, v] = g.endpoints(edges[i]);
    if (!used_vertex[u] && !used_vertex[v]) {
      pick = i;
      break;
    }
  }
  if (pick == edges.size()) {
    if (best_edges && current.size() > best_edges->size())
      *best_edges = current;
    return 0;
  }
  auto [u, v] = g.endpoints(edges[pick]);
  // Branch 1: take the edge.
  used_vertex[u] = used_vertex[v] = 1;
  current.push_back(edges[pick]);
  size_t with = 1 + exhaustive_max_matching(g, edges, used_vertex, best_edges,
                                            current, pick + 1);
  current.pop_back();
  used_vertex[u] = used_vertex[v] = 0;
  // Branch 2: skip it.
  size_t without = exhaustive_max_matching(g, edges, used_vertex, best_edges,
                                           current, pick + 1);
  return std::max(with, without);
}

}  // namespace detail

inline constexpr size_t kGeneralOracleEdgeLimit = 24;

// Maximum-cardinality matching. Bipartite graphs use augmenting-path search;
// general graphs fall back to exhaustive search and are limited to
// kGeneralOracleEdgeLimit edges (verification oracle, desk scale only).
inline Matching max_matching_oracle(const DynGraph& g) {
  std::vector<EdgeId> edges = g.edge_ids();
  Matching m(&g);
  if (g.bipartite_declared()) {
    detail::BipartiteMatcher matcher(g, edges);
    matcher.solve();
    for (EdgeId e : matcher.matching_edges()) m.add(e);
    return m;
  }
  if (edges.size() > kGeneralOracleEdgeLimit)
    throw CapabilityError(
        "general-graph exact matching limited to " +
        std::to_string(kGeneralOracleEdgeLimit) +
        " edges; declare the graph bipartite for augmenting-path search");
  std::vector<uint8_t> used(g.vertex_count(), 0);
  std::vector<EdgeId> best, current;
  detail::exhaustive_max_matching(g, edges, used, &best, current, 0);
  for (EdgeId e : best) m.add(e);
  return m;
}

inline size_t mu(const DynGraph& g) { return max_matching_oracle(g).size(); }

// Maximum matching restricted to an edge subset of g (same capability rules).
inline std::vector<EdgeId> max_matching_subset(const DynGraph& g,
                                               const std::vector<EdgeId>& edges) {
  if (g.bipartite_declared()) {
    detail::BipartiteMatcher matcher(g, edges);
    matcher.solve();
    return matcher.matching_edges();
  }
  if (edges.size() > kGeneralOracleEdgeLimit)
    throw CapabilityError("general-graph subset matching limited to " +
                          std::to_string(kGeneralOracleEdgeLimit) + " edges");
  std::vector<uint8_t> used(g.vertex_count(), 0);
  std::vector<EdgeId> best, current;
  detail::exhaustive_max_matching(g, edges, used, &best, current, 0);
  return best;
}

// Greedy maximal matching over an edge list, in list order.
inline std::vector<EdgeId> greedy_maximal_matching(
    const DynGraph& g, const std::vector<EdgeId>& edges) {
  std::vector<uint8_t> used(g.vertex_count(), 0);
  std::vector<EdgeId> out;
  for (EdgeId e : edges) {
    auto [u, v] = g.endpoints(e);
    if (used[u] || used[v]) continue;
    used[u] = used[v] = 1;
    out.push_back(e);
  }
  return out;
}

}  // namespace dmr
