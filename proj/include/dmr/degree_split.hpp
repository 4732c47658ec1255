#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "dmr/common.hpp"
#include "dmr/graph.hpp"

namespace dmr {

// Multigraph edge list with multiplicity at most two: each entry is an edge id
// plus a copy index. Built from one or two simple edge sets (the E_i (+) F_i
// multisets of the rounder).
struct MultiEdgeSet {
  std::vector<EdgeId> edges;        // one entry per copy
  std::vector<uint8_t> copy_index;  // 0 or 1, parallel to edges

  void add(EdgeId e, uint8_t copy) {
    edges.push_back(e);
    copy_index.push_back(copy);
  }
  size_t size() const { return edges.size(); }
};

inline MultiEdgeSet make_multiset(const std::vector<EdgeId>& a,
                                  const std::vector<EdgeId>& b) {
  MultiEdgeSet h;
  h.edges.reserve(a.size() + b.size());
  for (EdgeId e : a) h.add(e, 0);
  for (EdgeId e : b) h.add(e, 1);
  return h;
}

struct DegreeSplitResult {
  std::vector<EdgeId> first;   // E1, |E1| = ceil(|E|/2)
  std::vector<EdgeId> second;  // E2, |E2| = floor(|E|/2)
  uint64_t operations = 0;     // instrumentation for the linearity check
};

// Partitions a multigraph (multiplicity <= 2) into two simple edge sets that
// halve the size exactly and nearly halve every degree:
//   P1: |E1| = ceil(|E|/2), |E2| = floor(|E|/2)
//   P2: d_i(v) in [d(v)/2 - 1, d(v)/2 + 1]
//   P3: d_i(v) in [floor(d(v)/2), ceil(d(v)/2)] when the graph is bipartite.
// Parallel pairs contribute one copy to each side; the simple remainder is
// decomposed into maximal walks (extended greedily in both directions from the
// lowest-numbered vertex with remaining degree), whose odd-indexed edges go to
// the currently smaller output (ties favor E1) and even-indexed to the other.
inline DegreeSplitResult degree_split(const DynGraph& g, const MultiEdgeSet& h) {
  DegreeSplitResult res;
  size_t m = h.size();
  if (m == 0) return res;

  // Count multiplicities; reject > 2.
  std::vector<EdgeId> order(h.edges);
  std::sort(order.begin(), order.end());
  std::vector<EdgeId> pairs, singles;
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j < order.size() && order[j] == order[i]) ++j;
    size_t mult = j - i;
    if (mult > 2)
      throw InputError("edge multiplicity above two: id " +
                       std::to_string(order[i]));
    (mult == 2 ? pairs : singles).push_back(order[i]);
    i = j;
  }
  res.operations += m;

  // Parallel pairs: one copy to each output.
  for (EdgeId e : pairs) {
    res.first.push_back(e);
    res.second.push_back(e);
  }

  // Simple remainder: per-vertex incidence with a cursor that skips consumed
  // edges, giving O(|E|) total walk extraction.
  std::vector<VertexId> touched;
  std::vector<std::vector<std::pair<EdgeId, VertexId>>> inc(g.vertex_count());
  for (EdgeId e : singles) {
    auto [u, v] = g.endpoints(e);
    if (inc[u].empty()) touched.push_back(u);
    if (inc[v].empty()) touched.push_back(v);
    inc[u].push_back({e, v});
    inc[v].push_back({e, u});
  }
  std::sort(touched.begin(), touched.end());
  std::vector<uint32_t> cursor(g.vertex_count(), 0);
  std::vector<uint8_t> consumed;  // indexed by position in `singles`
  std::vector<uint32_t> single_pos;
  {
    EdgeId max_id = 0;
    for (EdgeId e : singles) max_id = std::max(max_id, e);
    single_pos.assign(static_cast<size_t>(max_id) + 1, UINT32_MAX);
    consumed.assign(singles.size(), 0);
    for (uint32_t i = 0; i < singles.size(); ++i) single_pos[singles[i]] = i;
  }

  auto next_free = [&](VertexId v) -> std::pair<EdgeId, VertexId> {
    auto& lst = inc[v];
    uint32_t& c = cursor[v];
    while (c < lst.size() && consumed[single_pos[lst[c].first]]) {
      ++c;
      ++res.operations;
    }
    if (c >= lst.size()) return {kNoEdge, kNoVertex};
    return lst[c];
  };

  std::vector<EdgeId> walk;
  for (VertexId start : touched) {
    while (next_free(start).first != kNoEdge) {
      walk.clear();
      // Forward extension from `start`.
      VertexId tail = start;
      for (;;) {
        auto [e, w] = next_free(tail);
        if (e == kNoEdge) break;
        consumed[single_pos[e]] = 1;
        walk.push_back(e);
        tail = w;
        ++res.operations;
      }
      // Backward extension from `start` (prepend), making the walk maximal at
      // both extremes.
      VertexId head = start;
      std::vector<EdgeId> prefix;
      for (;;) {
        auto [e, w] = next_free(head);
        if (e == kNoEdge) break;
        consumed[single_pos[e]] = 1;
        prefix.push_back(e);
        head = w;
        ++res.operations;
      }
      if (!prefix.empty()) {
        std::reverse(prefix.begin(), prefix.end());
        prefix.insert(prefix.end(), walk.begin(), walk.end());
        walk.swap(prefix);
      }
      // Assign by final index parity: odd (1st, 3rd, ...) to the smaller set.
      bool odd_to_first = res.first.size() <= res.second.size();
      auto& odd_side = odd_to_first ? res.first : res.second;
      auto& even_side = odd_to_first ? res.second : res.first;
      for (size_t i = 0; i < walk.size(); ++i) {
        if (i % 2 == 0)
          odd_side.push_back(walk[i]);
        else
          even_side.push_back(walk[i]);
      }
    }
  }

  // The smaller-side rule keeps |E1| >= |E2| >= |E1| - 1 throughout, so P1
  // holds exactly here; tests assert it rather than patching it up.
  return res;
}

}  // namespace dmr
