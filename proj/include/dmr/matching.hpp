#pragma once

#include <string>
#include <vector>

#include "dmr/common.hpp"
#include "dmr/edge_set.hpp"
#include "dmr/fixed.hpp"
#include "dmr/frac_vector.hpp"
#include "dmr/graph.hpp"

namespace dmr {

// Integral matching: edge set with a per-vertex matched-edge index.
class Matching {
 public:
  explicit Matching(const DynGraph* g)
      : g_(g), mate_edge_(g->vertex_count(), kNoEdge) {}

  size_t size() const { return edges_.size(); }
  const std::vector<EdgeId>& edges() const { return edges_.items(); }
  bool contains(EdgeId e) const { return edges_.contains(e); }
  EdgeId matched_edge(VertexId v) const { return mate_edge_[v]; }
  bool covered(VertexId v) const { return mate_edge_[v] != kNoEdge; }
  VertexId mate(VertexId v) const {
    EdgeId e = mate_edge_[v];
    return e == kNoEdge ? kNoVertex : g_->other_endpoint(e, v);
  }

  void add(EdgeId e) {
    auto [u, v] = g_->endpoints(e);
    if (covered(u) || covered(v))
      throw InputError("matching add would share a vertex: edge " +
                       std::to_string(e));
    edges_.insert(e);
    mate_edge_[u] = e;
    mate_edge_[v] = e;
  }

  void remove(EdgeId e) {
    if (!edges_.erase(e)) return;
    auto [u, v] = g_->endpoints(e);
    mate_edge_[u] = kNoEdge;
    mate_edge_[v] = kNoEdge;
  }

 private:
  const DynGraph* g_;
  EdgeIdSet edges_;
  std::vector<EdgeId> mate_edge_;
};

// Checks that a plain edge set is vertex-disjoint.
inline bool is_matching(const DynGraph& g, const std::vector<EdgeId>& edges) {
  std::vector<uint8_t> seen(g.vertex_count(), 0);
  for (EdgeId e : edges) {
    auto [u, v] = g.endpoints(e);
    if (seen[u] || seen[v]) return false;
    seen[u] = seen[v] = 1;
  }
  return true;
}

struct VertexViolation {
  VertexId v;
  Wide excess;  // x(v) - 1 in 2^-52 units
};

struct ValidationReport {
  bool valid = true;
  std::vector<VertexViolation> overloaded;   // vertices with x(v) > 1
  std::vector<EdgeId> structural;            // support edges absent from G
  std::vector<EdgeId> edge_violations;       // per-edge rule failures
  std::string detail;
};

// Reports every vertex with x(v) > 1 with its exact excess; empty report iff
// x is a fractional matching on G. Support edges missing from G are a
// structural error.
inline ValidationReport validate_fractional(const FracVector& x,
                                            const DynGraph& g) {
  ValidationReport rep;
  for (const auto& [e, w] : x.entries()) {
    if (!g.alive(e)) {
      rep.valid = false;
      rep.structural.push_back(e);
    }
  }
  if (!rep.structural.empty()) {
    rep.detail = "support edge absent from graph";
    return rep;
  }
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    Wide load = x.load(v);
    if (load > kOneRaw) {
      rep.valid = false;
      rep.overloaded.push_back({v, load - kOneRaw});
    }
  }
  return rep;
}

}  // namespace dmr
