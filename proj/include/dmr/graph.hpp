#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "dmr/common.hpp"

namespace dmr {

enum class Side : uint8_t { none = 0, left = 1, right = 2 };

// Undirected simple graph with stable edge identifiers and O(1) amortized
// adjacency insert / remove-by-identifier. Vertices are fixed at construction;
// edges may come and go. Identifiers are never reused.
class DynGraph {
 public:
  explicit DynGraph(VertexId n, bool bipartite_declared = false)
      : n_(n), adj_(n), bipartite_declared_(bipartite_declared) {
    if (bipartite_declared) side_.assign(n, Side::none);
  }

  VertexId vertex_count() const { return n_; }
  bool bipartite_declared() const { return bipartite_declared_; }

  void set_side(VertexId v, Side s) {
    if (!bipartite_declared_) throw InputError("graph not declared bipartite");
    check_vertex(v);
    side_[v] = s;
  }
  Side side(VertexId v) const {
    return bipartite_declared_ ? side_[v] : Side::none;
  }

  EdgeId add_edge(VertexId u, VertexId v) {
    check_vertex(u);
    check_vertex(v);
    if (u == v) throw InputError("self-loop rejected: " + std::to_string(u));
    uint64_t key = pair_key(u, v);
    if (auto it = by_pair_.find(key); it != by_pair_.end())
      throw InputError("duplicate edge (" + std::to_string(u) + "," +
                       std::to_string(v) + ")");
    if (bipartite_declared_) {
      if (side_[u] == Side::none || side_[v] == Side::none ||
          side_[u] == side_[v])
        throw InputError("edge (" + std::to_string(u) + "," +
                         std::to_string(v) + ") does not cross bipartition");
    }
    EdgeId id = static_cast<EdgeId>(edges_.size());
    EdgeRec rec;
    rec.u = u;
    rec.v = v;
    rec.alive = true;
    rec.pos_u = static_cast<uint32_t>(adj_[u].size());
    rec.pos_v = static_cast<uint32_t>(adj_[v].size());
    adj_[u].push_back(id);
    adj_[v].push_back(id);
    edges_.push_back(rec);
    by_pair_.emplace(key, id);
    ++alive_count_;
    return id;
  }

  void remove_edge(EdgeId e) {
    EdgeRec& rec = rec_mut(e);
    detach(rec.u, e);
    detach(rec.v, e);
    by_pair_.erase(pair_key(rec.u, rec.v));
    rec.alive = false;
    --alive_count_;
  }

  bool alive(EdgeId e) const {
    return e < edges_.size() && edges_[e].alive;
  }
  std::pair<VertexId, VertexId> endpoints(EdgeId e) const {
    const EdgeRec& rec = rec_const(e);
    return {rec.u, rec.v};
  }
  VertexId other_endpoint(EdgeId e, VertexId v) const {
    const EdgeRec& rec = rec_const(e);
    return rec.u == v ? rec.v : rec.u;
  }
  EdgeId find_edge(VertexId u, VertexId v) const {
    auto it = by_pair_.find(pair_key(u, v));
    return it == by_pair_.end() ? kNoEdge : it->second;
  }
  const std::vector<EdgeId>& incident(VertexId v) const {
    check_vertex(v);
    return adj_[v];
  }
  size_t edge_count() const { return alive_count_; }
  // Upper bound on ever-issued ids; for sizing id-indexed arrays.
  size_t edge_capacity() const { return edges_.size(); }

  std::vector<EdgeId> edge_ids() const {
    std::vector<EdgeId> out;
    out.reserve(alive_count_);
    for (EdgeId e = 0; e < edges_.size(); ++e)
      if (edges_[e].alive) out.push_back(e);
    return out;
  }

  // 2-colors the graph by BFS; used when loading "bipartite" text inputs with
  // no explicit sides. Throws if an odd cycle exists.
  void infer_sides() {
    if (!bipartite_declared_) throw InputError("graph not declared bipartite");
    std::vector<int> color(n_, -1);
    for (VertexId s = 0; s < n_; ++s) {
      if (color[s] != -1) continue;
      color[s] = 0;
      std::queue<VertexId> q;
      q.push(s);
      while (!q.empty()) {
        VertexId v = q.front();
        q.pop();
        for (EdgeId e : adj_[v]) {
          VertexId w = other_endpoint(e, v);
          if (color[w] == -1) {
            color[w] = color[v] ^ 1;
            q.push(w);
          } else if (color[w] == color[v]) {
            throw InputError("graph declared bipartite has an odd cycle");
          }
        }
      }
    }
    for (VertexId v = 0; v < n_; ++v)
      side_[v] = color[v] == 0 ? Side::left : Side::right;
  }

 private:
  struct EdgeRec {
    VertexId u, v;
    bool alive;
    uint32_t pos_u, pos_v;  // positions inside adj_[u] / adj_[v]
  };

  void check_vertex(VertexId v) const {
    if (v >= n_) throw StructuralError("vertex out of range: " + std::to_string(v));
  }
  const EdgeRec& rec_const(EdgeId e) const {
    if (e >= edges_.size() || !edges_[e].alive)
      throw StructuralError("edge id not alive: " + std::to_string(e));
    return edges_[e];
  }
  EdgeRec& rec_mut(EdgeId e) {
    return const_cast<EdgeRec&>(rec_const(e));
  }
  static uint64_t pair_key(VertexId u, VertexId v) {
    if (u > v) std::swap(u, v);
    return (static_cast<uint64_t>(u) << 32) | v;
  }
  // Swap-remove from the adjacency list, patching the moved edge's position.
  void detach(VertexId v, EdgeId e) {
    uint32_t pos = edges_[e].u == v ? edges_[e].pos_u : edges_[e].pos_v;
    auto& list = adj_[v];
    EdgeId moved = list.back();
    list[pos] = moved;
    list.pop_back();
    if (pos < list.size()) {
      if (edges_[moved].u == v)
        edges_[moved].pos_u = pos;
      else
        edges_[moved].pos_v = pos;
    }
  }

  VertexId n_;
  std::vector<EdgeRec> edges_;
  std::vector<std::vector<EdgeId>> adj_;
  std::unordered_map<uint64_t, EdgeId> by_pair_;
  std::vector<Side> side_;
  bool bipartite_declared_;
  size_t alive_count_ = 0;
};

}  // namespace dmr
