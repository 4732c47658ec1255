#pragma once

#include <cstdint>
#include <vector>

#include "dmr/common.hpp"
#include "dmr/graph.hpp"

namespace dmr {

// Set of edge ids with O(1) insert, O(1) swap-remove and dense iteration.
// Positions are tracked in a plain vector indexed by edge id, so ids must be
// bounded by the backing capacity (grown on demand).
class EdgeIdSet {
 public:
  EdgeIdSet() = default;

  bool contains(EdgeId e) const {
    return e < pos_.size() && pos_[e] != UINT32_MAX;
  }
  size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const std::vector<EdgeId>& items() const { return items_; }

  bool insert(EdgeId e) {
    if (contains(e)) return false;
    if (e >= pos_.size()) pos_.resize(e + 1, UINT32_MAX);
    pos_[e] = static_cast<uint32_t>(items_.size());
    items_.push_back(e);
    return true;
  }

  bool erase(EdgeId e) {
    if (!contains(e)) return false;
    uint32_t p = pos_[e];
    EdgeId moved = items_.back();
    items_[p] = moved;
    items_.pop_back();
    pos_[moved] = p;
    pos_[e] = UINT32_MAX;
    return true;
  }

  void clear() {
    for (EdgeId e : items_) pos_[e] = UINT32_MAX;
    items_.clear();
  }

 private:
  std::vector<EdgeId> items_;
  std::vector<uint32_t> pos_;  // UINT32_MAX = absent
};

// Edge set that additionally answers "give me an edge incident to v" in O(1).
// Backs the F_i levels of the rounder, whose deletion rule removes one edge
// adjacent to each endpoint of an updated edge. Each member edge occupies one
// slot in each endpoint's list; slot 0 belongs to endpoints(e).first, slot 1
// to endpoints(e).second, so positions are unambiguous.
class IncidentEdgeSet {
 public:
  explicit IncidentEdgeSet(const DynGraph* g = nullptr) : g_(g) {
    if (g_) by_vertex_.assign(g_->vertex_count(), {});
  }

  void attach(const DynGraph* g) {
    g_ = g;
    by_vertex_.assign(g_->vertex_count(), {});
    set_.clear();
    slot_pos_.clear();
  }

  bool contains(EdgeId e) const { return set_.contains(e); }
  size_t size() const { return set_.size(); }
  bool empty() const { return set_.empty(); }
  const std::vector<EdgeId>& items() const { return set_.items(); }

  void insert(EdgeId e) {
    if (!set_.insert(e)) return;
    if (slot_pos_.size() < (static_cast<size_t>(e) + 1) * 2)
      slot_pos_.resize((static_cast<size_t>(e) + 1) * 2, UINT32_MAX);
    auto [u, v] = g_->endpoints(e);
    slot_pos_[2 * static_cast<size_t>(e)] =
        static_cast<uint32_t>(by_vertex_[u].size());
    by_vertex_[u].push_back(e);
    slot_pos_[2 * static_cast<size_t>(e) + 1] =
        static_cast<uint32_t>(by_vertex_[v].size());
    by_vertex_[v].push_back(e);
  }

  bool erase(EdgeId e) {
    if (!set_.contains(e)) return false;
    auto [u, v] = g_->endpoints(e);
    remove_from_list(u, e, 0);
    remove_from_list(v, e, 1);
    set_.erase(e);
    return true;
  }

  // Current head of v's incidence list, or kNoEdge.
  EdgeId any_incident(VertexId v) const {
    if (v >= by_vertex_.size() || by_vertex_[v].empty()) return kNoEdge;
    return by_vertex_[v].front();
  }

  void clear() {
    for (auto& lst : by_vertex_) lst.clear();
    set_.clear();
  }

 private:
  int slot_of(VertexId v, EdgeId e) const {
    return g_->endpoints(e).first == v ? 0 : 1;
  }
  void remove_from_list(VertexId v, EdgeId e, int slot) {
    auto& lst = by_vertex_[v];
    uint32_t p = slot_pos_[2 * static_cast<size_t>(e) + slot];
    EdgeId moved = lst.back();
    lst[p] = moved;
    lst.pop_back();
    if (p < lst.size())
      slot_pos_[2 * static_cast<size_t>(moved) + slot_of(v, moved)] = p;
  }

  const DynGraph* g_;
  EdgeIdSet set_;
  std::vector<std::vector<EdgeId>> by_vertex_;
  std::vector<uint32_t> slot_pos_;
};

}  // namespace dmr
