#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "dmr/common.hpp"
#include "dmr/edge_set.hpp"
#include "dmr/fixed.hpp"
#include "dmr/graph.hpp"

namespace dmr {

// Sparse nonnegative edge-weight vector over a graph's edge ids. Caches the
// norm ||x||, the per-vertex loads x(v) and the per-bit supports supp_i(x),
// all maintained exactly under mutation (fixed point, no drift). Zero entries
// are absent. "Fractional matching" (x(v) <= 1 everywhere) is a checkable
// predicate, not an invariant; arbitrary nonnegative vectors are allowed.
class FracVector {
 public:
  explicit FracVector(const DynGraph* g)
      : g_(g), loads_(g->vertex_count(), 0) {}

  const DynGraph& graph() const { return *g_; }

  Fp get(EdgeId e) const {
    auto it = weights_.find(e);
    return it == weights_.end() ? Fp::zero() : it->second;
  }

  // Sets x_e <- w, updating norm, loads and bit supports.
  void set(EdgeId e, Fp w) {
    if (!g_->alive(e))
      throw StructuralError("weight on edge absent from graph: id " +
                            std::to_string(e));
    Fp old = get(e);
    if (old == w) return;
    auto [u, v] = g_->endpoints(e);
    for (int i = 0; i <= kFracBits; ++i) {
      bool ob = old.bit(i), nb = w.bit(i);
      if (ob == nb) continue;
      if (nb)
        bit_support(i).insert(e);
      else
        bit_support(i).erase(e);
    }
    norm_ += static_cast<Wide>(w.raw());
    norm_ -= static_cast<Wide>(old.raw());
    loads_[u] += w.raw();
    loads_[u] -= old.raw();
    loads_[v] += w.raw();
    loads_[v] -= old.raw();
    if (w.is_zero()) {
      weights_.erase(e);
      support_.erase(e);
    } else {
      weights_[e] = w;
      support_.insert(e);
    }
  }

  Wide norm() const { return norm_; }
  Wide load(VertexId v) const { return loads_[v]; }
  size_t support_size() const { return weights_.size(); }
  const std::vector<EdgeId>& support() const { return support_.items(); }
  bool in_support(EdgeId e) const { return support_.contains(e); }

  // supp_i(x): edges whose 2^-i weight bit is set. Empty for untouched levels.
  const std::vector<EdgeId>& bit_support_items(int i) const {
    static const std::vector<EdgeId> kEmpty;
    if (i < 0 || i > kFracBits || bit_supports_.empty()) return kEmpty;
    return bit_supports_[i].items();
  }

  Fp min_weight() const {
    Fp m = Fp::one();
    bool any = false;
    for (const auto& [e, w] : weights_) {
      if (!any || w < m) m = w;
      any = true;
    }
    return any ? m : Fp::zero();
  }
  Fp max_weight() const {
    Fp m = Fp::zero();
    for (const auto& [e, w] : weights_)
      if (w > m) m = w;
    return m;
  }

  // True iff x_e = lambda for all support edges.
  bool is_uniform(Fp* lambda_out = nullptr) const {
    Fp lambda = Fp::zero();
    bool first = true;
    for (const auto& [e, w] : weights_) {
      if (first) {
        lambda = w;
        first = false;
      } else if (w != lambda) {
        return false;
      }
    }
    if (lambda_out) *lambda_out = lambda;
    return true;
  }

  bool is_fractional_matching() const {
    for (VertexId v = 0; v < g_->vertex_count(); ++v)
      if (loads_[v] > kOneRaw) return false;
    return true;
  }

  const std::unordered_map<EdgeId, Fp>& entries() const { return weights_; }

 private:
  EdgeIdSet& bit_support(int i) {
    if (bit_supports_.empty()) bit_supports_.resize(kFracBits + 1);
    return bit_supports_[i];
  }

  const DynGraph* g_;
  std::unordered_map<EdgeId, Fp> weights_;
  EdgeIdSet support_;
  std::vector<EdgeIdSet> bit_supports_;  // index = paper bit level i
  std::vector<Wide> loads_;
  Wide norm_ = 0;
};

// Slack-eps vertex-load distance d^eps_V(x, y) = sum_v (|x(v)-y(v)| - eps)^+.
// Exact; both vectors must share the vertex universe.
inline Wide vertex_distance(const FracVector& x, const FracVector& y, Fp eps) {
  if (x.graph().vertex_count() != y.graph().vertex_count())
    throw InputError("vertex_distance: vertex universes differ");
  Wide total = 0;
  Wide e = eps.raw();
  for (VertexId v = 0; v < x.graph().vertex_count(); ++v) {
    Wide d = abs_diff(x.load(v), y.load(v));
    if (d > e) total += d - e;
  }
  return total;
}

}  // namespace dmr
