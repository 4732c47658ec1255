#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "dmr/common.hpp"
#include "dmr/fixed.hpp"
#include "dmr/frac_vector.hpp"
#include "dmr/graph.hpp"
#include "dmr/matching.hpp"
#include "dmr/oracle.hpp"

namespace dmr {

// (eps, delta)-almost-maximal fractional matching: every edge e of G has
// x_e >= delta, or some endpoint v with x(v) >= 1 - eps and max_{f at v}
// x_f <= delta. Checked over all edges of G, not just the support. "Some
// endpoint" accepts either endpoint satisfying both conjuncts.
inline ValidationReport validate_amfm(const FracVector& x, const DynGraph& g,
                                      Fp eps, Fp delta) {
  ValidationReport rep;
  std::vector<Fp> max_inc(g.vertex_count(), Fp::zero());
  for (const auto& [e, w] : x.entries()) {
    auto [u, v] = g.endpoints(e);
    if (w > max_inc[u]) max_inc[u] = w;
    if (w > max_inc[v]) max_inc[v] = w;
  }
  Wide sat = static_cast<Wide>(kOneRaw) - eps.raw();  // 1 - eps
  auto endpoint_ok = [&](VertexId v) {
    return x.load(v) >= sat && max_inc[v] <= delta;
  };
  for (EdgeId e : g.edge_ids()) {
    if (x.get(e) >= delta) continue;
    auto [u, v] = g.endpoints(e);
    if (endpoint_ok(u) || endpoint_ok(v)) continue;
    rep.valid = false;
    rep.edge_violations.push_back(e);
  }
  if (!rep.valid) rep.detail = "AMFM disjunction fails on listed edges";
  return rep;
}

// Lemma: an (eps, delta)-AMFM with x_min >= delta makes K = (V, supp(x)) an
// (eps, delta^-1)-kernel. Verifies both kernel properties:
//   1. d_K(v) <= 1/delta for all v;
//   2. every e in E \ E_K has an endpoint with d_K(v) >= (1-eps)/delta.
inline ValidationReport amfm_kernel_check(const FracVector& x,
                                          const DynGraph& g, Fp eps,
                                          Fp delta) {
  if (delta.is_zero()) throw ParameterError("kernel check: delta must be > 0");
  for (const auto& [e, w] : x.entries())
    if (w < delta)
      throw PromiseError("kernel check requires x_min >= delta; edge " +
                         std::to_string(e));
  ValidationReport rep;
  std::vector<uint64_t> deg(g.vertex_count(), 0);
  for (const auto& [e, w] : x.entries()) {
    auto [u, v] = g.endpoints(e);
    ++deg[u];
    ++deg[v];
  }
  // Property 1: d_K(v) <= delta^-1, i.e. d_K(v) * delta <= 1.
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (static_cast<Wide>(deg[v]) * delta.raw() > kOneRaw) {
      rep.valid = false;
      rep.overloaded.push_back({v, static_cast<Wide>(deg[v]) * delta.raw() -
                                       kOneRaw});
    }
  }
  // Property 2: d_K * delta >= 1 - eps on some endpoint of each non-K edge.
  Wide sat = static_cast<Wide>(kOneRaw) - eps.raw();
  for (EdgeId e : g.edge_ids()) {
    if (x.in_support(e)) continue;
    auto [u, v] = g.endpoints(e);
    bool ok = static_cast<Wide>(deg[u]) * delta.raw() >= sat ||
              static_cast<Wide>(deg[v]) * delta.raw() >= sat;
    if (!ok) {
      rep.valid = false;
      rep.edge_violations.push_back(e);
    }
  }
  if (!rep.valid) rep.detail = "kernel property violated (see lists)";
  return rep;
}

enum class AmmVerdict { proved_yes, proved_no, inconclusive };

struct AmmReport {
  AmmVerdict verdict;
  size_t residual_matching = 0;  // nu(H), H induced on unmatched vertices
  size_t cover_bound = 0;        // certified vertex-cover size when proved_yes
  std::string detail;
};

inline constexpr size_t kAmmExactVertexLimit = 20;

namespace detail {

// Exact minimum vertex cover by branch-and-bound on edges.
inline size_t min_vertex_cover(const DynGraph& g, std::vector<EdgeId> edges,
                               std::vector<uint8_t>& removed, size_t best) {
  // find an uncovered edge
  EdgeId pick = kNoEdge;
  for (EdgeId e : edges) {
    auto [u, v] = g.endpoints(e);
    if (!removed[u] && !removed[v]) {
      pick = e;
      break;
    }
  }
  if (pick == kNoEdge) return 0;
  if (best == 0) return SIZE_MAX / 2;  // cannot cover within budget
  auto [u, v] = g.endpoints(pick);
  removed[u] = 1;
  size_t take_u = 1 + min_vertex_cover(g, edges, removed, best - 1);
  removed[u] = 0;
  removed[v] = 1;
  size_t take_v = 1 + min_vertex_cover(g, edges, removed, best - 1);
  removed[v] = 0;
  return std::min(take_u, take_v);
}

}  // namespace detail

// Tri-state epsilon-almost-maximal-matching certificate. Let H be the
// subgraph induced on M-unmatched vertices; a witness set U must cover E(H)
// and avoid V(M). nu(H) > eps*mu proves NO (cover lower bound); a greedy
// 2-approximate cover within eps*mu proves YES; small residuals are decided
// exactly; otherwise inconclusive.
inline AmmReport validate_amm(
    const std::vector<EdgeId>& matching, const DynGraph& g, Fp eps,
    const std::function<size_t(const DynGraph&)>& mu_oracle) {
  if (!is_matching(g, matching))
    throw InputError("validate_amm: M is not a matching");
  AmmReport rep{AmmVerdict::inconclusive, 0, 0, ""};
  std::vector<uint8_t> matched(g.vertex_count(), 0);
  for (EdgeId e : matching) {
    auto [u, v] = g.endpoints(e);
    matched[u] = matched[v] = 1;
  }
  std::vector<EdgeId> h_edges;
  for (EdgeId e : g.edge_ids()) {
    auto [u, v] = g.endpoints(e);
    if (!matched[u] && !matched[v]) h_edges.push_back(e);
  }
  size_t mu_g = mu_oracle(g);
  // eps * mu as the exact budget: |U| <= floor(eps * mu) unless eps*mu is
  // integral, in which case equality is allowed; compare k <= eps*mu as
  // k * 2^52 <= eps_raw * mu.
  auto within_budget = [&](size_t k) {
    return (static_cast<Wide>(k) << kFracBits) <=
           static_cast<Wide>(eps.raw()) * mu_g;
  };
  if (h_edges.empty()) {
    rep.verdict = AmmVerdict::proved_yes;
    rep.cover_bound = 0;
    rep.detail = "M maximal, U empty";
    return rep;
  }
  std::vector<EdgeId> h_matching = max_matching_subset(g, h_edges);
  rep.residual_matching = h_matching.size();
  if (!within_budget(h_matching.size())) {
    rep.verdict = AmmVerdict::proved_no;
    rep.detail = "nu(H) exceeds eps*mu(G); every cover does too";
    return rep;
  }
  // Greedy cover: endpoints of a maximal matching of H.
  std::vector<EdgeId> greedy = greedy_maximal_matching(g, h_edges);
  if (within_budget(2 * greedy.size())) {
    rep.verdict = AmmVerdict::proved_yes;
    rep.cover_bound = 2 * greedy.size();
    rep.detail = "greedy cover within budget";
    return rep;
  }
  // Exact cover on small residual graphs.
  std::vector<uint8_t> active(g.vertex_count(), 0);
  size_t active_count = 0;
  for (EdgeId e : h_edges) {
    auto [u, v] = g.endpoints(e);
    if (!active[u]) {
      active[u] = 1;
      ++active_count;
    }
    if (!active[v]) {
      active[v] = 1;
      ++active_count;
    }
  }
  if (active_count <= kAmmExactVertexLimit) {
    std::vector<uint8_t> removed(g.vertex_count(), 0);
    size_t mvc = detail::min_vertex_cover(g, h_edges, removed,
                                          active_count);
    rep.cover_bound = mvc;
    rep.verdict = within_budget(mvc) ? AmmVerdict::proved_yes
                                     : AmmVerdict::proved_no;
    rep.detail = "exact minimum vertex cover";
    return rep;
  }
  rep.detail = "residual too large for exact cover";
  return rep;
}

// Maximal matching from an O(1)-approximate vertex cover: maximal matching
// inside G[U], then each unmatched u in U scans its neighbors for an
// unmatched partner.
inline Matching small_mu_maximal_matching(const DynGraph& g,
                                          const std::vector<VertexId>& cover) {
  std::vector<uint8_t> in_cover(g.vertex_count(), 0);
  for (VertexId v : cover) in_cover[v] = 1;
  for (EdgeId e : g.edge_ids()) {
    auto [u, v] = g.endpoints(e);
    if (!in_cover[u] && !in_cover[v])
      throw InputError("small_mu: U misses edge (" + std::to_string(u) + "," +
                       std::to_string(v) + ")");
  }
  Matching m(&g);
  // Phase 1: maximal matching within G[U].
  for (EdgeId e : g.edge_ids()) {
    auto [u, v] = g.endpoints(e);
    if (in_cover[u] && in_cover[v] && !m.covered(u) && !m.covered(v)) m.add(e);
  }
  // Phase 2: extend each unmatched cover vertex through its neighbors.
  for (VertexId u : cover) {
    if (m.covered(u)) continue;
    for (EdgeId e : g.incident(u)) {
      VertexId v = g.other_endpoint(e, u);
      if (!m.covered(v)) {
        m.add(e);
        break;
      }
    }
  }
  return m;
}

// eps-restricted fractional matching: x_e in [0, eps] u {1} per edge.
inline ValidationReport validate_restricted(const FracVector& x, Fp eps) {
  ValidationReport rep;
  for (const auto& [e, w] : x.entries()) {
    if (w <= eps || w == Fp::one()) continue;
    rep.valid = false;
    rep.edge_violations.push_back(e);
  }
  if (!rep.valid) rep.detail = "edge values outside [0,eps] u {1}";
  return rep;
}

}  // namespace dmr
