#pragma once

#include <string>
#include <vector>

#include "dmr/common.hpp"
#include "dmr/fixed.hpp"
#include "dmr/frac_vector.hpp"
#include "dmr/graph.hpp"

namespace dmr {

// Exact evaluation of the coarsening properties
//   C0 containment, C1 global slack, C2 vertex slack, C3 edge values,
//   C4 bounded (optional),
// with the raw slack quantities preserved so reports are auditable.
struct CoarseningReport {
  bool c0 = true, c1 = true, c2 = true, c3 = true, c4 = true;
  bool c4_checked = false;
  EdgeId c0_edge = kNoEdge;  // first edge outside supp(x)
  EdgeId c3_edge = kNoEdge;  // first edge with a bad value class
  VertexId c4_vertex = kNoVertex;
  Wide c1_lhs = 0;  // | ||x|| - ||x'|| |
  Wide c2_lhs = 0;  // d^eps_V(x, x')
  Wide slack_rhs = 0;  // eps*||x|| + eps at 2^-104 scale
  Fp eps, delta;

  bool pass() const {
    return c0 && c1 && c2 && c3 && (!c4_checked || c4);
  }
};

inline CoarseningReport validate_coarsening(const FracVector& x,
                                            const FracVector& xp, Fp eps,
                                            Fp delta,
                                            bool require_bounded = false) {
  if (&x.graph() != &xp.graph())
    throw InputError("validate_coarsening: vectors over different graphs");
  CoarseningReport rep;
  rep.eps = eps;
  rep.delta = delta;
  rep.c4_checked = require_bounded;

  // C0 containment.
  for (const auto& [e, w] : xp.entries()) {
    if (!x.in_support(e)) {
      rep.c0 = false;
      if (rep.c0_edge == kNoEdge) rep.c0_edge = e;
    }
  }

  // C1 global slack: | ||x|| - ||x'|| | <= eps ||x|| + eps.
  rep.c1_lhs = abs_diff(x.norm(), xp.norm());
  rep.slack_rhs = static_cast<Wide>(eps.raw()) * (x.norm() + kOneRaw);
  rep.c1 = (rep.c1_lhs << kFracBits) <= rep.slack_rhs;

  // C2 vertex slack: d^eps_V(x, x') <= eps ||x|| + eps.
  rep.c2_lhs = vertex_distance(x, xp, eps);
  rep.c2 = (rep.c2_lhs << kFracBits) <= rep.slack_rhs;

  // C3 edge values: x'_e = x_e when x_e >= delta, else x'_e in {0} u [d, 2d).
  Wide two_delta = static_cast<Wide>(delta.raw()) * 2;
  for (const auto& [e, w] : x.entries()) {
    Fp wp = xp.get(e);
    bool ok;
    if (w >= delta) {
      ok = wp == w;
    } else {
      ok = wp.is_zero() ||
           (wp >= delta && static_cast<Wide>(wp.raw()) < two_delta);
    }
    if (!ok) {
      rep.c3 = false;
      if (rep.c3_edge == kNoEdge) rep.c3_edge = e;
    }
  }
  // Edges in supp(x') \ supp(x) already violate C0; C3's "x_e < delta" branch
  // covers them (x_e = 0), so also require the class there.
  for (const auto& [e, wp] : xp.entries()) {
    if (x.in_support(e)) continue;
    if (!(wp >= delta && static_cast<Wide>(wp.raw()) < two_delta)) {
      rep.c3 = false;
      if (rep.c3_edge == kNoEdge) rep.c3_edge = e;
    }
  }

  // C4 bounded: x'(v) <= x(v) + eps.
  if (require_bounded) {
    for (VertexId v = 0; v < x.graph().vertex_count(); ++v) {
      if (xp.load(v) > x.load(v) + eps.raw()) {
        rep.c4 = false;
        if (rep.c4_vertex == kNoVertex) rep.c4_vertex = v;
      }
    }
  }
  return rep;
}

// Converts an (eps, delta)-coarsening into a bounded (3(eps+delta), delta)-
// coarsening by shedding light-origin edges at overloaded vertices until
// x''(v) <= x(v) + eps + 2 delta everywhere. Output zeroes an edge only when
// its origin weight satisfies x_e < delta.
inline FracVector bounded_coarsening(const FracVector& x, const FracVector& xp,
                                     Fp eps, Fp delta) {
  CoarseningReport in = validate_coarsening(x, xp, eps, delta);
  if (!in.pass())
    throw InputError("bounded_coarsening: input is not an (eps,delta)-coarsening");
  FracVector out = xp;
  const DynGraph& g = x.graph();
  // Light-origin incidence lists over supp(x'').
  std::vector<std::vector<EdgeId>> light(g.vertex_count());
  for (const auto& [e, w] : out.entries()) {
    if (x.get(e) < delta) {
      auto [u, v] = g.endpoints(e);
      light[u].push_back(e);
      light[v].push_back(e);
    }
  }
  Wide bound_add = static_cast<Wide>(eps.raw()) + 2 * delta.raw();
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    size_t cursor = 0;
    while (out.load(v) > x.load(v) + bound_add && cursor < light[v].size()) {
      EdgeId e = light[v][cursor++];
      if (out.get(e).is_zero()) continue;  // removed from the other side
      out.set(e, Fp::zero());
    }
  }
  return out;
}

// Static composition check: x1 an (e1,d1)-coarsening of x and x2 an (e2,d2)-
// coarsening of x1 make x2 an (e1 + 2 e2, d2)-coarsening of x.
inline CoarseningReport compose(const FracVector& x, const FracVector& x1,
                                const FracVector& x2, Fp eps1, Fp delta1,
                                Fp eps2, Fp delta2) {
  if (delta1 > delta2)
    throw InputError("compose: requires delta1 <= delta2");
  if (eps1 > Fp::one() || eps2 > Fp::one())
    throw InputError("compose: eps parameters must lie in [0,1]");
  (void)x1;
  uint64_t eraw = eps1.raw() + 2 * eps2.raw();
  Fp composed = eraw >= kOneRaw ? Fp::one() : Fp::from_raw(eraw);
  return validate_coarsening(x, x2, composed, delta2);
}

}  // namespace dmr
