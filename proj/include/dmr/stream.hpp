#pragma once

#include <algorithm>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "dmr/common.hpp"
#include "dmr/fixed.hpp"
#include "dmr/frac_vector.hpp"
#include "dmr/graph.hpp"

namespace dmr {

struct UpdateEvent {
  VertexId u, v;
  Fp value;
};

struct UpdateStream {
  std::string kind;
  uint64_t seed = 0;
  uint32_t n = 0;
  Fp eps;
  Fp delta;
  std::vector<UpdateEvent> events;
};

// A generated scenario: the starting graph/vector plus the event stream.
struct Scenario {
  std::unique_ptr<DynGraph> graph;
  std::unique_ptr<FracVector> x0;
  UpdateStream stream;
};

namespace detail {

inline Scenario make_empty_scenario(uint32_t n, bool bipartite) {
  Scenario s;
  s.graph = std::make_unique<DynGraph>(n, bipartite);
  return s;
}

}  // namespace detail

// Fact-style recourse adversary: a path of 4/eps + 2 half-weight edges whose
// two end edges are alternately deleted and re-inserted.
inline Scenario gen_recourse_path(Fp eps, size_t cycles, uint64_t seed) {
  uint64_t inv = kOneRaw / eps.raw();  // floor(1/eps)
  if (inv < 1) throw ParameterError("recourse-path: eps too large");
  uint32_t edges = static_cast<uint32_t>(4 * inv + 2);
  Scenario s = detail::make_empty_scenario(edges + 1, true);
  for (VertexId v = 0; v <= edges; ++v)
    s.graph->set_side(v, v % 2 == 0 ? Side::left : Side::right);
  Fp half = Fp::pow2(1);
  s.x0 = std::make_unique<FracVector>(s.graph.get());
  for (VertexId v = 0; v < edges; ++v)
    s.x0->set(s.graph->add_edge(v, v + 1), half);
  s.stream.kind = "recourse-path";
  s.stream.seed = seed;
  s.stream.n = edges + 1;
  s.stream.eps = eps;
  s.stream.delta = half;
  for (size_t c = 0; c < cycles; ++c) {
    s.stream.events.push_back({0, 1, Fp::zero()});
    s.stream.events.push_back({edges - 1, edges, Fp::zero()});
    s.stream.events.push_back({0, 1, half});
    s.stream.events.push_back({edges - 1, edges, half});
  }
  return s;
}

// Random bipartite fractional-matching churn: value updates respecting both
// promises (fractional matching, delta floor).
inline Scenario gen_random_bip(uint32_t n_side, uint32_t m, size_t steps,
                               Fp delta, Fp eps, uint64_t seed) {
  Scenario s = detail::make_empty_scenario(2 * n_side, true);
  DynGraph& g = *s.graph;
  for (VertexId v = 0; v < n_side; ++v) g.set_side(v, Side::left);
  for (VertexId v = n_side; v < 2 * n_side; ++v) g.set_side(v, Side::right);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<uint32_t> dl(0, n_side - 1);
  std::uniform_int_distribution<uint32_t> dr(n_side, 2 * n_side - 1);
  for (uint32_t i = 0; i < m; ++i) {
    VertexId u = dl(rng), v = dr(rng);
    if (g.find_edge(u, v) != kNoEdge) continue;
    g.add_edge(u, v);
  }
  s.x0 = std::make_unique<FracVector>(&g);
  std::vector<Wide> load(g.vertex_count(), 0);
  auto ids = g.edge_ids();
  auto pick_value = [&](EdgeId e) -> Fp {
    auto [u, v] = g.endpoints(e);
    Fp cur = s.x0->get(e);
    Wide cap_u = kOneRaw - (load[u] - cur.raw());
    Wide cap_v = kOneRaw - (load[v] - cur.raw());
    uint64_t cap = static_cast<uint64_t>(std::min(cap_u, cap_v));
    if (cap < delta.raw()) return Fp::zero();
    return Fp::from_raw(
        std::uniform_int_distribution<uint64_t>(delta.raw(), cap)(rng));
  };
  auto apply = [&](EdgeId e, Fp w) {
    auto [u, v] = g.endpoints(e);
    Fp cur = s.x0->get(e);
    load[u] += w.raw();
    load[u] -= cur.raw();
    load[v] += w.raw();
    load[v] -= cur.raw();
    s.x0->set(e, w);
  };
  for (EdgeId e : ids)
    if (std::uniform_int_distribution<int>(0, 3)(rng) != 0) apply(e, pick_value(e));
  // Freeze x0, then emit value-change events from this state.
  FracVector running = *s.x0;
  std::vector<Wide> rload = load;
  s.stream.kind = "random-bip";
  s.stream.seed = seed;
  s.stream.n = g.vertex_count();
  s.stream.eps = eps;
  s.stream.delta = delta;
  for (size_t t = 0; t < steps; ++t) {
    EdgeId e = ids[std::uniform_int_distribution<size_t>(0, ids.size() - 1)(rng)];
    auto [u, v] = g.endpoints(e);
    Fp cur = running.get(e);
    Fp w = Fp::zero();
    if (std::uniform_int_distribution<int>(0, 2)(rng) != 0) {
      Wide cap_u = kOneRaw - (rload[u] - cur.raw());
      Wide cap_v = kOneRaw - (rload[v] - cur.raw());
      uint64_t cap = static_cast<uint64_t>(std::min(cap_u, cap_v));
      if (cap >= delta.raw())
        w = Fp::from_raw(
            std::uniform_int_distribution<uint64_t>(delta.raw(), cap)(rng));
    }
    rload[u] += w.raw();
    rload[u] -= cur.raw();
    rload[v] += w.raw();
    rload[v] -= cur.raw();
    running.set(e, w);
    s.stream.events.push_back({u, v, w});
  }
  return s;
}

// Deletion-only stream over a random bipartite graph (full teardown).
inline Scenario gen_decremental(uint32_t n_side, uint32_t m, uint64_t seed) {
  Scenario s = detail::make_empty_scenario(2 * n_side, true);
  DynGraph& g = *s.graph;
  for (VertexId v = 0; v < n_side; ++v) g.set_side(v, Side::left);
  for (VertexId v = n_side; v < 2 * n_side; ++v) g.set_side(v, Side::right);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<uint32_t> dl(0, n_side - 1);
  std::uniform_int_distribution<uint32_t> dr(n_side, 2 * n_side - 1);
  for (uint32_t i = 0; i < m; ++i) {
    VertexId u = dl(rng), v = dr(rng);
    if (g.find_edge(u, v) != kNoEdge) continue;
    g.add_edge(u, v);
  }
  s.x0 = std::make_unique<FracVector>(&g);
  auto ids = g.edge_ids();
  std::shuffle(ids.begin(), ids.end(), rng);
  s.stream.kind = "decremental";
  s.stream.seed = seed;
  s.stream.n = g.vertex_count();
  for (EdgeId e : ids) {
    auto [u, v] = g.endpoints(e);
    s.stream.events.push_back({u, v, Fp::zero()});
  }
  return s;
}

// Oscillates edge weights across weight classes to stress the pipeline's
// small/large split: deletions, a light band [delta, 2 delta), a mid band
// around 2^-25 and a heavy value of 1/8.
inline Scenario gen_heavy_light(uint32_t n_side, uint32_t m, size_t steps,
                                Fp delta, uint64_t seed) {
  Scenario s = gen_random_bip(n_side, m, 0, delta, Fp::pow2(3), seed);
  DynGraph& g = *s.graph;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  auto ids = g.edge_ids();
  FracVector running = *s.x0;
  std::vector<Wide> load(g.vertex_count(), 0);
  for (VertexId v = 0; v < g.vertex_count(); ++v) load[v] = running.load(v);
  s.stream.kind = "heavy-light";
  const uint64_t heavy_raw = Fp::pow2(3).raw();
  const uint64_t mid_raw =
      std::max<uint64_t>(2 * delta.raw(), Fp::pow2(25).raw());
  for (size_t t = 0; t < steps; ++t) {
    EdgeId e = ids[std::uniform_int_distribution<size_t>(0, ids.size() - 1)(rng)];
    auto [u, v] = g.endpoints(e);
    Fp cur = running.get(e);
    Wide cap_u = kOneRaw - (load[u] - cur.raw());
    Wide cap_v = kOneRaw - (load[v] - cur.raw());
    uint64_t cap = static_cast<uint64_t>(std::min(cap_u, cap_v));
    Fp w;
    int mode = std::uniform_int_distribution<int>(0, 3)(rng);
    if (mode == 0 || cap < delta.raw()) {
      w = Fp::zero();
    } else if (mode == 1 && cap >= heavy_raw) {
      w = Fp::from_raw(heavy_raw);
    } else if (mode == 2 && cap >= 2 * mid_raw) {
      w = Fp::from_raw(std::uniform_int_distribution<uint64_t>(
          mid_raw, 2 * mid_raw - 1)(rng));
    } else {
      w = Fp::from_raw(std::uniform_int_distribution<uint64_t>(
          delta.raw(), std::min<uint64_t>(cap, 2 * delta.raw() - 1))(rng));
    }
    load[u] += w.raw();
    load[u] -= cur.raw();
    load[v] += w.raw();
    load[v] -= cur.raw();
    running.set(e, w);
    s.stream.events.push_back({u, v, w});
  }
  return s;
}

struct ReplayReport {
  bool ok = true;
  size_t first_bad_step = 0;
  std::string detail;
};

// Replays the stream against a fresh vector and checks the declared promises
// (fractional matching validity and the delta floor) at every step.
inline ReplayReport replay_validate(const DynGraph& g, const FracVector& x0,
                                    const UpdateStream& stream) {
  ReplayReport rep;
  FracVector x = x0;
  if (!x.is_fractional_matching()) {
    rep.ok = false;
    rep.detail = "initial vector violates the degree constraint";
    return rep;
  }
  for (size_t i = 0; i < stream.events.size(); ++i) {
    const UpdateEvent& ev = stream.events[i];
    EdgeId e = g.find_edge(ev.u, ev.v);
    if (e == kNoEdge) {
      rep.ok = false;
      rep.first_bad_step = i;
      rep.detail = "event references a non-edge";
      return rep;
    }
    if (!ev.value.is_zero() && !stream.delta.is_zero() &&
        ev.value < stream.delta) {
      rep.ok = false;
      rep.first_bad_step = i;
      rep.detail = "event value below the delta floor";
      return rep;
    }
    x.set(e, ev.value);
    if (!x.is_fractional_matching()) {
      rep.ok = false;
      rep.first_bad_step = i;
      rep.detail = "fractional-matching promise violated";
      return rep;
    }
  }
  return rep;
}

}  // namespace dmr
