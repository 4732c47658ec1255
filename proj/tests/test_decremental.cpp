#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dmr/decremental.hpp"
#include "dmr/stream.hpp"
#include "support/naive.hpp"

using namespace dmr;

TEST_CASE("reference oracle: deleting unmatched edges never ends the phase") {
  DynGraph g(8, true);
  for (VertexId v = 0; v < 4; ++v) g.set_side(v, Side::left);
  for (VertexId v = 4; v < 8; ++v) g.set_side(v, Side::right);
  std::vector<EdgeId> matched, spare;
  for (VertexId v = 0; v < 4; ++v) matched.push_back(g.add_edge(v, v + 4));
  spare.push_back(g.add_edge(0, 5));
  spare.push_back(g.add_edge(1, 6));
  ReferenceRobustFractional oracle(&g, Fp::pow2(2));
  FracVector x = oracle.start_phase();
  REQUIRE(oracle.mu_start() == 4);
  for (EdgeId e : spare) {
    if (!x.get(e).is_zero()) continue;  // oracle may have matched differently
    CHECK(oracle.on_delete(e));
    g.remove_edge(e);
  }
  CHECK(oracle.value_remaining() == oracle.mu_start());
}

TEST_CASE("reference oracle: phase ends exactly at ceil(eps*mu) matched deletions") {
  // eps = 1/4, mu = 10: non-integral eps*mu = 2.5 ends the phase at the 3rd
  // matched deletion.
  DynGraph g(20, true);
  for (VertexId v = 0; v < 10; ++v) g.set_side(v, Side::left);
  for (VertexId v = 10; v < 20; ++v) g.set_side(v, Side::right);
  for (VertexId v = 0; v < 10; ++v) g.add_edge(v, v + 10);
  ReferenceRobustFractional oracle(&g, Fp::pow2(2));
  FracVector x = oracle.start_phase();
  REQUIRE(oracle.mu_start() == 10);
  std::vector<EdgeId> support(x.support());
  CHECK(oracle.on_delete(support[0]));
  CHECK(oracle.on_delete(support[1]));
  CHECK_FALSE(oracle.on_delete(support[2]));  // ceil(2.5) = 3 ends it
}

TEST_CASE("decremental_run: K_{4,4} full teardown tracks (1-2eps) mu") {
  DynGraph g(8, true);
  for (VertexId v = 0; v < 4; ++v) g.set_side(v, Side::left);
  for (VertexId v = 4; v < 8; ++v) g.set_side(v, Side::right);
  std::vector<EdgeId> all;
  for (VertexId u = 0; u < 4; ++u)
    for (VertexId v = 4; v < 8; ++v) all.push_back(g.add_edge(u, v));
  std::mt19937_64 rng(223);
  std::shuffle(all.begin(), all.end(), rng);
  DecrementalConfig cfg{parse_fp("0.2"), true};
  auto res = decremental_run(g, all, cfg);  // throws on any violation
  CHECK(res.violations == 0);
  CHECK(res.steps.size() == all.size());
  CHECK(res.steps.back().mu == 0);
}

TEST_CASE("decremental_run: stream outside the phase support gives zero recourse") {
  DynGraph g(12, true);
  for (VertexId v = 0; v < 6; ++v) g.set_side(v, Side::left);
  for (VertexId v = 6; v < 12; ++v) g.set_side(v, Side::right);
  std::vector<EdgeId> matching_edges, spares;
  for (VertexId v = 0; v < 6; ++v) matching_edges.push_back(g.add_edge(v, v + 6));
  // Spare edges between already-matched vertices; deleting them leaves x^1.
  spares.push_back(g.add_edge(0, 7));
  spares.push_back(g.add_edge(1, 8));
  spares.push_back(g.add_edge(2, 9));
  DecrementalConfig cfg{parse_fp("0.1"), true};
  auto res = decremental_run(g, spares, cfg);
  CHECK(res.recourse_total == 0);
  CHECK(res.phases == 1);
}

TEST_CASE("decremental_run: random bipartite full deletion, both eps values") {
  std::mt19937_64 rng(227);
  for (const char* es : {"0.1", "0.2"}) {
    for (int trial = 0; trial < 6; ++trial) {
      auto scen = gen_decremental(10, 60, 500 + trial);
      std::vector<EdgeId> dels;
      for (const auto& ev : scen.stream.events)
        dels.push_back(scen.graph->find_edge(ev.u, ev.v));
      DecrementalConfig cfg{parse_fp(es), true};
      auto res = decremental_run(*scen.graph, dels, cfg);
      REQUIRE(res.violations == 0);
    }
  }
}

TEST_CASE("decremental_run rejects non-deletions and dead edges") {
  DynGraph g(4, true);
  g.set_side(0, Side::left);
  g.set_side(1, Side::right);
  g.set_side(2, Side::left);
  g.set_side(3, Side::right);
  EdgeId a = g.add_edge(0, 1);
  g.add_edge(2, 3);
  DecrementalConfig cfg{parse_fp("0.1"), false};
  std::vector<EdgeId> dels{a, a};  // second deletion hits a dead edge
  CHECK_THROWS_AS(decremental_run(g, dels, cfg), RegimeError);
}
