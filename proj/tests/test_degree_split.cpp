#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <random>

#include "dmr/degree_split.hpp"
#include "support/naive.hpp"

using namespace dmr;

namespace {

struct SplitProps {
  bool p1, p2, p3, simple, partition;
};

SplitProps check_split(const DynGraph& g, const MultiEdgeSet& h,
                       const DegreeSplitResult& r, bool bipartite) {
  SplitProps props{true, true, true, true, true};
  size_t m = h.size();
  props.p1 = r.first.size() == (m + 1) / 2 && r.second.size() == m / 2;

  std::map<EdgeId, int> mult_in, mult_out;
  for (EdgeId e : h.edges) mult_in[e]++;
  for (EdgeId e : r.first) mult_out[e]++;
  for (EdgeId e : r.second) mult_out[e]++;
  props.partition = mult_in == mult_out;
  {
    auto simple = [](const std::vector<EdgeId>& s) {
      std::vector<EdgeId> c(s);
      std::sort(c.begin(), c.end());
      return std::adjacent_find(c.begin(), c.end()) == c.end();
    };
    props.simple = simple(r.first) && simple(r.second);
  }

  std::vector<int> dh(g.vertex_count(), 0), d1(g.vertex_count(), 0),
      d2(g.vertex_count(), 0);
  for (EdgeId e : h.edges) {
    auto [u, v] = g.endpoints(e);
    dh[u]++;
    dh[v]++;
  }
  for (EdgeId e : r.first) {
    auto [u, v] = g.endpoints(e);
    d1[u]++;
    d1[v]++;
  }
  for (EdgeId e : r.second) {
    auto [u, v] = g.endpoints(e);
    d2[u]++;
    d2[v]++;
  }
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    // P2: d_i(v) in [d/2 - 1, d/2 + 1], as integers: |2*d_i - d| <= 2.
    if (std::abs(2 * d1[v] - dh[v]) > 2 || std::abs(2 * d2[v] - dh[v]) > 2)
      props.p2 = false;
    if (bipartite) {
      // P3: d_i(v) in [floor(d/2), ceil(d/2)]: |2*d_i - d| <= 1.
      if (std::abs(2 * d1[v] - dh[v]) > 1 || std::abs(2 * d2[v] - dh[v]) > 1)
        props.p3 = false;
    }
  }
  return props;
}

}  // namespace

TEST_CASE("degree_split: empty input") {
  DynGraph g(4, false);
  MultiEdgeSet h;
  auto r = degree_split(g, h);
  CHECK(r.first.empty());
  CHECK(r.second.empty());
}

TEST_CASE("degree_split: 4-cycle splits into the two perfect matchings") {
  DynGraph g(4, true);
  g.set_side(0, Side::left);
  g.set_side(2, Side::left);
  g.set_side(1, Side::right);
  g.set_side(3, Side::right);
  std::vector<EdgeId> cyc = {g.add_edge(0, 1), g.add_edge(1, 2),
                             g.add_edge(2, 3), g.add_edge(3, 0)};
  MultiEdgeSet h = make_multiset(cyc, {});
  auto r = degree_split(g, h);
  auto props = check_split(g, h, r, true);
  CHECK(props.p1);
  CHECK(props.p3);
  // Every vertex has degree exactly 1 in each output.
  std::vector<int> d1(4, 0), d2(4, 0);
  for (EdgeId e : r.first) {
    auto [u, v] = g.endpoints(e);
    d1[u]++;
    d1[v]++;
  }
  for (EdgeId e : r.second) {
    auto [u, v] = g.endpoints(e);
    d2[u]++;
    d2[v]++;
  }
  for (int v = 0; v < 4; ++v) {
    CHECK(d1[v] == 1);
    CHECK(d2[v] == 1);
  }
}

TEST_CASE("degree_split: triangle over all walk orders") {
  // Relabel the triangle all 6 ways so every walk extraction order occurs.
  std::array<std::array<VertexId, 3>, 6> perms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  for (const auto& p : perms) {
    DynGraph g(3, false);
    std::vector<EdgeId> edges = {g.add_edge(p[0], p[1]), g.add_edge(p[1], p[2]),
                                 g.add_edge(p[2], p[0])};
    MultiEdgeSet h = make_multiset(edges, {});
    auto r = degree_split(g, h);
    auto props = check_split(g, h, r, false);
    CHECK(props.p1);
    CHECK(props.p2);
    CHECK(r.first.size() == 2);
    CHECK(r.second.size() == 1);
  }
}

TEST_CASE("degree_split: multiplicity-2 copies land one per side") {
  DynGraph g(4, false);
  EdgeId a = g.add_edge(0, 1);
  EdgeId b = g.add_edge(1, 2);
  MultiEdgeSet h;
  h.add(a, 0);
  h.add(a, 1);
  h.add(b, 0);
  auto r = degree_split(g, h);
  auto props = check_split(g, h, r, false);
  CHECK(props.p1);
  CHECK(props.partition);
  CHECK(props.simple);
  CHECK(std::count(r.first.begin(), r.first.end(), a) == 1);
  CHECK(std::count(r.second.begin(), r.second.end(), a) == 1);
}

TEST_CASE("degree_split rejects multiplicity above two") {
  DynGraph g(2, false);
  EdgeId a = g.add_edge(0, 1);
  MultiEdgeSet h;
  h.add(a, 0);
  h.add(a, 1);
  h.add(a, 0);
  CHECK_THROWS_AS(degree_split(g, h), InputError);
}

TEST_CASE("degree_split: random multigraph properties") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    bool bipartite = trial % 2 == 0;
    uint32_t n = std::uniform_int_distribution<uint32_t>(2, 64)(rng);
    if (bipartite && n < 2) n = 2;
    DynGraph g(n, bipartite);
    if (bipartite) {
      uint32_t half = n / 2;
      if (half == 0) half = 1;
      for (VertexId v = 0; v < n; ++v)
        g.set_side(v, v < half ? Side::left : Side::right);
    }
    uint32_t m_target = std::uniform_int_distribution<uint32_t>(0, 3 * n)(rng);
    MultiEdgeSet h;
    for (uint32_t i = 0; i < m_target; ++i) {
      VertexId u = std::uniform_int_distribution<uint32_t>(0, n - 1)(rng);
      VertexId v = std::uniform_int_distribution<uint32_t>(0, n - 1)(rng);
      if (u == v) continue;
      if (bipartite && g.side(u) == g.side(v)) continue;
      EdgeId e = g.find_edge(u, v);
      if (e == kNoEdge) {
        e = g.add_edge(u, v);
        h.add(e, 0);
        if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) h.add(e, 1);
      }
    }
    auto r = degree_split(g, h);
    auto props = check_split(g, h, r, bipartite);
    REQUIRE(props.p1);
    REQUIRE(props.p2);
    REQUIRE(props.p3);
    REQUIRE(props.simple);
    REQUIRE(props.partition);
  }
}
