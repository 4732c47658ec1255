#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dmr/adaptive_coarsener.hpp"
#include "dmr/coarseners.hpp"
#include "dmr/pipeline.hpp"
#include "dmr/stream.hpp"
#include "support/naive.hpp"

using namespace dmr;

namespace {

void set_uniform(naive::RandomInstance& inst, Fp lambda) {
  for (EdgeId e : inst.g.edge_ids()) {
    auto [u, v] = inst.g.endpoints(e);
    if (inst.x.load(u) + lambda.raw() > kOneRaw) continue;
    if (inst.x.load(v) + lambda.raw() > kOneRaw) continue;
    inst.x.set(e, lambda);
  }
}

// C1'/C2' of the uniform coarsener claim, exact.
void check_strong_slacks(const FracVector& x, const FracVector& xp, Fp eps,
                         Fp gamma) {
  Wide rhs = static_cast<Wide>(eps.raw() + gamma.raw()) * x.norm() +
             (static_cast<Wide>(gamma.raw()) << kFracBits);
  Wide c1 = abs_diff(x.norm(), xp.norm()) << kFracBits;
  REQUIRE(c1 <= rhs);
  Wide c2 = vertex_distance(x, xp, Fp::from_raw(gamma.raw() / 4))
            << kFracBits;
  REQUIRE(c2 <= rhs);
}

}  // namespace

TEST_CASE("uniform coarsener: insertions leave the output untouched") {
  std::mt19937_64 rng(113);
  auto inst = naive::random_bipartite_instance(rng, 50, 50, 3000);
  Fp lambda = Fp::pow2(14);
  set_uniform(inst, lambda);
  UniformCoarsenerConfig cfg{Fp::pow2(1), Fp::pow2(8), 5, lambda};
  UniformCoarsener c(&inst.g, inst.x, det_split_backend(cfg.gamma), cfg);
  FracVector before = c.output();
  REQUIRE(before.support_size() > 0);
  // A few insertions (new edges in the graph, same lambda).
  int inserted = 0;
  for (VertexId u = 0; u < 50 && inserted < 5; ++u) {
    for (VertexId v = 50; v < 100 && inserted < 5; ++v) {
      if (inst.g.find_edge(u, v) != kNoEdge) continue;
      if (inst.x.load(u) + lambda.raw() > kOneRaw) continue;
      if (inst.x.load(v) + lambda.raw() > kOneRaw) continue;
      EdgeId e = inst.g.add_edge(u, v);
      inst.x.set(e, lambda);
      auto diff = c.update(e, lambda);
      CHECK(diff.empty());
      ++inserted;
    }
  }
  REQUIRE(inserted > 0);
  for (const auto& [e, w] : before.entries()) CHECK(c.output().get(e) == w);
}

TEST_CASE("uniform coarsener: part switch under adversarial deletion") {
  std::mt19937_64 rng(127);
  auto inst = naive::random_bipartite_instance(rng, 50, 50, 4000);
  Fp lambda = Fp::pow2(14);
  set_uniform(inst, lambda);
  UniformCoarsenerConfig cfg{Fp::pow2(1), Fp::pow2(6), 7, lambda};
  UniformCoarsener c(&inst.g, inst.x, det_split_backend(cfg.gamma), cfg);
  // Delete the active output's edges first: a switch must occur before the
  // output goes stale, and a valid part must always exist.
  for (int step = 0; step < 200 && inst.x.support_size() > 0; ++step) {
    std::vector<EdgeId> out_edges;
    for (const auto& [e, w] : c.output().entries()) out_edges.push_back(e);
    EdgeId victim = out_edges.empty()
                        ? inst.x.support().front()
                        : out_edges.front();
    inst.x.set(victim, Fp::zero());
    c.update(victim, Fp::zero());
    auto rep = validate_coarsening(inst.x, c.output(), c.declared_eps(),
                                   c.declared_delta());
    REQUIRE(rep.pass());
    check_strong_slacks(inst.x, c.output(), cfg.eps, cfg.gamma);
  }
}

TEST_CASE("uniform coarsener: random streams validate after every update") {
  std::mt19937_64 rng(131);
  for (uint64_t seed = 0; seed < 3; ++seed) {
    auto inst = naive::random_bipartite_instance(rng, 40, 40, 2000);
    Fp lambda = Fp::pow2(13);
    set_uniform(inst, lambda);
    UniformCoarsenerConfig cfg{Fp::pow2(1), Fp::pow2(7), seed, lambda};
    auto backend = seed % 2 == 0 ? det_split_backend(cfg.gamma)
                                 : rand_split_backend(cfg.gamma);
    UniformCoarsener c(&inst.g, inst.x, std::move(backend), cfg);
    auto ids = inst.g.edge_ids();
    for (int step = 0; step < 400; ++step) {
      EdgeId e =
          ids[std::uniform_int_distribution<size_t>(0, ids.size() - 1)(rng)];
      Fp cur = inst.x.get(e);
      Fp nu = Fp::zero();
      if (cur.is_zero() && std::uniform_int_distribution<int>(0, 1)(rng)) {
        auto [u, v] = inst.g.endpoints(e);
        if (inst.x.load(u) + lambda.raw() <= kOneRaw &&
            inst.x.load(v) + lambda.raw() <= kOneRaw)
          nu = lambda;
        else
          continue;
      }
      if (cur == nu) continue;
      inst.x.set(e, nu);
      c.update(e, nu);
      auto rep = validate_coarsening(inst.x, c.output(), c.declared_eps(),
                                     c.declared_delta());
      REQUIRE(rep.pass());
      check_strong_slacks(inst.x, c.output(), cfg.eps, cfg.gamma);
    }
  }
}

TEST_CASE("uniform coarsener rejects a different lambda") {
  std::mt19937_64 rng(137);
  auto inst = naive::random_bipartite_instance(rng, 8, 8, 30);
  Fp lambda = Fp::pow2(8);
  set_uniform(inst, lambda);
  UniformCoarsenerConfig cfg{Fp::pow2(3), Fp::pow2(6), 1, lambda};
  UniformCoarsener c(&inst.g, inst.x, det_split_backend(cfg.gamma), cfg);
  EdgeId free_edge = kNoEdge;
  for (EdgeId e : inst.g.edge_ids())
    if (inst.x.get(e).is_zero()) free_edge = e;
  if (free_edge == kNoEdge) {
    free_edge = inst.x.support().front();
    c.update(free_edge, Fp::zero());
  }
  CHECK_THROWS_AS(c.update(free_edge, Fp::pow2(4)), InputError);
}

TEST_CASE("general coarsener: all-heavy input passes through exactly") {
  std::mt19937_64 rng(139);
  auto inst = naive::random_bipartite_instance(rng, 12, 12, 60);
  naive::randomize_weights(rng, inst.g, inst.x, Fp::pow2(8));
  GeneralCoarsenerConfig cfg{Fp::pow2(5), Fp::pow2(16), SplitKind::det, 3};
  // delta = gamma/16 = 2^-20; all weights >= 2^-8 are heavy.
  GeneralCoarsener c(&inst.g, inst.x, cfg);
  REQUIRE(c.output().support_size() == inst.x.support_size());
  for (const auto& [e, w] : inst.x.entries()) REQUIRE(c.output().get(e) == w);
  // Heavy updates stay exact.
  auto ids = inst.g.edge_ids();
  for (int step = 0; step < 40; ++step) {
    EdgeId e = ids[std::uniform_int_distribution<size_t>(0, ids.size() - 1)(rng)];
    Fp cur = inst.x.get(e);
    Fp nu = cur.is_zero() ? Fp::pow2(7) : Fp::zero();
    auto [u, v] = inst.g.endpoints(e);
    if (!nu.is_zero() && (inst.x.load(u) + nu.raw() > kOneRaw ||
                          inst.x.load(v) + nu.raw() > kOneRaw))
      continue;
    inst.x.set(e, nu);
    c.update(e, nu);
    REQUIRE(c.output().get(e) == nu);
  }
}

TEST_CASE("general coarsener: mixed streams validate at declared parameters") {
  std::mt19937_64 rng(149);
  for (auto kind : {SplitKind::det, SplitKind::rand}) {
    auto inst = naive::random_bipartite_instance(rng, 12, 12, 90);
    GeneralCoarsenerConfig cfg{Fp::pow2(5), Fp::pow2(16), kind, 11};
    // Initial vector mixes classes around delta = 2^-20.
    for (EdgeId e : inst.g.edge_ids()) {
      int band = std::uniform_int_distribution<int>(0, 2)(rng);
      uint64_t raw = band == 0   ? Fp::pow2(6).raw()
                     : band == 1 ? Fp::pow2(22).raw() + e
                                 : Fp::pow2(26).raw() + e;
      auto [u, v] = inst.g.endpoints(e);
      if (inst.x.load(u) + raw > kOneRaw || inst.x.load(v) + raw > kOneRaw)
        continue;
      inst.x.set(e, Fp::from_raw(raw));
    }
    GeneralCoarsener c(&inst.g, inst.x, cfg);
    REQUIRE(validate_coarsening(inst.x, c.output(), c.declared_eps(),
                                c.declared_delta())
                .pass());
    auto ids = inst.g.edge_ids();
    for (int step = 0; step < 300; ++step) {
      EdgeId e =
          ids[std::uniform_int_distribution<size_t>(0, ids.size() - 1)(rng)];
      Fp cur = inst.x.get(e);
      int band = std::uniform_int_distribution<int>(0, 3)(rng);
      uint64_t raw = band == 0   ? 0
                     : band == 1 ? Fp::pow2(6).raw()
                     : band == 2 ? Fp::pow2(22).raw() + step
                                 : Fp::pow2(26).raw() + step;
      auto [u, v] = inst.g.endpoints(e);
      if (raw != 0 && (inst.x.load(u) - cur.raw() + raw > kOneRaw ||
                       inst.x.load(v) - cur.raw() + raw > kOneRaw))
        continue;
      Fp nu = Fp::from_raw(raw);
      inst.x.set(e, nu);
      c.update(e, nu);
      auto rep = validate_coarsening(inst.x, c.output(), c.declared_eps(),
                                     c.declared_delta());
      REQUIRE(rep.pass());
    }
  }
}

TEST_CASE("adaptive coarsener: all-heavy input leaves the sampler idle") {
  std::mt19937_64 rng(151);
  auto inst = naive::random_bipartite_instance(rng, 10, 10, 50);
  naive::randomize_weights(rng, inst.g, inst.x, Fp::pow2(10));
  AdaptiveCoarsenerConfig cfg;
  cfg.eps = Fp::pow2(8);  // delta = 2^-24; everything above
  cfg.seed = 2;
  AdaptiveCoarsener c(&inst.g, inst.x, cfg);
  REQUIRE(c.output().support_size() == inst.x.support_size());
  for (const auto& [e, w] : inst.x.entries()) REQUIRE(c.output().get(e) == w);
  CHECK(c.last_resample_attempts() == 1);
}

TEST_CASE("adaptive coarsener: expected resample attempts stay near one") {
  std::mt19937_64 rng(157);
  size_t total_attempts = 0;
  const int runs = 200;
  for (int run = 0; run < runs; ++run) {
    auto inst = naive::random_bipartite_instance(rng, 16, 16, 140);
    Fp lambda = Fp::pow2(28);
    set_uniform(inst, lambda);  // light and uniform (delta = 2^-24)
    AdaptiveCoarsenerConfig cfg;
    cfg.eps = Fp::pow2(8);
    cfg.seed = static_cast<uint64_t>(run);
    AdaptiveCoarsener c(&inst.g, inst.x, cfg);
    total_attempts += c.last_resample_attempts();
  }
  CHECK(total_attempts <= 4 * runs);
}

TEST_CASE("adaptive coarsener: streams validate at declared parameters") {
  std::mt19937_64 rng(163);
  auto inst = naive::random_bipartite_instance(rng, 14, 14, 100);
  AdaptiveCoarsenerConfig cfg;
  cfg.eps = Fp::pow2(8);  // declared (230*2^-8, 2^-24)
  cfg.seed = 9;
  for (EdgeId e : inst.g.edge_ids()) {
    int band = std::uniform_int_distribution<int>(0, 1)(rng);
    uint64_t raw = band == 0 ? Fp::pow2(5).raw() : Fp::pow2(26).raw() + e;
    auto [u, v] = inst.g.endpoints(e);
    if (inst.x.load(u) + raw > kOneRaw || inst.x.load(v) + raw > kOneRaw)
      continue;
    inst.x.set(e, Fp::from_raw(raw));
  }
  AdaptiveCoarsener c(&inst.g, inst.x, cfg);
  auto ids = inst.g.edge_ids();
  for (int step = 0; step < 400; ++step) {
    EdgeId e = ids[std::uniform_int_distribution<size_t>(0, ids.size() - 1)(rng)];
    Fp cur = inst.x.get(e);
    int band = std::uniform_int_distribution<int>(0, 2)(rng);
    uint64_t raw = band == 0   ? 0
                   : band == 1 ? Fp::pow2(5).raw()
                               : Fp::pow2(26).raw() + step;
    auto [u, v] = inst.g.endpoints(e);
    if (raw != 0 && (inst.x.load(u) - cur.raw() + raw > kOneRaw ||
                     inst.x.load(v) - cur.raw() + raw > kOneRaw))
      continue;
    Fp nu = Fp::from_raw(raw);
    inst.x.set(e, nu);
    c.update(e, nu);
    auto rep = validate_coarsening(inst.x, c.output(), c.declared_eps(),
                                   c.declared_delta());
    REQUIRE(rep.pass());
  }
}

TEST_CASE("dyn_compose: three stream families validate per step") {
  for (auto family : {0, 1, 2}) {
    std::mt19937_64 rng(167 + family);
    auto inst = naive::random_bipartite_instance(rng, 12, 12, 80);
    // Bands: deletions / light 2^-20-ish / heavier 2^-6.
    for (EdgeId e : inst.g.edge_ids()) {
      uint64_t raw = (e % 2 == 0) ? Fp::pow2(6).raw() : Fp::pow2(20).raw() + e;
      auto [u, v] = inst.g.endpoints(e);
      if (inst.x.load(u) + raw > kOneRaw || inst.x.load(v) + raw > kOneRaw)
        continue;
      inst.x.set(e, Fp::from_raw(raw));
    }
    DynComposeConfig cfg;
    cfg.eps2 = Fp::pow2(7);
    cfg.seed = 21;
    DynCompose dc(&inst.g, inst.x, Backend::det, Fp::pow2(7), cfg);
    auto ids = inst.g.edge_ids();
    for (int step = 0; step < 200; ++step) {
      EdgeId e =
          ids[std::uniform_int_distribution<size_t>(0, ids.size() - 1)(rng)];
      Fp cur = inst.x.get(e);
      uint64_t raw;
      if (family == 1) {  // heavy-delete: remove heavy edges first
        raw = cur.raw() >= Fp::pow2(7).raw() ? 0 : cur.raw();
        if (raw == cur.raw() && step % 3 == 0) raw = 0;
      } else if (family == 2) {  // oscillating
        raw = step % 2 == 0 ? Fp::pow2(6).raw() : Fp::pow2(20).raw() + step;
      } else {  // random
        int band = std::uniform_int_distribution<int>(0, 2)(rng);
        raw = band == 0   ? 0
              : band == 1 ? Fp::pow2(6).raw()
                          : Fp::pow2(20).raw() + step;
      }
      auto [u, v] = inst.g.endpoints(e);
      if (raw != 0 && (inst.x.load(u) - cur.raw() + raw > kOneRaw ||
                       inst.x.load(v) - cur.raw() + raw > kOneRaw))
        continue;
      Fp nu = Fp::from_raw(raw);
      if (nu == cur) continue;
      inst.x.set(e, nu);
      dc.update(e, nu);
      auto rep = validate_coarsening(inst.x, dc.output(), dc.declared_eps(),
                                     dc.declared_delta());
      REQUIRE(rep.pass());
    }
  }
}
