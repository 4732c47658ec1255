#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "dmr/common.hpp"
#include "dmr/fixed.hpp"
#include "dmr/frac_vector.hpp"
#include "dmr/graph.hpp"
#include "dmr/matching.hpp"
#include "dmr/oracle.hpp"
#include "dmr/rounder.hpp"

namespace dmr {

// Reference eps-robust decremental fractional oracle: each phase starts from
// the indicator vector of a fresh maximum matching (||x^i|| = mu at phase
// start); the phase ends once the surviving value drops below (1-eps) mu.
// Since mu(G) only decreases under deletions, the survivor stays
// (1-eps)-approximate throughout the phase. Desk-scale correctness stand-in
// for the fractional algorithms the framework is designed to wrap.
class ReferenceRobustFractional {
 public:
  ReferenceRobustFractional(DynGraph* g, Fp eps) : g_(g), eps_(eps) {}

  // Computes x^i for a new phase from the current graph.
  FracVector start_phase() {
    Matching m = max_matching_oracle(*g_);
    mu_start_ = m.size();
    value_remaining_ = mu_start_;
    FracVector x(g_);
    for (EdgeId e : m.edges()) x.set(e, Fp::one());
    in_phase_support_.assign(g_->edge_capacity(), 0);
    for (EdgeId e : m.edges()) in_phase_support_[e] = 1;
    ++phase_index_;
    return x;
  }

  // Records a deletion; returns true if the phase survives it.
  bool on_delete(EdgeId e) {
    if (e < in_phase_support_.size() && in_phase_support_[e]) {
      in_phase_support_[e] = 0;
      --value_remaining_;
    }
    // Phase active iff value_remaining >= (1 - eps) mu_start, exactly.
    return (static_cast<Wide>(value_remaining_) << kFracBits) >=
           static_cast<Wide>(kOneRaw - eps_.raw()) * mu_start_;
  }

  size_t mu_start() const { return mu_start_; }
  size_t value_remaining() const { return value_remaining_; }
  int phase_index() const { return phase_index_; }

 private:
  DynGraph* g_;
  Fp eps_;
  size_t mu_start_ = 0;
  size_t value_remaining_ = 0;
  std::vector<uint8_t> in_phase_support_;
  int phase_index_ = 0;
};

struct DecrementalStepMetrics {
  size_t step;
  int phase;
  size_t mu;  // only populated in slow mode (0 otherwise)
  size_t matching;
  uint64_t recourse_cum;
};

struct DecrementalResult {
  std::vector<DecrementalStepMetrics> steps;
  int phases = 0;
  uint64_t recourse_total = 0;
  size_t violations = 0;  // slow mode: steps where |M| < (1-2eps) mu(G)
  uint64_t rounder_init_edges = 0;  // sum of |supp(x^i)| across phases
};

struct DecrementalConfig {
  Fp eps;
  bool slow_verify = false;  // recompute mu(G) and check (1-2eps) per step
  Fp delta = Fp::one();      // promise floor for the rounder (x^i integral)
  bool hard_fail = true;     // throw on a slow-mode violation
};

// The decremental framework: rounder re-initialized on the oracle's phase
// boundaries, update(e, 0) per deletion in between. Maintains
// |M| >= (1-2eps) mu(G) after every deletion.
inline DecrementalResult decremental_run(DynGraph& g,
                                         const std::vector<EdgeId>& deletions,
                                         DecrementalConfig cfg) {
  DecrementalResult res;
  ReferenceRobustFractional oracle(&g, cfg.eps);
  FracVector x0 = oracle.start_phase();
  res.rounder_init_edges += x0.support_size();
  RounderConfig rcfg;
  // The hierarchy maintains (1-2eps')||x||; eps' = eps/2 presents the
  // (1-eps)-approximate rounding the framework chain needs:
  // |M| >= (1-eps)||x|| >= (1-eps)^2 mu >= (1-2eps) mu.
  rcfg.eps = Fp::from_raw(std::max<uint64_t>(1, cfg.eps.raw() / 2));
  rcfg.delta = cfg.delta;
  rcfg.expect_bipartite_fractional = g.bipartite_declared();
  DynRounder rounder(&g, x0, rcfg);
  res.phases = 1;

  for (size_t step = 0; step < deletions.size(); ++step) {
    EdgeId e = deletions[step];
    if (!g.alive(e)) throw RegimeError("deletion of a non-live edge");
    rounder.update(e, Fp::zero());
    bool phase_alive = oracle.on_delete(e);
    g.remove_edge(e);
    if (!phase_alive && g.edge_count() > 0) {
      FracVector xi = oracle.start_phase();
      res.rounder_init_edges += xi.support_size();
      uint64_t carried = rounder.recourse_total();
      std::vector<EdgeId> old_matching = rounder.matching_edges();
      rounder.init(xi);
      res.recourse_total += carried;
      // The phase rebuild's matching symmetric difference is recourse too.
      for (EdgeId o : old_matching)
        if (!rounder.in_matching(o)) ++res.recourse_total;
      for (EdgeId m : rounder.matching_edges()) {
        bool was = false;
        for (EdgeId o : old_matching) was |= o == m;
        if (!was) ++res.recourse_total;
      }
      ++res.phases;
    }
    DecrementalStepMetrics m{};
    m.step = step + 1;
    m.phase = oracle.phase_index();
    m.matching = rounder.matching_size();
    m.recourse_cum = res.recourse_total + rounder.recourse_total();
    if (cfg.slow_verify) {
      m.mu = mu(g);
      // |M| >= (1-2eps) mu, exactly.
      uint64_t two_eps =
          cfg.eps.raw() >= (kOneRaw >> 1) ? kOneRaw : 2 * cfg.eps.raw();
      bool ok = (static_cast<Wide>(m.matching) << kFracBits) >=
                static_cast<Wide>(kOneRaw - two_eps) * m.mu;
      if (!ok) {
        ++res.violations;
        if (cfg.hard_fail)
          throw VerifyError("decremental: |M| < (1-2eps) mu at step " +
                            std::to_string(m.step) + " (|M|=" +
                            std::to_string(m.matching) + ", mu=" +
                            std::to_string(m.mu) + ")");
      }
    }
    res.steps.push_back(m);
  }
  res.recourse_total += rounder.recourse_total();
  return res;
}

}  // namespace dmr
