#pragma once

#include <algorithm>
#include <chrono>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "dmr/common.hpp"
#include "dmr/decremental.hpp"
#include "dmr/fixed.hpp"
#include "dmr/frac_vector.hpp"
#include "dmr/graph.hpp"
#include "dmr/oracle.hpp"
#include "dmr/pipeline.hpp"
#include "dmr/rounder.hpp"
#include "dmr/stream.hpp"

namespace dmr {

enum class Algo { direct, pipeline, decremental };

struct RunConfig {
  Algo algo = Algo::direct;
  Backend backend = Backend::det;
  Fp eps;
  Fp delta = Fp::zero();
  bool slow_verify = false;
  bool track_mu = false;  // recompute mu(G) per step (slow mode tooling)
  uint64_t seed = 0;
};

struct RunRow {
  size_t step;
  int phase;
  size_t mu;
  size_t matching;
  Wide norm;
  uint64_t recourse_cum;
};

struct RunMetrics {
  std::vector<RunRow> rows;
  size_t steps = 0;
  uint64_t recourse_total = 0;
  double amortized_recourse = 0.0;
  size_t bound_violations = 0;   // pipeline: spec-bound misses (reported)
  double measured_constant = 0.0;  // pipeline: worst measured c
  int levels = 0;                // direct: rounder L (recourse ceiling input)
  // Wall-clock percentiles (ns/op); excluded from the deterministic output.
  double wall_p50 = 0, wall_p90 = 0, wall_p99 = 0;

  // Deterministic CSV. Schema v1, frozen; wall times are deliberately not
  // part of it so identical config+seed gives byte-identical output.
  void to_csv(std::ostream& out, bool decremental_schema) const {
    if (decremental_schema) {
      out << "# dmr-metrics v1 columns=step,phase,mu,matching,recourse_cum\n";
      for (const auto& r : rows)
        out << r.step << ',' << r.phase << ',' << r.mu << ',' << r.matching
            << ',' << r.recourse_cum << '\n';
    } else {
      out << "# dmr-metrics v1 columns=step,matching,norm,recourse_cum\n";
      for (const auto& r : rows)
        out << r.step << ',' << r.matching << ','
            << wide_units_to_string(r.norm) << ',' << r.recourse_cum << '\n';
    }
  }
};

namespace detail {

inline void finish_percentiles(std::vector<double>& wall, RunMetrics& m) {
  if (wall.empty()) return;
  std::sort(wall.begin(), wall.end());
  auto at = [&](double q) {
    size_t i = static_cast<size_t>(q * static_cast<double>(wall.size() - 1));
    return wall[i];
  };
  m.wall_p50 = at(0.50);
  m.wall_p90 = at(0.90);
  m.wall_p99 = at(0.99);
}

}  // namespace detail

// Executes one scenario. The graph/vector are consumed (mutated in place).
inline RunMetrics run_benchmark(DynGraph& g, const FracVector& x0,
                                const UpdateStream& stream, RunConfig cfg) {
  RunMetrics metrics;
  std::vector<double> wall;
  wall.reserve(stream.events.size());
  auto resolve = [&](const UpdateEvent& ev) {
    EdgeId e = g.find_edge(ev.u, ev.v);
    if (e == kNoEdge)
      throw InputError("stream event on absent edge (" + std::to_string(ev.u) +
                       "," + std::to_string(ev.v) + ")");
    return e;
  };

  if (cfg.algo == Algo::decremental) {
    std::vector<EdgeId> deletions;
    deletions.reserve(stream.events.size());
    for (const auto& ev : stream.events) {
      if (!ev.value.is_zero())
        throw RegimeError("decremental stream contains a non-deletion");
      deletions.push_back(resolve(ev));
    }
    DecrementalConfig dcfg;
    dcfg.eps = cfg.eps;
    dcfg.slow_verify = cfg.slow_verify;
    dcfg.hard_fail = cfg.slow_verify;
    auto t0 = std::chrono::steady_clock::now();
    DecrementalResult res = decremental_run(g, deletions, dcfg);
    auto t1 = std::chrono::steady_clock::now();
    double per_op =
        std::chrono::duration<double, std::nano>(t1 - t0).count() /
        std::max<size_t>(1, deletions.size());
    wall.assign(deletions.size(), per_op);
    for (const auto& s : res.steps)
      metrics.rows.push_back(
          {s.step, s.phase, s.mu, s.matching, 0, s.recourse_cum});
    metrics.steps = res.steps.size();
    metrics.recourse_total = res.recourse_total;
    metrics.amortized_recourse =
        static_cast<double>(res.recourse_total) /
        std::max<size_t>(1, res.steps.size());
    detail::finish_percentiles(wall, metrics);
    return metrics;
  }

  if (cfg.algo == Algo::direct) {
    RounderConfig rcfg;
    rcfg.eps = cfg.eps;
    rcfg.delta = cfg.delta.is_zero() ? stream.delta : cfg.delta;
    rcfg.slow_verify = cfg.slow_verify;
    DynRounder r(&g, x0, rcfg);
    metrics.levels = r.levels();
    size_t step = 0;
    for (const auto& ev : stream.events) {
      EdgeId e = resolve(ev);
      auto t0 = std::chrono::steady_clock::now();
      r.update(e, ev.value);
      auto t1 = std::chrono::steady_clock::now();
      wall.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
      ++step;
      size_t mu_now = cfg.track_mu ? mu(g) : 0;
      metrics.rows.push_back(
          {step, 0, mu_now, r.matching_size(), r.x().norm(),
           r.recourse_total()});
    }
    metrics.steps = step;
    metrics.recourse_total = r.recourse_total();
    metrics.amortized_recourse =
        static_cast<double>(metrics.recourse_total) / std::max<size_t>(1, step);
    detail::finish_percentiles(wall, metrics);
    return metrics;
  }

  // Pipeline.
  PipelineConfig pcfg;
  pcfg.eps = cfg.eps;
  pcfg.backend = cfg.backend;
  pcfg.seed = cfg.seed;
  pcfg.slow_verify = cfg.slow_verify;
  Pipeline p(&g, x0, pcfg);
  size_t step = 0;
  for (const auto& ev : stream.events) {
    EdgeId e = resolve(ev);
    auto t0 = std::chrono::steady_clock::now();
    p.update(e, ev.value);
    auto t1 = std::chrono::steady_clock::now();
    wall.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
    ++step;
    if (!p.meets_spec_bound()) ++metrics.bound_violations;
    metrics.measured_constant =
        std::max(metrics.measured_constant, p.measured_constant());
    metrics.rows.push_back({step, static_cast<int>(p.reinit_count()), 0,
                            p.matching_size(), p.x().norm(),
                            p.recourse_total()});
  }
  metrics.steps = step;
  metrics.recourse_total = p.recourse_total();
  metrics.amortized_recourse =
      static_cast<double>(metrics.recourse_total) / std::max<size_t>(1, step);
  detail::finish_percentiles(wall, metrics);
  return metrics;
}

}  // namespace dmr
