#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dmr/adaptive_coarsener.hpp"
#include "dmr/coarsening.hpp"
#include "dmr/coarseners.hpp"
#include "dmr/common.hpp"
#include "dmr/edge_set.hpp"
#include "dmr/fixed.hpp"
#include "dmr/frac_vector.hpp"
#include "dmr/graph.hpp"
#include "dmr/rounder.hpp"

namespace dmr {

enum class Backend { det, rand, adaptive };

inline const char* backend_name(Backend b) {
  switch (b) {
    case Backend::det: return "det";
    case Backend::rand: return "rand";
    default: return "adaptive";
  }
}

namespace detail {

// Searches (eps_b, gamma) so the general coarsener's declared slack
// max(8(eps_b+gamma), 5 gamma log2(n/gamma)/eps_b) stays within budget.
inline GeneralCoarsenerConfig derive_general_config(const DynGraph& g,
                                                    Fp budget, SplitKind kind,
                                                    uint64_t seed) {
  Fp eps_b = snap_down_pow2(Fp::from_raw(budget.raw() / 16));
  if (eps_b.is_zero())
    throw ParameterError("coarsener budget too small for the grid");
  uint64_t lg_n = detail::ceil_log2(g.vertex_count());
  for (int gshift = eps_b.top_bit() + 1; gshift <= kFracBits - 8; ++gshift) {
    Fp gamma = Fp::pow2(gshift);
    uint64_t lg_g = detail::ceil_log2(kOneRaw / gamma.raw() + 1);
    Wide term1 = static_cast<Wide>(8) * (eps_b.raw() + gamma.raw());
    Wide term2 = ((static_cast<Wide>(5) * gamma.raw() * (lg_n + lg_g))
                  << kFracBits) /
                 eps_b.raw();
    if (term1 > budget.raw() || term2 > budget.raw()) continue;
    // Grid feasibility: gamma/16 and gamma/n^2 and the class step must exist.
    Wide n2 = static_cast<Wide>(g.vertex_count()) * g.vertex_count();
    uint64_t phi = static_cast<uint64_t>(gamma.raw() / n2);
    if (gamma.raw() / 16 == 0 || phi == 0) break;
    if ((static_cast<Wide>(phi) * eps_b.raw() >> kFracBits) == 0) break;
    return GeneralCoarsenerConfig{eps_b, gamma, kind, seed};
  }
  throw ParameterError("no feasible (eps, gamma) for the coarsener budget");
}

}  // namespace detail

// Builds a dynamic coarsening backend whose declared output slack does not
// exceed eps_budget.
inline std::unique_ptr<CoarsenerBase> make_coarsener(Backend backend,
                                                     const DynGraph* g,
                                                     const FracVector& x,
                                                     Fp eps_budget,
                                                     uint64_t seed) {
  switch (backend) {
    case Backend::det: {
      auto cfg = detail::derive_general_config(*g, eps_budget, SplitKind::det,
                                               seed);
      return std::make_unique<GeneralCoarsener>(g, x, cfg);
    }
    case Backend::rand: {
      auto cfg = detail::derive_general_config(*g, eps_budget, SplitKind::rand,
                                               seed);
      return std::make_unique<GeneralCoarsener>(g, x, cfg);
    }
    case Backend::adaptive:
    default: {
      AdaptiveCoarsenerConfig cfg;
      cfg.eps = snap_down_pow2(Fp::from_raw(eps_budget.raw() / 230));
      if (cfg.eps.is_zero())
        throw ParameterError("adaptive budget too small for the grid");
      cfg.seed = seed;
      return std::make_unique<AdaptiveCoarsener>(g, x, cfg);
    }
  }
}

struct PipelineConfig {
  Fp eps;  // coarsening slack budget; also the inner rounder's eps
  Backend backend = Backend::det;
  uint64_t seed = 0;
  bool slow_verify = false;
};

// The coarsen-then-round construction R*: a dynamic coarsener maintains an
// (eps_C, delta_C)-coarsening of x; at (re)initialization its output is made
// bounded, split at the 2*delta_p = delta_C weight threshold into
// x_Small/x_Large, scaled by alpha = (1 + 3(eps_C + delta_C))^-1 and handed
// to the hierarchical rounder. Light updates trim one x_Small edge per
// endpoint and advance C by 12*delta_p; C > eps_C ||x0|| re-initializes.
class Pipeline {
 public:
  Pipeline(const DynGraph* g, const FracVector& x, PipelineConfig cfg)
      : g_(g), cfg_(cfg), x_(g), small_(g), large_(g), small_support_(g) {
    if (!g->bipartite_declared())
      throw CapabilityError("pipeline rounds bipartite fractional matchings");
    coarsener_ = make_coarsener(cfg.backend, g, x, cfg.eps, cfg.seed);
    eps_c_ = coarsener_->declared_eps();
    delta_c_ = coarsener_->declared_delta();
    // alpha = (1 + 3(eps_C + delta_C))^-1 >= 1/2 required.
    Wide denom = Wide{kOneRaw} + 3 * (static_cast<Wide>(eps_c_.raw()) +
                                      delta_c_.raw());
    if (denom > 2 * Wide{kOneRaw})
      throw ParameterError("pipeline: 3(eps+2delta) above 1, alpha below 1/2");
    alpha_ = Fp::from_raw(
        static_cast<uint64_t>((Wide{kOneRaw} << kFracBits) / denom));
    delta_r_ = mul_floor(alpha_, delta_c_);
    x_ = x;
    reinit();
  }

  ChangeLog update(EdgeId e, Fp nu) {
    log_.clear();
    Fp old = x_.get(e);
    if (old == nu) return log_;
    coarsener_->update(e, nu);  // keeps x^{A*} current; consumed at re-inits
    x_.set(e, nu);
    if (!old.is_zero()) apply_event(e, old, /*deletion=*/true);
    if (!nu.is_zero()) apply_event(e, nu, /*deletion=*/false);
    if (reinit_due()) reinit();
    if (cfg_.slow_verify) verify();
    return log_;
  }

  size_t matching_size() const { return rounder_->matching_size(); }
  const std::vector<EdgeId>& matching_edges() const {
    return rounder_->matching_edges();
  }
  bool in_matching(EdgeId e) const { return rounder_->in_matching(e); }
  uint64_t recourse_total() const {
    return recourse_base_ + rounder_->recourse_total();
  }
  const FracVector& x() const { return x_; }
  const FracVector& scaled_input() const { return rounder_->x(); }
  Fp alpha() const { return alpha_; }
  Fp coarsener_eps() const { return eps_c_; }
  Fp coarsener_delta() const { return delta_c_; }
  size_t reinit_count() const { return reinit_count_; }
  const CoarsenerBase& coarsener() const { return *coarsener_; }

  // Exact per-step checks; throws VerifyError when any fires.
  void verify() const {
    const FracVector& xh = rounder_->x();
    if (!xh.is_fractional_matching())
      throw VerifyError("pipeline: scaled vector violates x-hat(v) <= 1");
    for (EdgeId e : rounder_->matching_edges())
      if (!x_.in_support(e))
        throw VerifyError("pipeline: matching edge outside supp(x)");
    for (const auto& [e, w] : xh.entries())
      if (!x_.in_support(e))
        throw VerifyError("pipeline: x-hat support outside supp(x)");
  }

  // |M| >= (1 - 40(eps + delta_p)) ||x||, exact; delta_p = delta_C / 2.
  bool meets_spec_bound() const {
    Wide factor = static_cast<Wide>(40) * (cfg_.eps.raw() + delta_c_.raw() / 2);
    if (factor >= kOneRaw) return true;  // vacuous at large eps
    Wide lhs = static_cast<Wide>(matching_size()) << 104;
    Wide rhs = (Wide{kOneRaw} - factor) * x_.norm();
    return lhs >= rhs;
  }
  // Measured constant c with |M| = (1 - c(eps+delta)) ||x||, for reporting.
  double measured_constant() const {
    double norm = static_cast<double>(x_.norm()) * 0x1p-52;
    if (norm <= 0) return 0.0;
    double eps_delta =
        cfg_.eps.to_double() + delta_c_.to_double() / 2;
    double ratio = static_cast<double>(matching_size()) / norm;
    return (1.0 - ratio) / eps_delta;
  }

 private:
  bool reinit_due() const {
    // C = counter * 12 * delta_p = counter * 6 * delta_C; C > eps ||x0||.
    return static_cast<Wide>(counter_) * 6 * delta_c_.raw() * kOneRaw >
           static_cast<Wide>(eps_c_.raw()) * norm0_;
  }

  void apply_event(EdgeId e, Fp w, bool deletion) {
    if (w > delta_c_) {  // heavy path
      if (deletion) {
        if (!large_.get(e).is_zero()) {
          large_.set(e, Fp::zero());
          feed_rounder(e, Fp::zero());
        }
      } else {
        large_.set(e, w);
        feed_rounder(e, mul_floor(alpha_, w));
      }
      return;
    }
    // Light path: trim one x_Small edge at each endpoint, then the edge
    // itself on deletion; insertions are otherwise ignored.
    auto [u, v] = g_->endpoints(e);
    for (VertexId end : {u, v}) {
      EdgeId f = small_support_.any_incident(end);
      if (f == kNoEdge || f == e) continue;
      small_support_.erase(f);
      small_.set(f, Fp::zero());
      feed_rounder(f, Fp::zero());
    }
    if (deletion && !small_.get(e).is_zero()) {
      small_support_.erase(e);
      small_.set(e, Fp::zero());
      feed_rounder(e, Fp::zero());
    }
    ++counter_;
  }

  void feed_rounder(EdgeId e, Fp scaled) {
    ChangeLog sub = rounder_->update(e, scaled);
    log_.insert(log_.end(), sub.begin(), sub.end());
  }

  void reinit() {
    std::vector<EdgeId> old_matching =
        rounder_ ? rounder_->matching_edges() : std::vector<EdgeId>{};
    FracVector bounded = bounded_coarsening(x_, coarsener_->output(), eps_c_,
                                            delta_c_);
    small_ = FracVector(g_);
    large_ = FracVector(g_);
    small_support_.attach(g_);
    FracVector xhat(g_);
    for (const auto& [e, w] : bounded.entries()) {
      if (x_.get(e) > delta_c_) {
        large_.set(e, w);
      } else {
        small_.set(e, w);
        small_support_.insert(e);
      }
      xhat.set(e, mul_floor(alpha_, w));
    }
    RounderConfig rcfg;
    rcfg.eps = cfg_.eps;
    rcfg.delta = delta_r_;
    rcfg.slow_verify = false;  // pipeline::verify covers the slow checks
    rcfg.pointer_fastpath = true;
    rcfg.expect_bipartite_fractional = true;
    if (rounder_) {
      recourse_base_ += rounder_->recourse_total();
      rounder_->init(xhat);
    } else {
      rounder_ = std::make_unique<DynRounder>(g_, xhat, rcfg);
    }
    counter_ = 0;
    norm0_ = x_.norm();
    ++reinit_count_;
    // Matching diff across the re-init counts as recourse.
    for (EdgeId e : old_matching)
      if (!rounder_->in_matching(e)) {
        auto [u, v] = g_->endpoints(e);
        log_.push_back({false, u, v});
        ++recourse_base_;
      }
    for (EdgeId e : rounder_->matching_edges()) {
      bool was = false;
      for (EdgeId o : old_matching) was |= o == e;
      if (!was) {
        auto [u, v] = g_->endpoints(e);
        log_.push_back({true, u, v});
        ++recourse_base_;
      }
    }
    if (cfg_.slow_verify) verify();
  }

  const DynGraph* g_;
  PipelineConfig cfg_;
  std::unique_ptr<CoarsenerBase> coarsener_;
  Fp eps_c_, delta_c_, alpha_, delta_r_;
  FracVector x_, small_, large_;
  IncidentEdgeSet small_support_;
  std::unique_ptr<DynRounder> rounder_;
  uint64_t counter_ = 0;
  Wide norm0_ = 0;
  size_t reinit_count_ = 0;
  uint64_t recourse_base_ = 0;
  ChangeLog log_;
};

struct DynComposeConfig {
  Fp eps2;  // power of two; also delta2 of the composed output
  uint64_t seed = 0;
};

// Dynamic composition of a coarsener C1 with the rounder's coarsening view:
// the light part (x_e < eps2) of C1's output is snapshotted into a second
// hierarchy every eps1 ||x|| / delta1 updates (deletions propagate between
// refreshes; a norm-drift guard of [s/2, 2s] bounds the stale-snapshot
// slack), and the composed output is x^(k) of that hierarchy plus the exact
// heavy part. Validates at (40(eps1 + eps2), eps2) from the explicit chain:
// stale light snapshot <= ~7 eps1 against s <= 2||x||, composed with the
// (2 eps2, eps2) view.
class DynCompose {
 public:
  DynCompose(const DynGraph* g, const FracVector& x, Backend backend,
             Fp eps1_budget, DynComposeConfig cfg)
      : g_(g), cfg_(cfg), x_(g) {
    if (snap_down_pow2(cfg.eps2) != cfg.eps2)
      throw ParameterError("dyn_compose: eps2 must be a power of two");
    coarsener_ = make_coarsener(backend, g, x, eps1_budget, cfg.seed);
    eps1_ = coarsener_->declared_eps();
    delta1_ = coarsener_->declared_delta();
    if (static_cast<Wide>(2) * delta1_.raw() > cfg.eps2.raw())
      throw ParameterError("dyn_compose: requires eps2 >= 2*delta1");
    k_ = cfg.eps2.top_bit();
    x_ = x;
    refresh();
  }

  void update(EdgeId e, Fp nu) {
    coarsener_->update(e, nu);
    x_.set(e, nu);
    ++updates_;
    // Any change to a snapshotted light edge is a deletion from the frozen y.
    if (rounder_ && rounder_->x().in_support(e)) rounder_->update(e, Fp::zero());
    if (refresh_due()) refresh();
  }

  FracVector output() const {
    FracVector out = rounder_ ? rounder_->coarsening_view(k_) : FracVector(g_);
    for (const auto& [e, w] : x_.entries())
      if (w >= cfg_.eps2) out.set(e, w);
    return out;
  }

  Fp declared_eps() const {
    Wide raw = static_cast<Wide>(40) * (eps1_.raw() + cfg_.eps2.raw());
    return raw > kOneRaw ? Fp::one() : Fp::from_raw(static_cast<uint64_t>(raw));
  }
  Fp declared_delta() const { return cfg_.eps2; }
  size_t refresh_count() const { return refresh_count_; }
  const FracVector& input() const { return x_; }

 private:
  bool refresh_due() const {
    // updates > eps1 ||x0|| / eps2, exactly. The divisor is the stage-2
    // weight scale: the frozen snapshot carries values up to eps2, so the
    // stability argument must count differing edges at that scale.
    bool budget = static_cast<Wide>(updates_) * cfg_.eps2.raw() * kOneRaw >
                  static_cast<Wide>(eps1_.raw()) * norm0_;
    Wide n = x_.norm();
    bool drift = n > 2 * norm0_ || 2 * n < norm0_;
    return budget || (drift && norm0_ != n);
  }

  void refresh() {
    FracVector y(g_);
    for (const auto& [e, w] : coarsener_->output().entries())
      if (x_.get(e) < cfg_.eps2) y.set(e, w);
    RounderConfig rcfg;
    rcfg.eps = cfg_.eps2;
    rcfg.delta = delta1_;
    rcfg.pointer_fastpath = false;  // coarsener role
    rcfg.expect_bipartite_fractional = false;
    if (rounder_)
      rounder_->init(y);
    else
      rounder_ = std::make_unique<DynRounder>(g_, y, rcfg);
    updates_ = 0;
    norm0_ = x_.norm();
    ++refresh_count_;
  }

  const DynGraph* g_;
  DynComposeConfig cfg_;
  std::unique_ptr<CoarsenerBase> coarsener_;
  std::unique_ptr<DynRounder> rounder_;
  Fp eps1_, delta1_;
  int k_ = 0;
  FracVector x_;
  uint64_t updates_ = 0;
  Wide norm0_ = 0;
  size_t refresh_count_ = 0;
};

}  // namespace dmr
