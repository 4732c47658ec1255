#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dmr/coarsening.hpp"
#include "dmr/coarseners.hpp"
#include "dmr/common.hpp"
#include "dmr/fixed.hpp"
#include "dmr/frac_vector.hpp"
#include "dmr/graph.hpp"
#include "dmr/set_sampler.hpp"

namespace dmr {

struct AdaptiveCoarsenerConfig {
  Fp eps;  // snapped down to a power of two (exact shift probabilities)
  uint64_t seed = 0;
  int max_resample = 64;
  GeometricMode mode = GeometricMode::skip;
};

// Output-adaptive dynamic (O(eps), eps^3)-coarsening via the set sampler:
// every edge with x_e <= eps^3 is sampled independently with probability
// x_e * eps^-3 and output at weight eps^3; heavier edges pass through. The
// output is resampled until the light part validates at (100 eps, eps^3),
// and re-initialized once the update counter C (+eps^3 per light update)
// exceeds ||x0|| eps. Between re-inits the stability lemma keeps the output
// a (230 eps, eps^3)-coarsening: 30 eps + 2*100 eps with gamma = 100 eps.
class AdaptiveCoarsener : public CoarsenerBase {
 public:
  AdaptiveCoarsener(const DynGraph* g, const FracVector& x,
                    AdaptiveCoarsenerConfig cfg)
      : g_(g), cfg_(cfg), x_(g), output_(g), light_output_(g) {
    if (cfg_.eps.is_zero())
      throw ParameterError("adaptive coarsener: eps must be positive");
    eps_ = snap_down_pow2(cfg_.eps);
    k_ = eps_.top_bit();
    if (3 * k_ > kFracBits)
      throw ParameterError("adaptive coarsener: eps^3 underflows the grid");
    delta_ = Fp::pow2(3 * k_);
    x_ = x;
    uint32_t universe = static_cast<uint32_t>(g_->edge_capacity());
    std::vector<Fp> probs(universe, Fp::zero());
    for (const auto& [e, w] : x_.entries())
      if (w <= delta_) probs[e] = probability_of(e, w);
    sampler_ = std::make_unique<SetSampler>(universe, probs, cfg_.seed,
                                            cfg_.mode);
    resample();
    norm0_ = x_.norm();
    light_steps_ = 0;
  }

  CoarsenerDiff update(EdgeId e, Fp nu) override {
    CoarsenerDiff diff;
    Fp old = x_.get(e);
    if (old == nu) return diff;
    bool old_light = !old.is_zero() && old <= delta_;
    bool new_light = !nu.is_zero() && nu <= delta_;
    x_.set(e, nu);
    // Keep sampler probabilities in sync with the light support.
    if (e < sampler_->size())
      sampler_->set(e, new_light ? probability_of(e, nu) : Fp::zero());
    else if (new_light)
      throw PromiseError("adaptive coarsener: edge id beyond sampler universe");

    // Heavy side passes through exactly.
    bool old_heavy = !old.is_zero() && !old_light;
    bool new_heavy = !nu.is_zero() && !new_light;
    if (old_heavy && !new_heavy) set_output(e, Fp::zero(), diff);
    if (new_heavy) set_output(e, nu, diff);

    // Light side: deletions are mirrored, insertions deferred to re-init.
    if (old_light && !new_heavy) {
      if (!output_.get(e).is_zero()) set_output(e, Fp::zero(), diff);
    }
    if (old_light && new_heavy) {
      // value replaced above; nothing further
    }
    if (old_light || new_light) {
      // each light sub-event advances C by eps^3
      light_steps_ += (old_light ? 1 : 0) + (new_light ? 1 : 0);
      if (static_cast<Wide>(light_steps_) * delta_.raw() * kOneRaw >
          static_cast<Wide>(cfg_.eps.raw()) * norm0_) {
        reinit(diff);
      }
    }
    return diff;
  }

  const FracVector& output() const override { return output_; }
  Fp declared_eps() const override {
    Wide raw = static_cast<Wide>(230) * eps_.raw();
    return raw > kOneRaw ? Fp::one() : Fp::from_raw(static_cast<uint64_t>(raw));
  }
  Fp declared_delta() const override { return delta_; }
  Fp eps_snapped() const { return eps_; }
  size_t last_resample_attempts() const { return last_attempts_; }
  size_t reinit_count() const { return reinit_count_; }
  const FracVector& input() const { return x_; }

 private:
  Fp probability_of(EdgeId e, Fp w) const {
    // p = x_e * eps^-3, an exact left shift for power-of-two eps.
    uint64_t raw = w.raw() << (3 * k_);
    if (raw > kOneRaw)
      throw PromiseError("adaptive coarsener: light weight above eps^3");
    Fp p = Fp::from_raw(raw);
    if (!p.is_zero() && p < kSamplerPMin)
      throw PromiseError("adaptive coarsener: probability below sampler floor on edge " +
                         std::to_string(e));
    return p;
  }

  void set_output(EdgeId e, Fp w, CoarsenerDiff& diff) {
    if (output_.get(e) == w) return;
    output_.set(e, w);
    diff.push_back({e, w});
  }

  // Draw light outputs until the light part validates at (100 eps, eps^3).
  void resample() {
    Fp hundred_eps = [&] {
      Wide raw = static_cast<Wide>(100) * eps_.raw();
      return raw > kOneRaw ? Fp::one() : Fp::from_raw(static_cast<uint64_t>(raw));
    }();
    FracVector light(g_);
    for (const auto& [e, w] : x_.entries())
      if (w <= delta_) light.set(e, w);
    for (int attempt = 1; attempt <= cfg_.max_resample; ++attempt) {
      std::vector<uint32_t> sampled = sampler_->sample();
      FracVector candidate(g_);
      for (uint32_t e : sampled) candidate.set(e, delta_);
      if (validate_coarsening(light, candidate, hundred_eps, delta_).pass()) {
        light_output_ = std::move(candidate);
        last_attempts_ = attempt;
        rebuild_output();
        return;
      }
    }
    throw StatisticalError("adaptive coarsener: " +
                           std::to_string(cfg_.max_resample) +
                           " resample attempts failed");
  }

  void rebuild_output() {
    output_ = light_output_;
    for (const auto& [e, w] : x_.entries())
      if (w > delta_) output_.set(e, w);
  }

  void reinit(CoarsenerDiff& diff) {
    FracVector old_output = output_;
    resample();
    norm0_ = x_.norm();
    light_steps_ = 0;
    ++reinit_count_;
    for (const auto& [e, w] : old_output.entries())
      if (output_.get(e) != w) diff.push_back({e, output_.get(e)});
    for (const auto& [e, w] : output_.entries())
      if (old_output.get(e) != w) diff.push_back({e, w});
  }

  const DynGraph* g_;
  AdaptiveCoarsenerConfig cfg_;
  Fp eps_, delta_;
  int k_ = 0;
  FracVector x_;
  FracVector output_;
  FracVector light_output_;
  std::unique_ptr<SetSampler> sampler_;
  Wide norm0_ = 0;
  uint64_t light_steps_ = 0;
  size_t last_attempts_ = 0;
  size_t reinit_count_ = 0;
};

}  // namespace dmr
