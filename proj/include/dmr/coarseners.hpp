#pragma once

#include <functional>
#include <memory>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dmr/coarsening.hpp"
#include "dmr/common.hpp"
#include "dmr/fixed.hpp"
#include "dmr/frac_vector.hpp"
#include "dmr/graph.hpp"
#include "dmr/split.hpp"

namespace dmr {

using CoarsenerDiff = std::vector<std::pair<EdgeId, Fp>>;

// Common surface of the dynamic coarsening algorithms: apply an input update,
// report the resulting output-vector changes, expose the maintained output
// and the parameters it validates at.
class CoarsenerBase {
 public:
  virtual ~CoarsenerBase() = default;
  virtual CoarsenerDiff update(EdgeId e, Fp nu) = 0;
  virtual const FracVector& output() const = 0;
  virtual Fp declared_eps() const = 0;
  virtual Fp declared_delta() const = 0;
};

// Computes a (gamma/4, delta)-split of a uniform vector; reports its delta.
struct SplitBackend {
  std::function<Split(const FracVector&, uint64_t seed)> run;
  Fp delta;
};

// det_split at eps_s = gamma/16: a (gamma/4, gamma/16)-split.
inline SplitBackend det_split_backend(Fp gamma) {
  Fp eps_s = Fp::from_raw(gamma.raw() / 16);
  if (eps_s.is_zero())
    throw ParameterError("det split backend: gamma/16 underflows the grid");
  return {[eps_s](const FracVector& x, uint64_t) { return det_split(x, eps_s); },
          eps_s};
}

// rand_split at eps = gamma/4 with delta overridden to the det geometry
// (gamma/16); validity is ensured by rand_split's validate-and-resample
// loop. Buckets whose norm sits in the die's non-concentrating band can
// exhaust the resample budget, so the backend then falls back to the
// deterministic split at the same delta (classes stay consistent).
inline SplitBackend rand_split_backend(Fp gamma) {
  Fp eps_s = Fp::from_raw(gamma.raw() / 4);
  Fp delta = Fp::from_raw(gamma.raw() / 16);
  Fp det_eps = Fp::from_raw(gamma.raw() / 16);
  if (delta.is_zero())
    throw ParameterError("rand split backend: gamma/16 underflows the grid");
  return {[eps_s, delta, det_eps](const FracVector& x, uint64_t seed) {
            RandSplitOptions opt;
            opt.delta_override = delta;
            try {
              return rand_split(x, eps_s, seed, opt);
            } catch (const StatisticalError&) {
              return det_split(x, det_eps);
            }
          },
          delta};
}

struct UniformCoarsenerConfig {
  Fp eps;    // deletion budget: part switch at eps/32, re-init at eps/64
  Fp gamma;  // split slack target; backend yields a (gamma/4, delta)-split
  uint64_t seed = 0;
  Fp lambda = Fp::zero();  // 0 = adopt from the first input seen
};

// Dynamic coarsener for lambda-uniform streams: holds a static split of the
// vector, mirrors deletions into the active part, switches parts when the
// active one loses more than an eps/32 fraction of its initial support and
// recomputes the split after |supp(x0)| eps/64 updates. Insertions only tick
// the re-init counter. Output validates at (eps + gamma, delta) with the
// stronger slacks
//   C1': | ||x|| - ||x'|| | <= ||x||(eps+gamma) + gamma
//   C2': d^{gamma/4}(x, x') <= ||x||(eps+gamma) + gamma.
class UniformCoarsener : public CoarsenerBase {
 public:
  UniformCoarsener(const DynGraph* g, const FracVector& x, SplitBackend backend,
                   UniformCoarsenerConfig cfg)
      : g_(g), backend_(std::move(backend)), cfg_(cfg), x_(g), output_(g) {
    if (cfg_.eps.is_zero() || cfg_.eps > Fp::one())
      throw ParameterError("uniform coarsener: eps must lie in (0,1]");
    lambda_ = cfg_.lambda;
    reinit(x);
  }

  CoarsenerDiff update(EdgeId e, Fp nu) override {
    CoarsenerDiff diff;
    Fp old = x_.get(e);
    if (old == nu) return diff;
    if (!nu.is_zero()) {
      if (!old.is_zero())
        throw InputError("uniform coarsener: value change without deletion");
      if (lambda_.is_zero()) lambda_ = nu;
      if (nu != lambda_)
        throw InputError("uniform coarsener: weight differs from lambda");
    }
    x_.set(e, nu);
    ++updates_since_init_;
    if (nu.is_zero()) {
      auto it = edge_part_.find(e);
      if (it != edge_part_.end()) {
        Part& p = parts_[it->second];
        if (p.deleted.insert(e).second) ++p.deleted_count;
        if (it->second == active_ && !output_.get(e).is_zero()) {
          output_.set(e, Fp::zero());
          diff.push_back({e, Fp::zero()});
        }
      }
    }
    // Re-init has priority; the part-switch pigeonhole depends on it.
    if (reinit_due()) {
      append_reinit(diff);
      return diff;
    }
    if (active_ != kNoPart && !part_valid(active_)) switch_part(diff);
    return diff;
  }

  const FracVector& output() const override { return output_; }
  Fp declared_eps() const override {
    uint64_t raw = cfg_.eps.raw() + cfg_.gamma.raw();
    return raw > kOneRaw ? Fp::one() : Fp::from_raw(raw);
  }
  Fp declared_delta() const override { return backend_.delta; }
  Fp strong_slack_eps() const { return Fp::from_raw(cfg_.gamma.raw() / 4); }
  Fp gamma() const { return cfg_.gamma; }
  const FracVector& input() const { return x_; }
  size_t part_count() const { return parts_.size(); }
  size_t reinit_count() const { return reinit_count_; }

 private:
  struct Part {
    FracVector vec;
    size_t init_size;
    size_t deleted_count = 0;
    std::unordered_set<EdgeId> deleted;
    explicit Part(FracVector v) : vec(std::move(v)), init_size(vec.support_size()) {}
  };
  static constexpr uint32_t kNoPart = UINT32_MAX;

  bool part_valid(uint32_t idx) const {
    const Part& p = parts_[idx];
    // deleted fraction <= eps/32, exactly.
    return static_cast<Wide>(p.deleted_count) * 32 * kOneRaw <=
           static_cast<Wide>(p.init_size) * cfg_.eps.raw();
  }
  bool reinit_due() const {
    return static_cast<Wide>(updates_since_init_) * 64 * kOneRaw >
           static_cast<Wide>(init_support_) * cfg_.eps.raw();
  }

  void reinit(const FracVector& x) {
    x_ = x;
    Fp lam;
    if (!x_.is_uniform(&lam))
      throw InputError("uniform coarsener: input is not uniform");
    if (x_.support_size() > 0) {
      if (lambda_.is_zero()) lambda_ = lam;
      if (lam != lambda_)
        throw InputError("uniform coarsener: lambda changed across re-init");
    }
    parts_.clear();
    edge_part_.clear();
    updates_since_init_ = 0;
    init_support_ = x_.support_size();
    active_ = kNoPart;
    ++reinit_count_;
    if (init_support_ == 0) {
      rebuild_output();
      return;
    }
    Split split = backend_.run(x_, cfg_.seed + reinit_count_);
    parts_.reserve(split.parts.size());
    for (auto& part : split.parts) {
      uint32_t idx = static_cast<uint32_t>(parts_.size());
      for (EdgeId e : part.support()) edge_part_[e] = idx;
      parts_.emplace_back(std::move(part));
    }
    for (uint32_t i = 0; i < parts_.size(); ++i) {
      if (parts_[i].init_size > 0) {
        active_ = i;
        break;
      }
    }
    rebuild_output();
  }

  void append_reinit(CoarsenerDiff& diff) {
    FracVector snapshot = x_;
    FracVector old_output = output_;
    reinit(snapshot);
    for (const auto& [e, w] : old_output.entries())
      if (output_.get(e) != w) diff.push_back({e, output_.get(e)});
    for (const auto& [e, w] : output_.entries())
      if (old_output.get(e) != w) diff.push_back({e, w});
  }

  void switch_part(CoarsenerDiff& diff) {
    uint32_t next = active_ + 1;
    while (next < parts_.size() &&
           (parts_[next].init_size == 0 || !part_valid(next)))
      ++next;
    if (next >= parts_.size())
      throw VerifyError(
          "uniform coarsener: no valid part left before re-init (pigeonhole)");
    for (const auto& [e, w] : output_.entries()) diff.push_back({e, Fp::zero()});
    active_ = next;
    rebuild_output();
    for (const auto& [e, w] : output_.entries()) {
      // Overwrite the zero diff if the new part reuses an edge.
      diff.push_back({e, w});
    }
  }

  void rebuild_output() {
    output_ = FracVector(g_);
    if (active_ == kNoPart) return;
    const Part& p = parts_[active_];
    for (const auto& [e, w] : p.vec.entries())
      if (!p.deleted.count(e)) output_.set(e, w);
  }

  const DynGraph* g_;
  SplitBackend backend_;
  UniformCoarsenerConfig cfg_;
  Fp lambda_;
  FracVector x_;
  FracVector output_;
  std::vector<Part> parts_;
  std::unordered_map<EdgeId, uint32_t> edge_part_;
  uint32_t active_ = kNoPart;
  size_t init_support_ = 0;
  uint64_t updates_since_init_ = 0;
  size_t reinit_count_ = 0;
};

enum class SplitKind { det, rand };

struct GeneralCoarsenerConfig {
  Fp eps;    // class width (1+eps) and per-bucket deletion budget
  Fp gamma;  // split slack and phi = gamma/n^2 drop threshold
  SplitKind kind = SplitKind::det;
  uint64_t seed = 0;
};

// Dynamic coarsener for arbitrary fractional-matching streams: weights in
// [phi(1+eps)^(i-1), phi(1+eps)^i) are uniformized to their class floor and
// handled by one UniformCoarsener per class; weights >= delta pass through
// exactly; weights < phi = gamma/n^2 are dropped (total mass <= gamma).
class GeneralCoarsener : public CoarsenerBase {
 public:
  GeneralCoarsener(const DynGraph* g, const FracVector& x,
                   GeneralCoarsenerConfig cfg)
      : g_(g), cfg_(cfg), x_(g), output_(g) {
    delta_ = Fp::from_raw(cfg_.gamma.raw() / 16);
    if (delta_.is_zero())
      throw ParameterError("general coarsener: gamma/16 underflows the grid");
    Wide n2 = static_cast<Wide>(g->vertex_count()) * g->vertex_count();
    uint64_t phi_raw = static_cast<uint64_t>(cfg_.gamma.raw() / n2);
    if (phi_raw == 0)
      throw ParameterError("general coarsener: gamma/n^2 underflows the grid");
    // Class boundaries by floor-chained (1+eps) products, capped per the
    // bucket-count bound 2(log n + log 1/gamma)/eps.
    uint64_t b = phi_raw;
    boundaries_.push_back(b);
    uint64_t cap = bucket_cap();
    while (b < delta_.raw() && boundaries_.size() <= cap) {
      uint64_t step = static_cast<uint64_t>(
          (static_cast<Wide>(b) * cfg_.eps.raw()) >> kFracBits);
      if (step == 0)
        throw ParameterError("general coarsener: class width underflows");
      b += step;
      boundaries_.push_back(b);
    }
    if (boundaries_.back() < delta_.raw())
      throw ParameterError("general coarsener: bucket cap too small for delta");
    buckets_.resize(boundaries_.size());
    // Ingest the initial vector.
    for (const auto& [e, w] : x.entries()) route_insert(e, w, nullptr);
    x_ = x;
  }

  CoarsenerDiff update(EdgeId e, Fp nu) override {
    CoarsenerDiff diff;
    Fp old = x_.get(e);
    if (old == nu) return diff;
    if (!old.is_zero()) route_delete(e, old, &diff);
    if (!nu.is_zero()) route_insert(e, nu, &diff);
    x_.set(e, nu);
    return diff;
  }

  const FracVector& output() const override { return output_; }

  // Explicit constant chain from the norm/vertex slack proofs:
  // coefficient 8(eps+gamma), additive 5 gamma log2(n/gamma) / eps; the
  // declared parameter is the max of the two so the standard (e,e) slack
  // form covers both.
  Fp declared_eps() const override {
    uint64_t term1 = 8 * (cfg_.eps.raw() + cfg_.gamma.raw());
    Wide lg = log_term();
    Wide term2 = (static_cast<Wide>(5) * cfg_.gamma.raw() * lg << kFracBits) /
                 cfg_.eps.raw();
    Wide m = term1 > term2 ? term1 : term2;
    return m > kOneRaw ? Fp::one() : Fp::from_raw(static_cast<uint64_t>(m));
  }
  Fp declared_delta() const override { return delta_; }
  size_t bucket_count() const { return boundaries_.size(); }
  const FracVector& input() const { return x_; }

 private:
  uint64_t bucket_cap() const {
    uint64_t lg_n = detail::ceil_log2(g_->vertex_count());
    uint64_t lg_g = detail::ceil_log2(kOneRaw / cfg_.gamma.raw() + 1);
    return static_cast<uint64_t>(
        ((static_cast<Wide>(2) * (lg_n + lg_g)) << kFracBits) /
            cfg_.eps.raw() +
        2);
  }
  Wide log_term() const {
    return detail::ceil_log2(g_->vertex_count()) +
           detail::ceil_log2(kOneRaw / cfg_.gamma.raw() + 1);
  }

  // Largest class index with boundary <= w (w in [phi, delta)).
  uint32_t class_of(Fp w) const {
    uint32_t lo = 0, hi = static_cast<uint32_t>(boundaries_.size()) - 1;
    while (lo < hi) {
      uint32_t mid = (lo + hi + 1) / 2;
      if (boundaries_[mid] <= w.raw())
        lo = mid;
      else
        hi = mid - 1;
    }
    return lo;
  }

  UniformCoarsener& bucket(uint32_t idx) {
    if (!buckets_[idx]) {
      UniformCoarsenerConfig ucfg;
      ucfg.eps = cfg_.eps;
      ucfg.gamma = cfg_.gamma;
      ucfg.seed = cfg_.seed * 1315423911u + idx;
      ucfg.lambda = Fp::from_raw(boundaries_[idx]);
      SplitBackend backend = cfg_.kind == SplitKind::det
                                 ? det_split_backend(cfg_.gamma)
                                 : rand_split_backend(cfg_.gamma);
      buckets_[idx] = std::make_unique<UniformCoarsener>(
          g_, FracVector(g_), std::move(backend), ucfg);
    }
    return *buckets_[idx];
  }

  void apply_bucket_diff(const CoarsenerDiff& d, CoarsenerDiff* out) {
    for (const auto& [e, w] : d) {
      if (output_.get(e) == w) continue;
      output_.set(e, w);
      if (out) out->push_back({e, w});
    }
  }

  void route_insert(EdgeId e, Fp w, CoarsenerDiff* out) {
    if (w >= delta_) {
      output_.set(e, w);
      if (out) out->push_back({e, w});
    } else if (w.raw() >= boundaries_[0]) {
      uint32_t idx = class_of(w);
      auto d = bucket(idx).update(e, Fp::from_raw(boundaries_[idx]));
      edge_bucket_[e] = idx;
      apply_bucket_diff(d, out);
    }  // below phi: dropped
  }

  void route_delete(EdgeId e, Fp old, CoarsenerDiff* out) {
    if (old >= delta_) {
      output_.set(e, Fp::zero());
      if (out) out->push_back({e, Fp::zero()});
    } else if (old.raw() >= boundaries_[0]) {
      auto it = edge_bucket_.find(e);
      if (it != edge_bucket_.end()) {
        auto d = bucket(it->second).update(e, Fp::zero());
        edge_bucket_.erase(it);
        apply_bucket_diff(d, out);
      }
    }
  }

  const DynGraph* g_;
  GeneralCoarsenerConfig cfg_;
  Fp delta_;
  FracVector x_;
  FracVector output_;
  std::vector<uint64_t> boundaries_;
  std::vector<std::unique_ptr<UniformCoarsener>> buckets_;
  std::unordered_map<EdgeId, uint32_t> edge_bucket_;
};

}  // namespace dmr
