#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dmr/common.hpp"
#include "dmr/fixed.hpp"

namespace dmr {

// Output-adaptive dynamic set sampler: maintains per-element probabilities
// p_i and returns, per sample() call, a subset containing each element
// independently with probability p_i. Elements are scheduled into the bucket
// of their next firing time via geometric skips, so a session of ops with
// total output size sum|T| costs O(ops + n + sum|T|) amortized.
//
// Geometric draws use the logarithm-skip method on a 64-bit uniform variate
// (bias below 2^-40 per draw at the supported p_min); `bernoulli` mode
// replaces the skip with exact per-slot coin flips for strict-distribution
// runs.
enum class GeometricMode { skip, bernoulli };

inline constexpr Fp kSamplerPMin = Fp::from_raw(uint64_t{1} << (kFracBits - 30));

class SetSampler {
 public:
  SetSampler(uint32_t n, const std::vector<Fp>& p, uint64_t seed,
             GeometricMode mode = GeometricMode::skip)
      : n_(n), mode_(mode), rng_(seed), seed_(seed) {
    if (p.size() != n) throw ParameterError("probability vector size mismatch");
    p_.assign(n, Fp::zero());
    buckets_.assign(n + 2, {});
    elem_bucket_.assign(n, n_ + 1);
    elem_pos_.assign(n, 0);
    tau_ = 1;
    for (uint32_t i = 0; i < n; ++i) set(i, p[i]);
    ops_ = n;  // init cost
  }

  uint32_t size() const { return n_; }
  uint32_t tau() const { return tau_; }
  uint64_t seed() const { return seed_; }
  Fp probability(uint32_t i) const { return p_[i]; }
  uint32_t next_fire(uint32_t i) const { return elem_bucket_[i]; }
  uint64_t operation_count() const { return ops_; }

  // p_i <- alpha and reschedule i's next firing.
  void set(uint32_t i, Fp alpha) {
    if (i >= n_) throw ParameterError("sampler element out of range");
    if (alpha > Fp::one())
      throw ParameterError("sampler probability above 1");
    if (!alpha.is_zero() && alpha < kSamplerPMin)
      throw ParameterError("sampler probability below the 2^-30 floor");
    ++ops_;
    unschedule(i);
    p_[i] = alpha;
    schedule(i);
  }

  // Returns T_tau, advances the clock and reschedules; every n-th call resets
  // the relative clock and reschedules the whole universe.
  std::vector<uint32_t> sample() {
    ++ops_;
    std::vector<uint32_t> out = std::move(buckets_[tau_]);
    buckets_[tau_].clear();
    for (uint32_t i : out) elem_bucket_[i] = n_ + 1;
    ++tau_;
    if (tau_ < n_ + 1) {
      for (uint32_t i : out) {
        ++ops_;
        unschedule(i);
        schedule(i);
      }
    } else {
      tau_ = 1;
      for (uint32_t i = 0; i < n_; ++i) {
        ++ops_;
        unschedule(i);
        schedule(i);
      }
    }
    return out;
  }

  // Structural invariant: each element lies in at most one bucket; i in T_j
  // iff tau_i = j >= tau; tau_i = n+1 iff i is in no bucket.
  void verify() const {
    std::vector<uint32_t> seen(n_, 0);
    for (uint32_t j = 1; j <= n_; ++j) {
      for (size_t k = 0; k < buckets_[j].size(); ++k) {
        uint32_t i = buckets_[j][k];
        if (++seen[i] > 1) throw VerifyError("element in two buckets");
        if (elem_bucket_[i] != j) throw VerifyError("bucket/tau_i mismatch");
        if (elem_pos_[i] != k) throw VerifyError("bucket position mismatch");
        if (j < tau_) throw VerifyError("element scheduled in the past");
      }
    }
    for (uint32_t i = 0; i < n_; ++i) {
      bool in_bucket = seen[i] != 0;
      if (in_bucket != (elem_bucket_[i] != n_ + 1))
        throw VerifyError("tau_i = n+1 iff unscheduled violated");
    }
  }

 private:
  void unschedule(uint32_t i) {
    uint32_t j = elem_bucket_[i];
    if (j == n_ + 1) return;
    auto& b = buckets_[j];
    uint32_t p = elem_pos_[i];
    uint32_t moved = b.back();
    b[p] = moved;
    b.pop_back();
    if (p < b.size()) elem_pos_[moved] = p;
    elem_bucket_[i] = n_ + 1;
  }

  void schedule(uint32_t i) {
    Fp alpha = p_[i];
    if (alpha.is_zero()) return;
    uint64_t j;
    if (mode_ == GeometricMode::skip) {
      uint64_t ell = draw_geometric(alpha);
      j = static_cast<uint64_t>(tau_) + ell;
    } else {
      j = tau_;
      uint64_t threshold = alpha == Fp::one() ? 0 : alpha.raw() << 12;
      bool always = alpha == Fp::one();
      while (j <= n_) {
        ++ops_;
        if (always || rng_() < threshold) break;
        ++j;
      }
    }
    if (j <= n_) {
      elem_bucket_[i] = static_cast<uint32_t>(j);
      elem_pos_[i] = static_cast<uint32_t>(buckets_[j].size());
      buckets_[j].push_back(i);
    }
  }

  // P[ell = v] = alpha (1-alpha)^v via floor(ln U / ln(1-alpha)), U in (0,1].
  uint64_t draw_geometric(Fp alpha) {
    if (alpha == Fp::one()) return 0;
    double a = alpha.to_double();
    double u = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1p-53;
    double ell = std::floor(std::log(u) / std::log1p(-a));
    if (!(ell >= 0)) return 0;
    if (ell > static_cast<double>(n_) + 1.0) return n_ + 1;
    return static_cast<uint64_t>(ell);
  }

  uint32_t n_;
  GeometricMode mode_;
  std::mt19937_64 rng_;
  uint64_t seed_;
  std::vector<Fp> p_;
  std::vector<std::vector<uint32_t>> buckets_;  // 1..n used
  std::vector<uint32_t> elem_bucket_;           // n+1 = unscheduled
  std::vector<uint32_t> elem_pos_;
  uint32_t tau_ = 1;
  uint64_t ops_ = 0;
};

}  // namespace dmr
