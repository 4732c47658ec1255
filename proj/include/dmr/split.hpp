#pragma once

#include <random>
#include <vector>

#include "dmr/coarsening.hpp"
#include "dmr/common.hpp"
#include "dmr/degree_split.hpp"
#include "dmr/fixed.hpp"
#include "dmr/frac_vector.hpp"

namespace dmr {

// An (eps, delta)-split: disjoint-support coarsenings of a uniform vector
// covering at least half its support (the deterministic construction covers
// all of it).
struct Split {
  std::vector<FracVector> parts;
  Fp eps, delta;
  size_t source_support = 0;
};

namespace detail {

inline Fp require_uniform(const FracVector& x) {
  Fp lambda;
  if (!x.is_uniform(&lambda))
    throw InputError("split input is not uniform");
  return lambda;
}

// ceil(log2 n) for n >= 1.
inline int ceil_log2(uint64_t n) {
  int k = 0;
  while ((uint64_t{1} << k) < n) ++k;
  return k;
}

}  // namespace detail

// Deterministic static (4 eps, eps)-split of a lambda-uniform fractional
// matching by repeated degree splitting: L rounds with lambda 2^L = eps' in
// [eps, 2 eps), doubling part weights as supports halve.
inline Split det_split(const FracVector& x, Fp eps) {
  if (eps.is_zero() || eps >= Fp::one())
    throw ParameterError("det_split: eps must lie in (0,1)");
  Fp lambda = detail::require_uniform(x);
  const DynGraph& g = x.graph();
  uint64_t four_eps = 4 * eps.raw() > kOneRaw ? kOneRaw : 4 * eps.raw();
  Split out{{}, Fp::from_raw(four_eps), eps, x.support_size()};
  if (x.support_size() == 0) return out;

  if (lambda > eps) {  // trivial: the vector is already coarse enough
    out.parts.push_back(x);
    return out;
  }
  Wide n2 = static_cast<Wide>(g.vertex_count()) * g.vertex_count();
  if (static_cast<Wide>(lambda.raw()) * n2 * (Wide{1} << kFracBits) <=
      static_cast<Wide>(eps.raw()) * eps.raw()) {
    // lambda <= eps^2 / n^2: one eps-uniform singleton part per edge.
    for (EdgeId e : x.support()) {
      FracVector part(&g);
      part.set(e, eps);
      out.parts.push_back(std::move(part));
    }
    return out;
  }

  // Smallest L with lambda 2^L >= eps; then lambda 2^L < 2 eps.
  int rounds = 0;
  while ((lambda.raw() << rounds) < eps.raw()) ++rounds;

  std::vector<std::vector<EdgeId>> supports{x.support()};
  for (int r = 0; r < rounds; ++r) {
    std::vector<std::vector<EdgeId>> next;
    next.reserve(supports.size() * 2);
    for (auto& s : supports) {
      MultiEdgeSet h = make_multiset(s, {});
      DegreeSplitResult ds = degree_split(g, h);
      next.push_back(std::move(ds.first));
      next.push_back(std::move(ds.second));
    }
    supports.swap(next);
  }
  Fp weight = Fp::from_raw(lambda.raw() << rounds);
  for (auto& s : supports) {
    if (s.empty()) continue;
    FracVector part(&g);
    for (EdgeId e : s) part.set(e, weight);
    out.parts.push_back(std::move(part));
  }
  return out;
}

struct RandSplitOptions {
  // Overrides delta = eps^4 / (24 log^2 n); used by callers that need the
  // split at a different (coarser) value class and rely on the post-hoc
  // validation below for correctness.
  Fp delta_override = Fp::zero();
  int max_attempts = 8;
  // Validate each part at (eps, delta) and resample on failure.
  bool validate = true;
};

// Randomized static (eps, eps^4/(24 log^2 n))-split: each support edge rolls a
// k-sided die among k = 2^ceil(log2(delta/lambda)) parts, all at weight
// lambda*k in [delta, 2 delta). Chernoff-backed properties are checked
// post-hoc; failed attempts resample with the next seed.
inline Split rand_split(const FracVector& x, Fp eps, uint64_t seed,
                        RandSplitOptions opt = {}) {
  if (eps.is_zero() || eps >= Fp::one())
    throw ParameterError("rand_split: eps must lie in (0,1)");
  Fp lambda = detail::require_uniform(x);
  const DynGraph& g = x.graph();
  uint64_t n = g.vertex_count();
  int lg = std::max(1, detail::ceil_log2(n));
  Fp delta = opt.delta_override;
  if (delta.is_zero()) {
    Fp eps2 = mul_floor(eps, eps);
    Fp eps4 = mul_floor(eps2, eps2);
    delta = Fp::from_raw(eps4.raw() / (24 * static_cast<uint64_t>(lg) * lg));
    if (delta.is_zero())
      throw ParameterError("rand_split: eps^4/(24 log^2 n) underflows the grid");
  }
  Split out{{}, eps, delta, x.support_size()};
  if (x.support_size() == 0) return out;

  if (lambda > delta) {  // trivial
    out.parts.push_back(x);
    return out;
  }
  // k-sided die geometry shared by the main and singleton paths.
  int klog = 0;
  while ((lambda.raw() << klog) < delta.raw()) ++klog;
  uint64_t k = uint64_t{1} << klog;
  Fp dprime = Fp::from_raw(lambda.raw() << klog);  // in [delta, 2 delta)

  // Tiny-mass cases: singleton parts at the [delta, 2 delta) class value.
  // With the default delta the threshold is the lemma's ||x|| <= eps^2/log n;
  // with an overridden (coarser) delta the die stops concentrating already
  // around ||x|| ~ eps, so singletons take over below eps/2 there.
  Wide n2 = static_cast<Wide>(n) * n;
  bool tiny_lambda = static_cast<Wide>(lambda.raw()) * n2 <= eps.raw();
  bool tiny_norm;
  if (opt.delta_override.is_zero()) {
    // ||x|| * log n <= eps^2, scaled exactly.
    tiny_norm = x.norm() * static_cast<Wide>(static_cast<uint64_t>(lg))
                    << kFracBits <=
                static_cast<Wide>(eps.raw()) * eps.raw();
  } else {
    tiny_norm = 2 * x.norm() <= eps.raw();
  }
  if (tiny_lambda || tiny_norm) {
    for (EdgeId e : x.support()) {
      FracVector part(&g);
      part.set(e, dprime);
      out.parts.push_back(std::move(part));
    }
    return out;
  }

  for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
    std::mt19937_64 rng(seed + static_cast<uint64_t>(attempt));
    std::vector<FracVector> parts(k, FracVector(&g));
    std::uniform_int_distribution<uint64_t> die(0, k - 1);
    for (EdgeId e : x.support()) parts[die(rng)].set(e, dprime);
    bool ok = true;
    if (opt.validate) {
      for (const auto& part : parts) {
        if (!validate_coarsening(x, part, eps, delta).pass()) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      out.parts = std::move(parts);
      return out;
    }
  }
  throw StatisticalError("rand_split: no valid split after " +
                         std::to_string(opt.max_attempts) + " attempts");
}

}  // namespace dmr
