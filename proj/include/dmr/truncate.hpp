#pragma once

#include <bit>

#include "dmr/common.hpp"
#include "dmr/fixed.hpp"
#include "dmr/frac_vector.hpp"

namespace dmr {

struct TruncateResult {
  FracVector x;      // the truncated vector
  int effective_bits;  // L: largest retained bit level (0 when empty)
  size_t zeroed_edges = 0;
  size_t trimmed_edges = 0;  // entries that lost trailing bits
  Wide norm_before = 0;
  Wide norm_after = 0;
};

// Preprocessing that enforces x_min >= eps'/n^2 and clears weight bits beyond
// L = 1 + ceil(log2(eps'^-1 * x'_min^-1)), with eps' = eps/3. Guarantees
// ||x'|| >= (1 - 2eps/3)||x|| and supp(x') subseteq supp(x).
inline TruncateResult truncate(const FracVector& x, Fp eps) {
  if (eps.is_zero() || eps >= Fp::one())
    throw ParameterError("truncate: eps must lie in (0,1)");
  TruncateResult res{FracVector(&x.graph()), 0};
  res.norm_before = x.norm();
  uint64_t eps3 = eps.raw() / 3;  // floor; smaller eps' only keeps more mass
  Wide n = x.graph().vertex_count();
  Wide n2 = n * n;

  // Pass 1: drop entries with x_e < eps'/n^2, i.e. x_e * n^2 < eps'.
  Fp xmin = Fp::one();
  bool any = false;
  for (const auto& [e, w] : x.entries()) {
    if (static_cast<Wide>(w.raw()) * n2 < eps3) {
      ++res.zeroed_edges;
      continue;
    }
    if (!any || w < xmin) xmin = w;
    any = true;
  }
  if (!any) {
    res.norm_after = 0;
    return res;
  }

  // L = 1 + ceil(log2(2^104 / (eps' * xmin))) computed by bit arithmetic.
  Wide b = static_cast<Wide>(eps3) * xmin.raw();
  int k = 0;  // floor(log2 b)
  while ((b >> (k + 1)) != 0) ++k;
  int L = 1 + (104 - k);
  if (L > kFracBits) L = kFracBits;
  res.effective_bits = L;

  // Pass 2: keep surviving entries with bits beyond L cleared.
  for (const auto& [e, w] : x.entries()) {
    if (static_cast<Wide>(w.raw()) * n2 < eps3) continue;
    Fp t = w.keep_bits_through(L);
    if (t != w) ++res.trimmed_edges;
    if (!t.is_zero()) res.x.set(e, t);
  }
  res.norm_after = res.x.norm();
  return res;
}

}  // namespace dmr
