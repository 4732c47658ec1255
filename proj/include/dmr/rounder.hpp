#pragma once

#include <algorithm>
#include <string>
#include <unordered_map>
#include <vector>

#include "dmr/common.hpp"
#include "dmr/degree_split.hpp"
#include "dmr/edge_set.hpp"
#include "dmr/fixed.hpp"
#include "dmr/frac_vector.hpp"
#include "dmr/graph.hpp"
#include "dmr/matching.hpp"

namespace dmr {

struct MatchChange {
  bool added;
  VertexId u, v;
};
using ChangeLog = std::vector<MatchChange>;

inline std::string change_log_to_string(const ChangeLog& log) {
  std::string out;
  for (const auto& c : log) {
    out += c.added ? '+' : '-';
    out += ' ';
    out += std::to_string(c.u);
    out += ' ';
    out += std::to_string(c.v);
    out += '\n';
  }
  return out;
}

namespace detail {

// L = 1 + ceil(log2(a^-1 * b^-1)) for grid values a, b; capped at the grid
// depth since no weight has bits past 2^-52.
inline int level_count(Fp a, Fp b) {
  Wide prod = static_cast<Wide>(a.raw()) * b.raw();
  if (prod == 0) throw ParameterError("level count needs nonzero eps, delta");
  int k = 0;
  while ((prod >> (k + 1)) != 0) ++k;
  int L = 1 + (104 - k);
  return std::min(L, kFracBits);
}

// c > 2^(i-2) * (eps*||x||) / L with t = eps_raw * norm_raw (2^-104 scale),
// i.e. exactly c * L * 2^(106-i) > t. Instance norms stay below 2^70 raw, so
// t < 2^123 and the overflow guard below is sound.
inline bool counter_exceeds(uint64_t c, int i, int L, Wide t) {
  if (c == 0) return false;
  Wide a = static_cast<Wide>(c) * static_cast<Wide>(static_cast<uint64_t>(L));
  int shift = 106 - i;
  int abits = 1;
  Wide probe = a;
  while (probe >> 1) {
    probe >>= 1;
    ++abits;
  }
  if (abits + shift >= 124) return true;
  return (a << shift) > t;
}

}  // namespace detail

// Static hierarchical rounding (bit-by-bit degree splitting). Requires a
// bipartite fractional matching; returns M subseteq supp(x) with
// |M| >= (1-eps)||x||.
inline Matching static_round(const DynGraph& g, const FracVector& x, Fp eps) {
  if (!g.bipartite_declared())
    throw CapabilityError(
        "static_round requires a bipartite graph; use the coarsening view for "
        "general graphs");
  if (eps.is_zero() || eps >= Fp::one())
    throw ParameterError("static_round: eps must lie in (0,1)");
  if (!x.is_fractional_matching())
    throw InputError("static_round: x violates the fractional degree constraint");
  Matching m(&g);
  if (x.support_size() == 0) return m;
  int L = detail::level_count(eps, x.min_weight());
  std::vector<EdgeId> f_cur;  // F_L = empty
  std::vector<EdgeId> e0;
  for (int i = L; i >= 1; --i) {
    const std::vector<EdgeId>& ei = x.bit_support_items(i);
    MultiEdgeSet h = make_multiset(ei, f_cur);
    f_cur = degree_split(g, h).first;
  }
  for (EdgeId e : x.bit_support_items(0)) m.add(e);
  for (EdgeId e : f_cur)
    if (!m.contains(e)) m.add(e);
  return m;
}

struct RounderConfig {
  Fp eps;
  Fp delta = Fp::zero();  // 0 -> use x_min at init
  bool slow_verify = false;
  // Trivial-pointer strategy for ||x|| < 1 (enter below 1/2, leave at 1).
  // Must be off when the instance serves as a coarsener: a single pointer
  // edge is a valid rounding but not a valid coarsening.
  bool pointer_fastpath = true;
  // Enables the slow-mode fractional/matching checks (off when rounding
  // arbitrary nonnegative vectors in coarsener roles).
  bool expect_bipartite_fractional = true;
};

// Dynamic hierarchical rounding (amortized rebuild with per-level counters).
// Maintains M = E_0 u F_0 with |M| >= (1-2eps)||x|| under single-edge weight
// updates, given the promise that nonzero weights stay >= delta.
class DynRounder {
 public:
  DynRounder(const DynGraph* g, const FracVector& x, RounderConfig cfg)
      : g_(g), x_(g), cfg_(cfg) {
    init(x);
  }

  void init(const FracVector& x) {
    if (cfg_.eps.is_zero() || cfg_.eps >= Fp::one())
      throw ParameterError("rounder: eps must lie in (0,1)");
    x_ = x;
    delta_ = cfg_.delta;
    if (delta_.is_zero()) delta_ = x.support_size() ? x.min_weight() : Fp::one();
    for (const auto& [e, w] : x_.entries())
      if (w < delta_)
        throw PromiseError("rounder init: weight below delta on edge " +
                           std::to_string(e));
    L_ = detail::level_count(cfg_.eps, delta_);
    e_.assign(L_ + 1, EdgeIdSet{});
    f_.assign(L_ + 1, IncidentEdgeSet{});
    for (auto& f : f_) f.attach(g_);
    c_.assign(L_ + 1, 0);
    base_t_.assign(L_ + 1, 0);
    m_.clear();
    m_cover_.assign(g_->vertex_count(), kNoEdge);
    log_.clear();
    recourse_total_ = 0;
    pointer_mode_ = false;
    pointer_edge_ = kNoEdge;
    if (cfg_.pointer_fastpath && x_.norm() < kOneRaw) {
      enter_pointer_mode();
    } else {
      rebuild(L_);
    }
    if (cfg_.slow_verify) verify();
    log_.clear();  // init changes are not update recourse
    recourse_total_ = 0;
  }

  // Applies x_e <- nu and returns the matching changes it caused.
  ChangeLog update(EdgeId e, Fp nu) {
    if (!(nu.is_zero() || nu >= delta_))
      throw PromiseError("update: nonzero weight below delta on edge " +
                         std::to_string(e));
    log_.clear();
    x_.set(e, nu);
    if (pointer_mode_) {
      pointer_step();
    } else {
      hierarchy_step(e);
      if (cfg_.pointer_fastpath && x_.norm() < (kOneRaw >> 1) && !pointer_mode_)
        enter_pointer_mode();
    }
    if (cfg_.slow_verify) verify();
    return log_;
  }

  // Rebuilds levels i..0 from the current vector, as in the static algorithm.
  void rebuild(int i) {
    last_rebuild_level_ = i;
    last_rebuild_ops_ = 0;
    for (int j = i; j >= 0; --j) {
      e_[j].clear();
      for (EdgeId e : x_.bit_support_items(j)) {
        e_[j].insert(e);
        ++last_rebuild_ops_;
      }
      c_[j] = 0;
      if (j != 0) {
        MultiEdgeSet h = make_multiset(e_[j].items(), f_[j].items());
        DegreeSplitResult split = degree_split(*g_, h);
        last_rebuild_ops_ += split.operations;
        f_[j - 1].clear();
        for (EdgeId e : split.first) f_[j - 1].insert(e);
      }
    }
    Wide norm = x_.norm();
    for (int j = i; j >= 0; --j) base_t_[j] = mul_t(norm);
    resync_matching();
    total_rebuild_ops_ += last_rebuild_ops_;
  }

  // x^(k) of Eq. (1): the (2*2^-k, 2^-k)-coarsening view of the state. Only
  // meaningful when every edge with x_e >= 2^-k carries no bits below 2^-k.
  // Note on C3: an edge with x_e >= 2^-k that is updated (not deleted) reads
  // as 0 until the next rebuild touching its bit levels; callers that need
  // C3 after every update must restrict heavy-edge updates to deletions,
  // which is how the composition pipeline uses this view.
  FracVector coarsening_view(int k) const {
    if (pointer_mode_)
      throw CapabilityError(
          "coarsening view unavailable in pointer fast-path mode");
    if (k < 0 || k > L_)
      throw ParameterError("coarsening view level outside [0, L]");
    Fp eps_k = Fp::pow2(std::min(k, kFracBits));
    for (const auto& [e, w] : x_.entries()) {
      if (w >= eps_k && w.keep_bits_through(k) != w)
        throw InputError("coarsening view precondition: edge " +
                         std::to_string(e) + " has bits below 2^-k");
    }
    FracVector out(g_);
    std::unordered_map<EdgeId, uint64_t> acc;
    for (int j = 0; j <= std::min(k, kFracBits); ++j)
      for (EdgeId e : e_[j].items()) acc[e] += Fp::pow2(j).raw();
    if (k <= kFracBits)
      for (EdgeId e : f_[k].items()) acc[e] += eps_k.raw();
    for (const auto& [e, raw] : acc) out.set(e, Fp::from_raw(raw));
    return out;
  }

  const FracVector& x() const { return x_; }
  const DynGraph& graph() const { return *g_; }
  int levels() const { return L_; }
  Fp delta() const { return delta_; }
  bool pointer_mode() const { return pointer_mode_; }
  size_t matching_size() const { return m_.size(); }
  const std::vector<EdgeId>& matching_edges() const { return m_.items(); }
  bool in_matching(EdgeId e) const { return m_.contains(e); }
  uint64_t recourse_total() const { return recourse_total_; }
  size_t e_size(int i) const { return e_[i].size(); }
  size_t f_size(int i) const { return f_[i].size(); }
  bool e_contains(int i, EdgeId e) const { return e_[i].contains(e); }
  bool f_contains(int i, EdgeId e) const { return f_[i].contains(e); }
  int last_rebuild_level() const { return last_rebuild_level_; }
  uint64_t last_rebuild_ops() const { return last_rebuild_ops_; }
  uint64_t total_rebuild_ops() const { return total_rebuild_ops_; }

  // ||x^(i)|| = |F_i| 2^-i + sum_{j<=i} |E_j| 2^-j in 2^-52 units.
  Wide level_norm(int i) const {
    Wide total = 0;
    if (i <= kFracBits)
      total += static_cast<Wide>(f_[i].size()) << (kFracBits - i);
    for (int j = 0; j <= std::min(i, kFracBits); ++j)
      total += static_cast<Wide>(e_[j].size()) << (kFracBits - j);
    return total;
  }

  // Full invariant revalidation (slow-verify mode).
  void verify() const {
    if (pointer_mode_) {
      if (pointer_edge_ != kNoEdge && !x_.in_support(pointer_edge_))
        throw VerifyError("pointer edge left the support");
      if (x_.support_size() > 0 && pointer_edge_ == kNoEdge)
        throw VerifyError("pointer mode with nonempty support but no edge");
      check_size_bound();
      return;
    }
    // E_i subseteq supp_i(x), F_i subseteq supp(x).
    for (int i = 0; i <= L_; ++i) {
      for (EdgeId e : e_[i].items())
        if (!x_.get(e).bit(i))
          throw VerifyError("E_" + std::to_string(i) +
                            " contains an edge without bit i: " +
                            std::to_string(e));
      for (EdgeId e : f_[i].items())
        if (!x_.in_support(e))
          throw VerifyError("F level contains an edge outside supp(x)");
    }
    // M = E_0 u F_0 and M subseteq supp(x).
    for (EdgeId e : m_.items())
      if (!x_.in_support(e)) throw VerifyError("matching edge outside support");
    if (cfg_.expect_bipartite_fractional) {
      if (!x_.is_fractional_matching())
        throw VerifyError("promise violated: x is not a fractional matching");
      if (!is_matching(*g_, m_.items()))
        throw VerifyError("maintained M is not a matching");
    }
    check_size_bound();
    // Remark upper bound: ||x^(i)|| <= (1+eps)||x|| + 2^(1-i).
    for (int i = 0; i <= L_; ++i) {
      Wide lhs = level_norm(i) << kFracBits;
      Wide rhs = static_cast<Wide>(kOneRaw + cfg_.eps.raw()) * x_.norm();
      int shift = 105 - i;
      if (shift >= 0 && shift < 127) rhs += Wide{1} << shift;
      else if (shift >= 127) rhs = ~Wide{0};
      if (lhs > rhs)
        throw VerifyError("level norm exceeds the (1+eps)||x|| + 2^(1-i) bound");
    }
  }

 private:
  Wide mul_t(Wide norm) const {
    return static_cast<Wide>(cfg_.eps.raw()) * norm;  // kept at product scale
  }

  void check_size_bound() const {
    // |M| >= (1-2eps)||x||, exact comparison at 2^-104 scale.
    Wide lhs = static_cast<Wide>(m_.size()) << 104;
    uint64_t two_eps =
        cfg_.eps.raw() >= (kOneRaw >> 1) ? kOneRaw : 2 * cfg_.eps.raw();
    Wide rhs = static_cast<Wide>(kOneRaw - two_eps) * x_.norm();
    if (lhs < rhs)
      throw VerifyError("matching below (1-2eps)||x||: |M|=" +
                        std::to_string(m_.size()));
  }

  void enter_pointer_mode() {
    pointer_mode_ = true;
    // Drop the hierarchy output.
    for (int i = 0; i <= L_; ++i) {
      e_[i].clear();
      f_[i].clear();
      c_[i] = 0;
    }
    std::vector<EdgeId> old(m_.items());
    for (EdgeId e : old) remove_from_matching(e);
    pointer_edge_ = kNoEdge;
    pointer_step();
  }

  void pointer_step() {
    if (x_.norm() >= kOneRaw) {
      // Leave the fast path; full rebuild.
      pointer_mode_ = false;
      std::vector<EdgeId> old(m_.items());
      for (EdgeId e : old) remove_from_matching(e);
      pointer_edge_ = kNoEdge;
      rebuild(L_);
      return;
    }
    if (pointer_edge_ != kNoEdge && x_.in_support(pointer_edge_)) return;
    if (pointer_edge_ != kNoEdge) {
      remove_from_matching(pointer_edge_);
      pointer_edge_ = kNoEdge;
    }
    if (x_.support_size() > 0) {
      pointer_edge_ = x_.support().front();
      add_to_matching(pointer_edge_);
    }
  }

  void hierarchy_step(EdgeId e) {
    auto [u, v] = g_->endpoints(e);
    for (int i = L_; i >= 0; --i) {
      if (e_[i].erase(e) && i == 0) sync_matching(e);
      if (i != 0) {
        IncidentEdgeSet& f = f_[i - 1];
        if (f.erase(e)) {
          if (i - 1 == 0) sync_matching(e);
        } else {
          EdgeId fu = f.any_incident(u);
          if (fu != kNoEdge) {
            f.erase(fu);
            if (i - 1 == 0) sync_matching(fu);
          }
          EdgeId fv = f.any_incident(v);
          if (fv != kNoEdge) {
            f.erase(fv);
            if (i - 1 == 0) sync_matching(fv);
          }
        }
      }
      ++c_[i];
      if (detail::counter_exceeds(c_[i], i, L_, base_t_[i])) {
        rebuild(i);
        return;
      }
    }
  }

  void sync_matching(EdgeId e) {
    bool now = e_[0].contains(e) || f_[0].contains(e);
    bool was = m_.contains(e);
    if (now == was) return;
    if (now)
      add_to_matching(e);
    else
      remove_from_matching(e);
  }

  void add_to_matching(EdgeId e) {
    m_.insert(e);
    auto [u, v] = g_->endpoints(e);
    m_cover_[u] = e;
    m_cover_[v] = e;
    log_.push_back({true, u, v});
    ++recourse_total_;
  }
  void remove_from_matching(EdgeId e) {
    m_.erase(e);
    auto [u, v] = g_->endpoints(e);
    if (m_cover_[u] == e) m_cover_[u] = kNoEdge;
    if (m_cover_[v] == e) m_cover_[v] = kNoEdge;
    log_.push_back({false, u, v});
    ++recourse_total_;
  }

  // After a rebuild, diff the new E_0 u F_0 against the maintained matching.
  void resync_matching() {
    std::vector<EdgeId> old(m_.items());
    for (EdgeId e : old)
      if (!e_[0].contains(e) && !f_[0].contains(e)) remove_from_matching(e);
    for (EdgeId e : e_[0].items())
      if (!m_.contains(e)) add_to_matching(e);
    for (EdgeId e : f_[0].items())
      if (!m_.contains(e)) add_to_matching(e);
  }

  const DynGraph* g_;
  FracVector x_;
  RounderConfig cfg_;
  Fp delta_;
  int L_ = 0;
  std::vector<EdgeIdSet> e_;
  std::vector<IncidentEdgeSet> f_;
  std::vector<uint64_t> c_;
  std::vector<Wide> base_t_;  // eps * ||x|| at the last rebuild touching i
  EdgeIdSet m_;
  std::vector<EdgeId> m_cover_;
  ChangeLog log_;
  uint64_t recourse_total_ = 0;
  bool pointer_mode_ = false;
  EdgeId pointer_edge_ = kNoEdge;
  int last_rebuild_level_ = -1;
  uint64_t last_rebuild_ops_ = 0;
  uint64_t total_rebuild_ops_ = 0;
};

}  // namespace dmr
