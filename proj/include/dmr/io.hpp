#pragma once

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmr/coarsening.hpp"
#include "dmr/common.hpp"
#include "dmr/fixed.hpp"
#include "dmr/frac_vector.hpp"
#include "dmr/graph.hpp"
#include "dmr/stream.hpp"

namespace dmr {

// Graph/vector text format:
//   n <count> bipartite|general
//   e <u> <v> <weight-as-decimal-or-p/q>
// Vertex ids are 0-based. Bipartite sides are inferred by 2-coloring once the
// whole edge list is known.
struct LoadedInstance {
  std::unique_ptr<DynGraph> graph;
  std::unique_ptr<FracVector> x;
};

inline LoadedInstance parse_instance(std::istream& in) {
  struct PendingEdge {
    VertexId u, v;
    std::string w;
  };
  uint32_t count = 0;
  bool bipartite = false, have_header = false;
  std::vector<PendingEdge> staged;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "n") {
      std::string kind;
      if (!(ls >> count >> kind))
        throw InputError("line " + std::to_string(lineno) + ": bad header");
      if (kind != "bipartite" && kind != "general")
        throw InputError("graph kind must be bipartite or general");
      bipartite = kind == "bipartite";
      have_header = true;
    } else if (tag == "e") {
      if (!have_header) throw InputError("edge line before the n header");
      PendingEdge pe;
      if (!(ls >> pe.u >> pe.v >> pe.w))
        throw InputError("line " + std::to_string(lineno) + ": bad edge");
      staged.push_back(pe);
    } else {
      throw InputError("line " + std::to_string(lineno) + ": unknown tag " +
                       tag);
    }
  }
  if (!have_header) throw InputError("missing n header");

  LoadedInstance inst;
  inst.graph = std::make_unique<DynGraph>(count, bipartite);
  if (bipartite) {
    // 2-color the staged edges to assign sides.
    std::vector<std::vector<VertexId>> adj(count);
    for (const auto& pe : staged) {
      if (pe.u >= count || pe.v >= count)
        throw StructuralError("edge endpoint out of range");
      adj[pe.u].push_back(pe.v);
      adj[pe.v].push_back(pe.u);
    }
    std::vector<int> color(count, -1);
    for (VertexId s = 0; s < count; ++s) {
      if (color[s] != -1) continue;
      color[s] = 0;
      std::vector<VertexId> q{s};
      for (size_t qi = 0; qi < q.size(); ++qi) {
        VertexId v = q[qi];
        for (VertexId w : adj[v]) {
          if (color[w] == -1) {
            color[w] = color[v] ^ 1;
            q.push_back(w);
          } else if (color[w] == color[v]) {
            throw InputError("bipartite-declared input has an odd cycle");
          }
        }
      }
    }
    for (VertexId v = 0; v < count; ++v)
      inst.graph->set_side(v, color[v] == 0 ? Side::left : Side::right);
  }
  inst.x = std::make_unique<FracVector>(inst.graph.get());
  for (const auto& pe : staged) {
    EdgeId e = inst.graph->find_edge(pe.u, pe.v);
    if (e == kNoEdge) e = inst.graph->add_edge(pe.u, pe.v);
    Fp w = parse_fp(pe.w);
    if (!w.is_zero()) inst.x->set(e, w);
  }
  return inst;
}

inline LoadedInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return parse_instance(in);
}

inline void write_instance(std::ostream& out, const DynGraph& g,
                           const FracVector& x) {
  out << "n " << g.vertex_count() << ' '
      << (g.bipartite_declared() ? "bipartite" : "general") << '\n';
  for (EdgeId e : g.edge_ids()) {
    auto [u, v] = g.endpoints(e);
    out << "e " << u << ' ' << v << ' ' << fp_to_string(x.get(e)) << '\n';
  }
}

// Stream text format: a comment header followed by events,
//   u <a> <b> <value>   (set x_ab <- value)
//   d <a> <b>           (shorthand for value 0)
inline void write_stream(std::ostream& out, const UpdateStream& s) {
  out << "# stream kind=" << s.kind << " seed=" << s.seed << " n=" << s.n
      << " eps=" << fp_to_string(s.eps) << " delta=" << fp_to_string(s.delta)
      << '\n';
  for (const auto& ev : s.events) {
    if (ev.value.is_zero())
      out << "d " << ev.u << ' ' << ev.v << '\n';
    else
      out << "u " << ev.u << ' ' << ev.v << ' ' << fp_to_string(ev.value)
          << '\n';
  }
}

inline UpdateStream parse_stream(std::istream& in) {
  UpdateStream s;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "#") {
      std::string kv;
      while (ls >> kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        if (key == "kind") s.kind = val;
        if (key == "seed") s.seed = std::stoull(val);
        if (key == "n") s.n = static_cast<uint32_t>(std::stoul(val));
        if (key == "eps") s.eps = parse_fp(val);
        if (key == "delta") s.delta = parse_fp(val);
      }
    } else if (tag == "u") {
      VertexId a, b;
      std::string w;
      if (!(ls >> a >> b >> w))
        throw InputError("stream line " + std::to_string(lineno) +
                         " malformed");
      s.events.push_back({a, b, parse_fp(w)});
    } else if (tag == "d") {
      VertexId a, b;
      if (!(ls >> a >> b))
        throw InputError("stream line " + std::to_string(lineno) +
                         " malformed");
      s.events.push_back({a, b, Fp::zero()});
    } else {
      throw InputError("stream line " + std::to_string(lineno) +
                       ": unknown tag " + tag);
    }
  }
  return s;
}

inline UpdateStream load_stream(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return parse_stream(in);
}

inline nlohmann::json coarsening_report_json(const CoarseningReport& rep) {
  nlohmann::json j;
  j["pass"] = rep.pass();
  j["c0"] = rep.c0;
  j["c1"] = rep.c1;
  j["c2"] = rep.c2;
  j["c3"] = rep.c3;
  if (rep.c4_checked) j["c4"] = rep.c4;
  j["eps"] = fp_to_string(rep.eps);
  j["delta"] = fp_to_string(rep.delta);
  j["c1_slack"] = wide_units_to_string(rep.c1_lhs);
  j["c2_slack"] = wide_units_to_string(rep.c2_lhs);
  if (rep.c0_edge != kNoEdge) j["c0_edge"] = rep.c0_edge;
  if (rep.c3_edge != kNoEdge) j["c3_edge"] = rep.c3_edge;
  if (rep.c4_checked && rep.c4_vertex != kNoVertex)
    j["c4_vertex"] = rep.c4_vertex;
  return j;
}

}  // namespace dmr
