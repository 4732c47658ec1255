// Benchmark and inspection CLI for the dynamic matching-rounding library.
//
// Subcommands: round-static, round-dyn, pipeline, decremental, gen,
// sampler-test. Graphs and streams use the text formats documented in the
// README; metrics print as versioned CSV (deterministic for a fixed config
// and seed; wall-clock timing goes to stderr via --timing).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>

#include "dmr/bench.hpp"
#include "dmr/io.hpp"
#include "dmr/matching.hpp"
#include "dmr/oracle.hpp"
#include "dmr/pipeline.hpp"
#include "dmr/rounder.hpp"
#include "dmr/set_sampler.hpp"
#include "dmr/stream.hpp"
#include "dmr/truncate.hpp"

namespace {

uint64_t default_seed() {
  if (const char* env = std::getenv("DMR_SEED")) return std::strtoull(env, nullptr, 10);
  return 1;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw dmr::InputError("cannot open output file " + path);
  return file;
}

dmr::Backend parse_backend(const std::string& name) {
  if (name == "det") return dmr::Backend::det;
  if (name == "rand") return dmr::Backend::rand;
  if (name == "adaptive") return dmr::Backend::adaptive;
  throw dmr::ParameterError("unknown backend " + name);
}

void print_timing(const dmr::RunMetrics& m) {
  std::cerr << "timing: p50=" << m.wall_p50 << "ns p90=" << m.wall_p90
            << "ns p99=" << m.wall_p99 << "ns per update\n";
}

int cmd_round_static(const std::string& graph_path, const std::string& eps_s,
                     const std::string& out_path) {
  auto inst = dmr::load_instance(graph_path);
  dmr::Fp eps = dmr::parse_fp(eps_s);
  auto trunc = dmr::truncate(*inst.x, eps);
  dmr::Matching m = dmr::static_round(*inst.graph, trunc.x, eps);
  nlohmann::json j;
  j["matching_size"] = m.size();
  j["norm_truncated"] = dmr::wide_units_to_string(trunc.x.norm());
  j["norm_input"] = dmr::wide_units_to_string(inst.x->norm());
  j["effective_bits"] = trunc.effective_bits;
  j["zeroed_edges"] = trunc.zeroed_edges;
  j["trimmed_edges"] = trunc.trimmed_edges;
  auto edges = nlohmann::json::array();
  for (dmr::EdgeId e : m.edges()) {
    auto [u, v] = inst.graph->endpoints(e);
    edges.push_back({u, v});
  }
  j["matching"] = edges;
  std::ofstream file;
  open_out(file, out_path) << j.dump(2) << '\n';
  return 0;
}

int run_and_emit(dmr::LoadedInstance& inst, const dmr::UpdateStream& stream,
                 dmr::RunConfig cfg, const std::string& out_path, bool timing,
                 bool decremental_schema) {
  dmr::RunMetrics m = dmr::run_benchmark(*inst.graph, *inst.x, stream, cfg);
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  m.to_csv(out, decremental_schema);
  out << "# summary steps=" << m.steps << " recourse_total=" << m.recourse_total
      << " amortized_recourse=" << m.amortized_recourse << '\n';
  if (stream.kind == "recourse-path" && !stream.eps.is_zero()) {
    double inv_eps = 1.0 / stream.eps.to_double();
    double floor = 0.5 * inv_eps;
    double ceiling = 10.0 * inv_eps * m.levels * m.levels;
    out << "# recourse-regime floor=" << floor
        << " measured=" << m.amortized_recourse << " ceiling=" << ceiling
        << '\n';
  }
  if (cfg.algo == dmr::Algo::pipeline)
    out << "# pipeline measured_constant=" << m.measured_constant
        << " bound_violations=" << m.bound_violations << '\n';
  if (timing) print_timing(m);
  return 0;
}

int cmd_gen(const std::string& kind, uint32_t n, uint32_t m, size_t steps,
            const std::string& eps_s, const std::string& delta_s,
            uint64_t seed, const std::string& graph_out,
            const std::string& stream_out) {
  dmr::Fp eps = dmr::parse_fp(eps_s);
  dmr::Fp delta = dmr::parse_fp(delta_s);
  dmr::Scenario scen;
  if (kind == "random-bip") {
    scen = dmr::gen_random_bip(n / 2, m, steps, delta, eps, seed);
  } else if (kind == "recourse-path") {
    scen = dmr::gen_recourse_path(eps, steps, seed);
  } else if (kind == "decremental") {
    scen = dmr::gen_decremental(n / 2, m, seed);
  } else if (kind == "heavy-light") {
    scen = dmr::gen_heavy_light(n / 2, m, steps, delta, seed);
  } else {
    throw dmr::ParameterError("unknown stream kind " + kind);
  }
  {
    std::ofstream g(graph_out);
    if (!g) throw dmr::InputError("cannot open " + graph_out);
    dmr::write_instance(g, *scen.graph, *scen.x0);
  }
  {
    std::ofstream s(stream_out);
    if (!s) throw dmr::InputError("cannot open " + stream_out);
    dmr::write_stream(s, scen.stream);
  }
  std::cout << "wrote " << graph_out << " (" << scen.graph->edge_count()
            << " edges) and " << stream_out << " ("
            << scen.stream.events.size() << " events)\n";
  return 0;
}

int cmd_sampler_test(uint32_t n, const std::string& p_s, size_t samples,
                     uint64_t seed, const std::string& mode_s, double freq_tol,
                     const std::string& out_path) {
  dmr::Fp p = dmr::parse_fp(p_s);
  dmr::GeometricMode mode = mode_s == "bernoulli" ? dmr::GeometricMode::bernoulli
                                                  : dmr::GeometricMode::skip;
  std::vector<dmr::Fp> probs(n, p);
  dmr::SetSampler s(n, probs, seed, mode);
  std::vector<long> hits(n, 0);
  for (size_t t = 0; t < samples; ++t) {
    for (uint32_t i : s.sample()) hits[i]++;
    if (t % 997 == 0) s.verify();
  }
  double target = p.to_double();
  double worst = 0;
  for (uint32_t i = 0; i < n; ++i) {
    double f = static_cast<double>(hits[i]) / static_cast<double>(samples);
    worst = std::max(worst, std::abs(f - target));
  }
  nlohmann::json j;
  j["n"] = n;
  j["samples"] = samples;
  j["seed"] = seed;
  j["mode"] = mode_s;
  j["target"] = target;
  j["worst_abs_deviation"] = worst;
  j["tolerance"] = freq_tol;
  j["pass"] = worst <= freq_tol;
  j["operation_count"] = s.operation_count();
  std::ofstream file;
  open_out(file, out_path) << j.dump(2) << '\n';
  return worst <= freq_tol ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic fractional-matching rounding benchmark harness"};
  app.require_subcommand(1);

  std::string graph_path, stream_path, out_path, eps_s = "0.1",
                                                 delta_s = "0", mode_s = "fast",
                                                 backend_s = "det";
  uint64_t seed = default_seed();
  bool timing = false;

  auto* rs = app.add_subcommand("round-static", "statically round a vector");
  rs->add_option("graph", graph_path)->required();
  rs->add_option("--eps", eps_s)->required();
  rs->add_option("--out", out_path);

  auto* rd = app.add_subcommand("round-dyn", "run the dynamic rounder");
  rd->add_option("graph", graph_path)->required();
  rd->add_option("stream", stream_path)->required();
  rd->add_option("--eps", eps_s)->required();
  rd->add_option("--delta", delta_s);
  rd->add_option("--mode", mode_s)->check(CLI::IsMember({"fast", "slow"}));
  rd->add_option("--out", out_path);
  rd->add_flag("--timing", timing);

  auto* pl = app.add_subcommand("pipeline", "coarsen-then-round pipeline");
  pl->add_option("graph", graph_path)->required();
  pl->add_option("stream", stream_path)->required();
  pl->add_option("--backend", backend_s)
      ->check(CLI::IsMember({"det", "rand", "adaptive"}));
  pl->add_option("--eps", eps_s)->required();
  pl->add_option("--mode", mode_s)->check(CLI::IsMember({"fast", "slow"}));
  pl->add_option("--seed", seed);
  pl->add_option("--out", out_path);
  pl->add_flag("--timing", timing);

  auto* dec = app.add_subcommand("decremental", "decremental framework run");
  dec->add_option("graph", graph_path)->required();
  dec->add_option("stream", stream_path)->required();
  dec->add_option("--eps", eps_s)->required();
  dec->add_option("--mode", mode_s)->check(CLI::IsMember({"fast", "slow"}));
  dec->add_option("--out", out_path);
  dec->add_flag("--timing", timing);

  std::string kind = "random-bip", graph_out = "graph.txt",
              stream_out = "stream.txt";
  uint32_t gen_n = 40, gen_m = 200;
  size_t gen_steps = 1000;
  auto* gen = app.add_subcommand("gen", "generate a graph + update stream");
  gen->add_option("kind", kind)
      ->check(CLI::IsMember(
          {"random-bip", "recourse-path", "decremental", "heavy-light"}));
  gen->add_option("--n", gen_n);
  gen->add_option("--m", gen_m);
  gen->add_option("--steps", gen_steps);
  gen->add_option("--eps", eps_s);
  gen->add_option("--delta", delta_s);
  gen->add_option("--seed", seed);
  gen->add_option("--out-graph", graph_out);
  gen->add_option("--out-stream", stream_out);

  uint32_t st_n = 20;
  std::string st_p = "0.5";
  size_t st_samples = 100000;
  double st_tol = 0.01;
  std::string st_mode = "skip";
  auto* st = app.add_subcommand("sampler-test", "set sampler statistics");
  st->add_option("--n", st_n);
  st->add_option("--p", st_p);
  st->add_option("--samples", st_samples);
  st->add_option("--seed", seed);
  st->add_option("--mode", st_mode)->check(CLI::IsMember({"skip", "bernoulli"}));
  st->add_option("--freq-tol", st_tol);
  st->add_option("--out", out_path);

  CLI11_PARSE(app, argc, argv);

  try {
    if (rs->parsed()) return cmd_round_static(graph_path, eps_s, out_path);
    if (gen->parsed())
      return cmd_gen(kind, gen_n, gen_m, gen_steps, eps_s,
                     delta_s == "0" ? "1/256" : delta_s, seed, graph_out,
                     stream_out);
    if (st->parsed())
      return cmd_sampler_test(st_n, st_p, st_samples, seed, st_mode, st_tol,
                              out_path);

    auto inst = dmr::load_instance(graph_path);
    dmr::UpdateStream stream = dmr::load_stream(stream_path);
    dmr::RunConfig cfg;
    cfg.eps = dmr::parse_fp(eps_s);
    cfg.delta = dmr::parse_fp(delta_s);
    cfg.slow_verify = mode_s == "slow";
    cfg.seed = seed;
    if (rd->parsed()) {
      cfg.algo = dmr::Algo::direct;
      return run_and_emit(inst, stream, cfg, out_path, timing, false);
    }
    if (pl->parsed()) {
      cfg.algo = dmr::Algo::pipeline;
      cfg.backend = parse_backend(backend_s);
      return run_and_emit(inst, stream, cfg, out_path, timing, false);
    }
    cfg.algo = dmr::Algo::decremental;
    cfg.track_mu = cfg.slow_verify;
    return run_and_emit(inst, stream, cfg, out_path, timing, true);
  } catch (const dmr::VerifyError& e) {
    std::cerr << "invariant failure: " << e.what() << '\n';
    return 2;
  } catch (const dmr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
