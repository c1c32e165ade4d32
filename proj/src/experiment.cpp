#include "tvg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tvg/consensus.hpp"
#include "tvg/csv.hpp"
#include "tvg/decopt.hpp"
#include "tvg/lowerbound.hpp"
#include "tvg/markov.hpp"
#include "tvg/rng.hpp"
#include "tvg/spectral.hpp"

namespace tvg {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("config: cannot open " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw SchemaError("config: top level must be an object");
  return cfg;
}

template <typename T>
T require(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw SchemaError("config: missing key '" + key + "'");
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError("config: key '" + key + "' has the wrong type");
  }
}

template <typename T>
T get_or(const json& cfg, const std::string& key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError("config: key '" + key + "' has the wrong type");
  }
}

std::string resolve_input(const std::string& path, const fs::path& config_dir) {
  fs::path p(path);
  return p.is_absolute() ? p.string() : (config_dir / p).string();
}

struct RunContext {
  json cfg;
  fs::path config_dir;
  fs::path out_dir;
  std::string prefix;
  std::uint64_t seed = 0;
  bool tag_seed = false;  // sweep runs embed the seed in file names

  std::string out_path(const std::string& name) const {
    std::string stem = prefix;
    if (tag_seed) stem += "_s" + std::to_string(seed);
    return (out_dir / (stem + "_" + name)).string();
  }
};

void write_manifest(const RunContext& ctx, json manifest) {
  manifest["version"] = kLibraryVersion;
  manifest["seed"] = ctx.seed;
  std::ofstream out(ctx.out_path("manifest.json"));
  if (!out) throw std::runtime_error("manifest: cannot write " + ctx.out_path("manifest.json"));
  out << manifest.dump(2) << "\n";
}

Vector make_x0(const json& cfg, int n, std::uint64_t seed) {
  const json spec = cfg.contains("x0") ? cfg.at("x0") : json{{"type", "gaussian"}};
  const std::string type = get_or<std::string>(spec, "type", "gaussian");
  if (type == "gaussian") {
    const double scale = get_or<double>(spec, "scale", 1.0);
    auto rng = make_rng(seed, "x0");
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = scale * normal(rng);
    return x;
  }
  if (type == "ramp") {
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = double(i);
    return x;
  }
  if (type == "explicit") {
    auto values = require<std::vector<double>>(spec, "values");
    if (static_cast<int>(values.size()) != n)
      throw std::invalid_argument("x0: explicit vector has the wrong length");
    return Eigen::Map<Vector>(values.data(), n);
  }
  throw SchemaError("x0: unknown type '" + type + "'");
}

json spectral_block(const SpectralSummary& s) {
  return {{"lambda_max", s.lambda_max}, {"lambda_min_plus", s.lambda_min_plus}, {"chi", s.chi}};
}

json consensus_params_block(const ConsensusParams& cp) {
  return {{"gamma", cp.gamma}, {"p", cp.p},     {"beta", cp.beta}, {"eta", cp.eta},
          {"theta", cp.theta}, {"M", cp.M},     {"B", cp.B},       {"b", cp.b},
          {"N", cp.N}};
}

void run_spectral(const RunContext& ctx) {
  const WeightedGraph g =
      read_graph_file(resolve_input(require<std::string>(ctx.cfg, "graph"), ctx.config_dir));
  const GossipMatrix W = build_laplacian(g);
  const SpectralSummary s = spectral_summary(W);
  const Vector ev = symmetric_eigenvalues(W);

  std::vector<CsvRow> rows;
  for (int i = 0; i < ev.size(); ++i) rows.push_back({static_cast<long long>(i), ev(i)});
  emit_csv(ctx.out_path("eigenvalues.csv"), "index,eigenvalue", rows);

  json manifest{{"kind", "spectral"},
                {"n", g.n()},
                {"m", g.graph().m()},
                {"diameter", g.graph().diameter()},
                {"gershgorin_bound", gershgorin_bound(g)},
                {"spectrum", spectral_block(s)}};
  if (get_or<bool>(ctx.cfg, "shortest_path_weighting", false)) {
    const WeightedGraph w = shortest_path_weighting(g.graph());
    write_graph_file(ctx.out_path("weighted.txt"), w);
    manifest["shortest_path_weighting"] = spectral_block(spectral_summary(build_laplacian(w)));
  }
  write_manifest(ctx, manifest);
}

void run_family_diagnose(const RunContext& ctx) {
  const FamilySpec spec =
      read_family_file(resolve_input(require<std::string>(ctx.cfg, "family"), ctx.config_dir));
  MarkovGraphChain chain = spec.make_chain(ctx.seed);
  const GossipMatrix W = mean_gossip(spec.family);
  const SpectralSummary s = spectral_summary(W);

  const int horizon = get_or<int>(ctx.cfg, "mixing_horizon", 16);
  std::vector<CsvRow> rows;
  for (int m = 1; m <= horizon; ++m) {
    const MixingDiagnostic diag = chain.mixing_diagnostic(m);
    rows.push_back({static_cast<long long>(m), diag.delta,
                    std::pow(0.25, m / spec.tau), std::string(diag.consistent ? "1" : "0")});
  }
  emit_csv(ctx.out_path("mixing.csv"), "m,delta,bound,ok", rows);

  write_manifest(ctx, json{{"kind", "family-diagnose"},
                           {"members", spec.family.size()},
                           {"n", spec.family.n()},
                           {"tau", spec.tau},
                           {"rho", rho_bound(spec.family)},
                           {"primitive", chain.is_primitive()},
                           {"spectrum", spectral_block(s)}});
}

void run_consensus_experiment(const RunContext& ctx) {
  const FamilySpec spec =
      read_family_file(resolve_input(require<std::string>(ctx.cfg, "family"), ctx.config_dir));
  MarkovGraphChain chain = spec.make_chain(split_seed(ctx.seed, "chain"));
  const SpectralSummary s = spectral_summary(mean_gossip(spec.family));
  const double rho = rho_bound(spec.family);
  const int b = get_or<int>(ctx.cfg, "b", spec.tau);
  const long iterations = require<long>(ctx.cfg, "iterations");

  ConsensusParams cp = derive_consensus_params(s.lambda_max, s.lambda_min_plus, rho,
                                               spec.tau, b, iterations);
  const Vector x0 = make_x0(ctx.cfg, spec.family.n(), ctx.seed);
  const ConsensusTrace trace = run_consensus(x0, chain, cp, ctx.seed);

  std::vector<CsvRow> rows;
  for (const auto& row : trace)
    rows.push_back({static_cast<long long>(row.k), static_cast<unsigned long long>(row.T),
                    row.dist2, row.r_gap, row.potential});
  emit_csv(ctx.out_path("trace.csv"), "k,T,dist2,r_gap,potential", rows);

  write_manifest(ctx, json{{"kind", "consensus"},
                           {"n", spec.family.n()},
                           {"tau", spec.tau},
                           {"rho", rho},
                           {"spectrum", spectral_block(s)},
                           {"params", consensus_params_block(cp)}});
}

void run_decopt_experiment(const RunContext& ctx) {
  const FamilySpec spec =
      read_family_file(resolve_input(require<std::string>(ctx.cfg, "family"), ctx.config_dir));
  MarkovGraphChain chain = spec.make_chain(split_seed(ctx.seed, "chain"));
  const ChainConstants cc = chain_constants(chain);

  const json obj_cfg = require<json>(ctx.cfg, "objectives");
  const std::string obj_type = require<std::string>(obj_cfg, "type");
  std::vector<LocalObjective> objectives;
  if (obj_type == "random_quadratic") {
    objectives = random_quadratic_suite(spec.family.n(), require<int>(obj_cfg, "dim"),
                                        require<double>(obj_cfg, "mu"),
                                        require<double>(obj_cfg, "L"),
                                        split_seed(ctx.seed, "objectives"));
  } else if (obj_type == "worstcase") {
    objectives = worstcase_suite(require<int>(obj_cfg, "n_param"), require<double>(obj_cfg, "mu"),
                                 require<double>(obj_cfg, "L"), require<int>(obj_cfg, "m_max"));
    if (static_cast<int>(objectives.size()) != spec.family.n())
      throw std::invalid_argument("decopt: worst-case suite size differs from family n");
  } else {
    throw SchemaError("decopt: unknown objectives type '" + obj_type + "'");
  }

  const double mu = objectives.front().mu, L = objectives.front().L;
  const double epsilon = get_or<double>(ctx.cfg, "epsilon", 1e-6);
  const int dim = objectives.front().dim;
  Vector x0 = Vector::Zero(dim);

  AgdResult oracle = centralized_agd(objectives, x0, 1.0 / L,
                                     (std::sqrt(L) - std::sqrt(mu)) / (std::sqrt(L) + std::sqrt(mu)),
                                     1e-12, 200000);
  const double c0 = std::max(average_value(objectives, x0) - average_value(objectives, oracle.x),
                             epsilon);
  DecoptParams dp = derive_outer_params(mu, L, epsilon, c0, cc);
  if (ctx.cfg.contains("overrides")) {
    const json ov = ctx.cfg.at("overrides");
    dp.N = get_or<long>(ov, "N", dp.N);
    dp.T = get_or<long>(ov, "T", dp.T);
  }
  ConsensusParams cp = derive_consensus_params(cc.lambda_max, cc.lambda_min_plus, cc.rho,
                                               cc.tau, cc.tau, dp.T);

  const DecoptResult result = run_decopt(objectives, chain, dp, cp, x0, ctx.seed);
  std::vector<CsvRow> rows;
  for (const auto& row : result.trace)
    rows.push_back({static_cast<long long>(row.k), static_cast<unsigned long long>(row.comms),
                    row.gap, row.consensus_err});
  emit_csv(ctx.out_path("trace.csv"), "k,comms,gap,consensus_err", rows);

  write_manifest(ctx, json{{"kind", "decopt"},
                           {"n", spec.family.n()},
                           {"mu", mu},
                           {"L", L},
                           {"epsilon", epsilon},
                           {"c0", c0},
                           {"f_star", result.f_star},
                           {"tau", cc.tau},
                           {"rho", cc.rho},
                           {"spectrum", json{{"lambda_max", cc.lambda_max},
                                             {"lambda_min_plus", cc.lambda_min_plus},
                                             {"chi", cc.chi}}},
                           {"outer", json{{"gamma", dp.gamma},
                                          {"eta", dp.eta_momentum},
                                          {"N", dp.N},
                                          {"T", dp.T}}},
                           {"params", consensus_params_block(cp)}});
}

void run_lowerbound_experiment(const RunContext& ctx) {
  const int n_param = require<int>(ctx.cfg, "n");
  const int periods = get_or<int>(ctx.cfg, "periods", 1);
  double chi_target = get_or<double>(ctx.cfg, "chi_target", 0.0);
  const bool wants_floor = ctx.cfg.contains("floor");
  if (chi_target <= 0.0) {
    chi_target = max_period_chi(n_param);
    if (wants_floor) chi_target = std::max(chi_target, 56.5);
  }

  const int t = phase_length(n_param);
  CounterexampleSequence seq(n_param, chi_target);
  json steps = json::array();
  const bool dump_graphs = get_or<bool>(ctx.cfg, "dump_graphs", true);
  for (int k = 0; k < 2 * t * periods; ++k) {
    const int phase = seq.phase();
    const int a = seq.current().a, b = seq.current().b;
    const WeightedGraph w = seq.weighted_current();
    if (dump_graphs) {
      char name[64];
      std::snprintf(name, sizeof(name), "step_%04d.txt", k);
      write_graph_file(ctx.out_path(name), w);
    }
    const auto change = seq.phase_step();
    steps.push_back(json{{"step", k},
                         {"phase", phase},
                         {"a", a},
                         {"b", b},
                         {"removed", {change.removed.first, change.removed.second}},
                         {"added", {change.added.first, change.added.second}},
                         {"chi", spectral_summary(build_laplacian(w)).chi}});
  }

  json manifest{{"kind", "lowerbound"}, {"n", n_param},        {"t", t},
                {"period", 2 * t},      {"chi", chi_target},   {"steps", steps}};

  if (ctx.cfg.contains("span")) {
    const int m_probe = require<int>(ctx.cfg.at("span"), "m_max");
    std::vector<CsvRow> rows;
    for (int m = 1; m <= m_probe; ++m) {
      const FirstNonzero fn = first_nonzero_time(n_param, m);
      rows.push_back({static_cast<long long>(m), static_cast<long long>(fn.l_m),
                      static_cast<long long>(fn.bound)});
    }
    emit_csv(ctx.out_path("span.csv"), "m,l_m,bound", rows);
  }

  if (wants_floor) {
    const json fc = ctx.cfg.at("floor");
    const double mu = require<double>(fc, "mu"), L = require<double>(fc, "L");
    const int m_max = require<int>(fc, "m_max");
    const long rounds = require<long>(fc, "rounds");
    const long inner_T = get_or<long>(fc, "inner_T", 8);

    auto suite = worstcase_suite(n_param, mu, L, m_max);
    const Vector x_star = worstcase_global_minimizer(n_param, mu, L, m_max);
    const double dist0 = x_star.squaredNorm();
    const Vector x0 = Vector::Zero(m_max);

    // Accelerated outer method on the adversarial sequence.
    {
      CounterexampleSource src(n_param, chi_target);
      const SpectralSummary sm = spectral_summary(src.period_mean());
      ConsensusParams cp = derive_consensus_params(sm.lambda_max, sm.lambda_min_plus,
                                                   src.period_rho(), 1, 1, inner_T);
      DecoptParams dp;
      dp.gamma = 1.0 / L;
      dp.eta_momentum = (std::sqrt(L) - std::sqrt(mu)) / (std::sqrt(L) + std::sqrt(mu));
      dp.T = inner_T;
      auto rng = make_rng(ctx.seed, "floor-decopt");
      NodeState state = NodeState::init(static_cast<int>(suite.size()), x0);
      std::vector<CsvRow> rows;
      std::uint64_t comms = 0;
      auto record = [&]() {
        Vector mean = state.x.colwise().mean().transpose();
        const double d2 = (mean - x_star).squaredNorm();
        rows.push_back({static_cast<unsigned long long>(comms), d2,
                        theoretical_floor(double(comms), chi_target, mu, L, dist0)});
      };
      record();
      for (long k = 0; k < 100000 && comms < static_cast<std::uint64_t>(rounds); ++k) {
        comms += outer_step(state, suite, dp, cp, src, rng);
        record();
      }
      emit_csv(ctx.out_path("floor_decopt.csv"), "k,dist2,floor", rows);
    }

    // Plain gossip-gradient baseline.
    {
      CounterexampleSource src(n_param, chi_target);
      auto trace = run_gossip_gradient(suite, src, src.lambda_cap(), 1.0 / L, rounds, x0, x_star);
      std::vector<CsvRow> rows;
      for (const auto& row : trace)
        rows.push_back({static_cast<long long>(row.k), row.dist2,
                        theoretical_floor(double(row.k), chi_target, mu, L, dist0)});
      emit_csv(ctx.out_path("floor_gossip.csv"), "k,dist2,floor", rows);
    }
    manifest["floor"] = json{{"mu", mu},       {"L", L},         {"m_max", m_max},
                             {"rounds", rounds}, {"dist0", dist0},
                             {"kappa_g", worstcase_global_kappa(n_param, mu, L)}};
  }

  write_manifest(ctx, manifest);
}

int run_single(const json& cfg, const fs::path& config_dir, const fs::path& out_dir,
               std::uint64_t seed, bool tag_seed) {
  RunContext ctx;
  ctx.cfg = cfg;
  ctx.config_dir = config_dir;
  ctx.out_dir = out_dir;
  ctx.seed = seed;
  ctx.tag_seed = tag_seed;
  ctx.prefix = get_or<std::string>(cfg, "out_prefix", require<std::string>(cfg, "kind"));

  const std::string kind = require<std::string>(cfg, "kind");
  if (kind == "spectral")
    run_spectral(ctx);
  else if (kind == "family-diagnose")
    run_family_diagnose(ctx);
  else if (kind == "consensus")
    run_consensus_experiment(ctx);
  else if (kind == "decopt")
    run_decopt_experiment(ctx);
  else if (kind == "lowerbound")
    run_lowerbound_experiment(ctx);
  else
    throw SchemaError("config: unknown kind '" + kind + "'");
  return kExitOk;
}

}  // namespace

int run_experiment(const std::string& config_path, const ExperimentOverrides& overrides) {
  try {
    const json cfg = load_config(config_path);
    const fs::path config_dir = fs::path(config_path).parent_path();
    const std::string kind = require<std::string>(cfg, "kind");
    std::uint64_t seed = overrides.seed ? *overrides.seed : get_or<std::uint64_t>(cfg, "seed", 0);
    if (overrides.sweep < 1) throw SchemaError("sweep: must be >= 1");

    const fs::path out_dir(overrides.out_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir.string());

    if (overrides.sweep == 1) return run_single(cfg, config_dir, out_dir, seed, false);

    std::vector<int> codes(overrides.sweep, kExitOk);
    std::vector<std::string> errors(overrides.sweep);
    const unsigned workers =
        std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                        static_cast<unsigned>(overrides.sweep)));
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (int i = next.fetch_add(1); i < overrides.sweep; i = next.fetch_add(1)) {
          try {
            codes[i] = run_single(cfg, config_dir, out_dir, seed + i, true);
          } catch (const SchemaError& e) {
            codes[i] = kExitSchemaError;
            errors[i] = e.what();
          } catch (const std::logic_error& e) {
            codes[i] = kExitPreconditionError;
            errors[i] = e.what();
          } catch (const std::exception& e) {
            codes[i] = kExitIoError;
            errors[i] = e.what();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    int worst = kExitOk;
    for (int i = 0; i < overrides.sweep; ++i) {
      if (codes[i] != kExitOk) std::cerr << "seed " << seed + i << ": " << errors[i] << "\n";
      worst = std::max(worst, codes[i]);
    }
    return worst;
  } catch (const SchemaError& e) {
    std::cerr << e.what() << "\n";
    return kExitSchemaError;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kExitPreconditionError;
  } catch (const std::logic_error& e) {
    std::cerr << e.what() << "\n";
    return kExitPreconditionError;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitIoError;
  }
}

}  // namespace tvg
