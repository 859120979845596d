// soficspin command-line driver.
//
// Subcommands: simulate | verify | sofic | fed | diagnose. Every run is
// driven by a JSON config; outputs embed the config hash and tool version so
// a rerun with the same config reproduces them byte for byte.
//
// Exit codes: 0 ok, 1 check failed, 2 config error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "soficspin/diagnostics.hpp"
#include "soficspin/dynamics.hpp"
#include "soficspin/fed.hpp"
#include "soficspin/parallel.hpp"
#include "soficspin/serialize.hpp"
#include "soficspin/targets.hpp"
#include "soficspin/verify.hpp"
#include "soficspin/version.hpp"

namespace fs = std::filesystem;
using namespace soficspin;

namespace {

struct Cli {
  std::string config_path;
  std::string out_dir = "out";
  int workers = 0;  // 0 = machine parallelism
  long long seed_override = -1;
  std::string suite = "all";  // verify only
};

json load_config(const Cli& cli) {
  std::ifstream in(cli.config_path);
  if (!in) throw ConfigError("cannot open config file '" + cli.config_path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return j;
}

std::string stamp(const json& config) {
  return std::string("# soficspin ") + kVersion + " config_hash=" + to_hex(json_hash(config));
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write output file '" + path.string() + "'");
  out << content;
}

void write_json(const fs::path& path, json j, const json& config) {
  j["config_hash"] = to_hex(json_hash(config));
  j["tool_version"] = kVersion;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write output file '" + path.string() + "'");
  out << std::setw(2) << j << "\n";
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Config pieces
// ---------------------------------------------------------------------------

std::vector<HomGraph> homs_from_config(const json& j, const GroupSpec& spec,
                                       long long seed_override) {
  if (!j.contains("homs")) throw ConfigError("config: missing \"homs\"");
  const json& h = j["homs"];
  const std::string source = h.at("source").get<std::string>();
  std::vector<HomGraph> out;
  if (source == "cycles") {
    for (int n : h.at("sizes").get<std::vector<int>>()) out.push_back(cycle_hom(n));
  } else if (source == "tori") {
    for (const auto& dims : h.at("dims").get<std::vector<std::vector<int>>>())
      out.push_back(torus_hom(dims));
  } else if (source == "random") {
    auto sizes = h.at("sizes").get<std::vector<int>>();
    std::vector<std::uint64_t> seeds;
    if (seed_override >= 0) {
      for (size_t i = 0; i < sizes.size(); ++i)
        seeds.push_back(static_cast<std::uint64_t>(seed_override) + i);
    } else {
      seeds = h.at("seeds").get<std::vector<std::uint64_t>>();
    }
    if (seeds.size() != sizes.size())
      throw ConfigError("config: homs.seeds must match homs.sizes");
    for (size_t i = 0; i < sizes.size(); ++i)
      out.push_back(random_hom(spec, sizes[i], seeds[i]));
  } else if (source == "explicit") {
    for (const auto& hj : h.at("homs")) out.push_back(hom_from_json(hj));
  } else {
    throw ConfigError("config: unknown homs.source '" + source + "'");
  }
  for (const HomGraph& hom : out) {
    auto rep = validate(hom, spec);
    if (!rep.ok) throw ConfigError("config: hom fails validation: " + rep.message);
  }
  return out;
}

TargetMeasure target_from_config(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "product") return TargetMeasure::product(j.at("probs").get<std::vector<double>>());
  if (kind == "gibbs_chain") return TargetMeasure::gibbs_chain();
  if (kind == "explicit")
    return TargetMeasure::explicit_marginals(pattern_distribution_from_json(j));
  throw ConfigError("config: unknown target kind '" + kind + "'");
}

DenseState initial_state_from_config(const json& j, const StateSpace& space,
                                     const SpinModel& model, const HomGraph& hom) {
  if (!j.contains("initial")) return DenseState::uniform(space);
  const json& init = j["initial"];
  const std::string kind = init.at("kind").get<std::string>();
  if (kind == "uniform") return DenseState::uniform(space);
  if (kind == "gibbs") return gibbs_finite(model, hom).state;
  if (kind == "product")
    return DenseState::product(space, init.at("probs").get<std::vector<double>>());
  if (kind == "microstate") {
    Microstate x;
    for (const auto& l : init.at("labels")) x.push_back(l.get<Letter>());
    if (static_cast<int>(x.size()) != space.sites)
      throw ConfigError("config: initial microstate has wrong length");
    return DenseState::point_mass(space, x);
  }
  throw ConfigError("config: unknown initial state kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_simulate(const Cli& cli, const json& config) {
  GroupSpec spec = group_spec_from_json(config.at("group"));
  SpinModel model = model_from_json(config.at("model"));
  std::vector<HomGraph> homs = homs_from_config(config, spec, cli.seed_override);
  const json& dyn = config.at("dynamics");
  const double dt = dyn.value("dt", 1e-3);

  fs::create_directories(cli.out_dir);
  for (const HomGraph& hom : homs) {
    if (dyn.contains("t_grid")) {
      StateSpace space(hom.n, model.alphabet);
      DenseState zeta = initial_state_from_config(dyn, space, model, hom);
      double t_prev = 0.0;
      for (double t : dyn["t_grid"].get<std::vector<double>>()) {
        if (t < t_prev) throw ConfigError("config: t_grid must be nondecreasing");
        zeta = evolve_exact(model, hom, zeta, t - t_prev, dt);
        t_prev = t;
        json snap{{"n", hom.n}, {"t", t}, {"probs", zeta.p}};
        std::ostringstream name;
        name << "state_n" << hom.n << "_t" << t << ".json";
        write_json(fs::path(cli.out_dir) / name.str(), snap, config);
      }
    }
    const int n_traj = dyn.value("trajectories", 0);
    if (n_traj > 0) {
      const double t_end = dyn.value("trajectory_t", 1.0);
      std::vector<std::uint64_t> seeds;
      if (cli.seed_override >= 0) {
        for (int s = 0; s < n_traj; ++s)
          seeds.push_back(static_cast<std::uint64_t>(cli.seed_override) + s);
      } else if (dyn.contains("seeds")) {
        seeds = dyn["seeds"].get<std::vector<std::uint64_t>>();
      } else {
        throw ConfigError("config: dynamics.seeds required for trajectories");
      }
      if (static_cast<int>(seeds.size()) < n_traj)
        throw ConfigError("config: not enough trajectory seeds");
      Microstate x0(hom.n, 0);
      if (dyn.contains("initial") && dyn["initial"].value("kind", "") == "microstate")
        for (size_t v = 0; v < x0.size(); ++v)
          x0[v] = dyn["initial"]["labels"][v].get<Letter>();
      for (int s = 0; s < n_traj; ++s) {
        TrajectoryResult traj = sample_trajectory(model, hom, x0, t_end, seeds[s]);
        std::ostringstream body;
        body << stamp(config) << "\n";
        body << "time,site,new_letter\n";
        body << std::setprecision(17);
        for (const TrajectoryEvent& ev : traj.events)
          body << ev.time << "," << ev.site << "," << static_cast<int>(ev.new_letter) << "\n";
        std::ostringstream name;
        name << "trajectory_n" << hom.n << "_seed" << seeds[s] << ".csv";
        write_text(fs::path(cli.out_dir) / name.str(), body.str());
      }
    }
  }
  std::cout << "simulate: wrote outputs to " << cli.out_dir << "\n";
  return 0;
}

int cmd_verify(const Cli& cli, const json& config) {
  std::string suite = cli.suite;
  if (config.contains("verify") && config["verify"].contains("suite"))
    suite = config["verify"]["suite"].get<std::string>();
  std::vector<verify::SuiteResult> results = verify::run_named(suite);

  bool all_pass = true;
  json out;
  out["suites"] = json::array();
  for (const auto& suite_result : results) {
    json js{{"suite", suite_result.suite},
            {"pass", suite_result.pass},
            {"seconds", suite_result.seconds},
            {"checks", json::array()}};
    for (const auto& check : suite_result.checks) {
      js["checks"].push_back(json{{"name", check.name},
                                  {"value", check.value},
                                  {"threshold", check.threshold},
                                  {"relation", check.relation},
                                  {"pass", check.pass}});
      std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << suite_result.suite << ": "
                << check.name << "  (" << fmt(check.value) << " " << check.relation << " "
                << fmt(check.threshold) << ")\n";
    }
    all_pass = all_pass && suite_result.pass;
  }
  fs::create_directories(cli.out_dir);
  write_json(fs::path(cli.out_dir) / "verify_report.json", out, config);
  std::cout << (all_pass ? "verify: all checks passed\n" : "verify: FAILURES\n");
  return all_pass ? 0 : 1;
}

int cmd_sofic(const Cli& cli, const json& config) {
  GroupSpec spec = group_spec_from_json(config.at("group"));
  std::vector<HomGraph> homs = homs_from_config(config, spec, cli.seed_override);
  const int R_max = config.contains("sofic") ? config["sofic"].value("R_max", 8) : 8;

  std::vector<DeltaResult> results(homs.size());
  parallel_for(static_cast<int>(homs.size()), cli.workers,
               [&](int i) { results[i] = Delta(homs[i], spec, R_max); });

  std::ostringstream body;
  body << stamp(config) << "\n";
  body << "n,R_star,Delta,slack";
  for (int R = 0; R <= R_max; ++R) body << ",delta_" << R;
  body << "\n" << std::setprecision(17);
  for (size_t i = 0; i < homs.size(); ++i) {
    body << homs[i].n << "," << results[i].minimizing_R << "," << results[i].value << ","
         << results[i].slack;
    for (double d : results[i].deltas) body << "," << d;
    body << "\n";
  }
  fs::create_directories(cli.out_dir);
  write_text(fs::path(cli.out_dir) / "sofic.csv", body.str());
  std::cout << "sofic: wrote " << (fs::path(cli.out_dir) / "sofic.csv").string() << "\n";
  return 0;
}

int cmd_fed(const Cli& cli, const json& config) {
  GroupSpec spec = group_spec_from_json(config.at("group"));
  SpinModel model = model_from_json(config.at("model"));
  const json& fj = config.at("fed");

  SoficSequenceSpec seq;
  const json& h = config.at("homs");
  const std::string source = h.at("source").get<std::string>();
  if (source == "cycles") {
    seq.generator = SoficSequenceSpec::Generator::Cycles;
    seq.sizes = h.at("sizes").get<std::vector<int>>();
  } else if (source == "tori") {
    seq.generator = SoficSequenceSpec::Generator::Tori;
    seq.torus_dims = h.at("dims").get<std::vector<std::vector<int>>>();
  } else if (source == "random") {
    seq.generator = SoficSequenceSpec::Generator::RandomFree;
    seq.sizes = h.at("sizes").get<std::vector<int>>();
    seq.seeds = h.at("seeds").get<std::vector<std::uint64_t>>();
  } else if (source == "explicit") {
    seq.generator = SoficSequenceSpec::Generator::ExplicitList;
    for (const auto& hj : h.at("homs")) seq.explicit_list.push_back(hom_from_json(hj));
  } else {
    throw ConfigError("config: unknown homs.source '" + source + "'");
  }

  TargetMeasure target = target_from_config(fj.at("target"));
  const int R = fj.at("R").get<int>();
  FedOptions opts;
  opts.workers = cli.workers;
  if (cli.seed_override >= 0) opts.seed = static_cast<std::uint64_t>(cli.seed_override);
  if (fj.contains("delta_rmax")) opts.delta_rmax = fj["delta_rmax"].get<int>();

  FedEstimate est = fed_estimate(spec, seq, model, target,
                                 fj.at("epsilon_schedule").get<std::vector<double>>(), R, opts);

  std::ostringstream body;
  body << stamp(config) << "\n";
  body << "n,epsilon,R,value_or_inf,status,residual\n" << std::setprecision(17);
  for (const FedCell& cell : est.cells) {
    body << cell.n << "," << cell.epsilon << "," << cell.R << ",";
    if (cell.is_infinite) body << "inf";
    else body << cell.value;
    body << ","
         << (cell.status == CellStatus::Feasible
                 ? "feasible"
                 : cell.status == CellStatus::InfeasibleCertified ? "infeasible" : "flagged")
         << "," << cell.residual << "\n";
  }
  fs::create_directories(cli.out_dir);
  write_text(fs::path(cli.out_dir) / "fed_table.csv", body.str());

  json summary{{"headline_infinite", est.headline_infinite},
               {"headline", est.headline},
               {"headline_n", est.headline_n},
               {"headline_epsilon", est.headline_epsilon},
               {"member_deltas", est.member_deltas}};
  if (source == "cycles" || source == "tori") {
    FedLogZResult shortcut = fed_via_logZ(spec, seq, model);
    summary["log_z_shortcut"] = json{{"value", shortcut.value}};
    json per_n = json::array();
    for (const auto& [n, v] : shortcut.per_n)
      per_n.push_back(json{{"n", n}, {"per_site_log_Z", v}});
    summary["log_z_shortcut"]["per_n"] = per_n;
  }
  write_json(fs::path(cli.out_dir) / "fed_summary.json", summary, config);
  std::cout << "fed: wrote fed_table.csv and fed_summary.json to " << cli.out_dir << "\n";
  return 0;
}

int cmd_diagnose(const Cli& cli, const json& config) {
  GroupSpec spec = group_spec_from_json(config.at("group"));
  SpinModel model = model_from_json(config.at("model"));
  const json& dj = config.at("diagnostics");
  const int R = dj.at("R").get<int>();
  const double tol = dj.value("tol", 1e-8);

  CayleyBall ball = build_ball(spec, R);
  TargetMeasure target = target_from_config(dj.at("target"));
  PatternDistribution mu = target.marginal_at(spec, ball, model);

  GibbsReport rep = gibbs_conditional_check(mu, model, ball, tol);
  auto cert = non_gibbs_certificate(mu, model, ball);

  json out{{"R", rep.R},
           {"tol", rep.tol},
           {"delta_per_letter", rep.delta_per_letter},
           {"full_support", rep.full_support},
           {"max_conditional_deviation", rep.max_conditional_deviation},
           {"verdict", rep.verdict == GibbsVerdict::ConsistentToDepth
                           ? "consistent_to_depth"
                           : "violation"}};
  if (cert) {
    out["certificate"] =
        json{{"kind", cert->kind == WitnessKind::SupportViolation ? "support_violation"
                                                                  : "negative_term"},
             {"pattern", cert->pattern},
             {"letter", cert->letter},
             {"term", cert->term},
             {"deficit_rate", cert->deficit_rate}};
  } else {
    out["certificate"] = nullptr;
  }
  fs::create_directories(cli.out_dir);
  write_json(fs::path(cli.out_dir) / "diagnose.json", out, config);
  std::cout << "diagnose: verdict "
            << (rep.verdict == GibbsVerdict::ConsistentToDepth ? "consistent" : "violation")
            << ", report in " << cli.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spin systems on Cayley graphs and finite permutation models"};
  app.require_subcommand(1);
  Cli cli;

  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* opt = sub->add_option("--config", cli.config_path, "JSON config file");
    if (need_config) opt->required();
    sub->add_option("--out", cli.out_dir, "output directory");
    sub->add_option("--workers", cli.workers, "worker threads (0 = machine parallelism)");
    sub->add_option("--seed-override", cli.seed_override, "override configured seeds");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "exact snapshots and trajectories");
  add_common(simulate, true);
  CLI::App* verify_cmd = app.add_subcommand("verify", "run a verification suite");
  add_common(verify_cmd, false);
  verify_cmd->add_option("--suite", cli.suite,
                         "derivative|monotone|calculation|sampler|delta|stability|gibbs|fed|"
                         "orbit|all");
  CLI::App* sofic = app.add_subcommand("sofic", "delta tables for configured actions");
  add_common(sofic, true);
  CLI::App* fed = app.add_subcommand("fed", "free-energy-density estimate table");
  add_common(fed, true);
  CLI::App* diagnose = app.add_subcommand("diagnose", "Gibbsness diagnostics for a target");
  add_common(diagnose, true);

  CLI11_PARSE(app, argc, argv);

  try {
    json config = json::object();
    if (!cli.config_path.empty()) config = load_config(cli);
    if (simulate->parsed()) return cmd_simulate(cli, config);
    if (verify_cmd->parsed()) return cmd_verify(cli, config);
    if (sofic->parsed()) return cmd_sofic(cli, config);
    if (fed->parsed()) return cmd_fed(cli, config);
    if (diagnose->parsed()) return cmd_diagnose(cli, config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
