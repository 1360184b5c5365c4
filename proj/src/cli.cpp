#include "svint/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "svint/experiment.hpp"
#include "svint/version.hpp"

namespace fs = std::filesystem;

namespace svint {

namespace {

void print_models(std::ostream& os, bool machine) {
  for (const ModelInfo& m : list_models()) {
    bool translation = false;
    bool constraint = false;
    if (m.kind == "rigid") {
      translation = build_rigid_model(m.name).translation_invariant;
    } else {
      const MechSystem sys = build_mech_model(m.name);
      translation = !sys.symmetries.empty();
      constraint = sys.constraint.has_value();
    }
    if (machine) {
      os << m.name << ".kind = " << m.kind << "\n";
      os << m.name << ".role = " << m.role << "\n";
      for (const auto& [k, v] : m.defaults)
        os << m.name << ".param." << k << " = " << v << "\n";
      os << m.name << ".symmetry.translation = " << (translation ? 1 : 0) << "\n";
      os << m.name << ".constraint = " << (constraint ? 1 : 0) << "\n";
    } else {
      os << m.name << " [" << (m.kind == "rigid" ? "rigid-body" : "vector-space")
         << "]\n";
      os << "  role: " << m.role << "\n";
      os << "  params:";
      for (const auto& [k, v] : m.defaults) os << " " << k << "=" << v;
      os << "\n";
      os << "  symmetries: " << (translation ? "translation" : "none") << "\n";
      os << "  constraint: " << (constraint ? "yes" : "no") << "\n";
    }
  }
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"stochastic variational integrators and baselines"};
  app.name("svint");
  app.set_version_flag("--version", SVINT_VERSION);
  app.require_subcommand(1);

  std::string config_path, seed_str, out_str, threads_str;
  std::vector<std::string> sets;
  std::vector<CLI::App*> studies;
  for (const char* name : {"simulate", "convergence", "temperature", "invariants"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run a ") + name + " study");
    sub->add_option("--config", config_path, "config file (key = value lines)");
    sub->add_option("--seed", seed_str, "seed override");
    sub->add_option("--out", out_str, "output directory override");
    sub->add_option("--threads", threads_str, "worker threads");
    sub->add_option("--set", sets, "config override key=value (repeatable)");
    studies.push_back(sub);
  }
  bool machine = false;
  CLI::App* lm = app.add_subcommand("list-models", "print the model catalog");
  lm->add_flag("--machine", machine, "machine-readable key = value output");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  if (lm->parsed()) {
    print_models(out, machine);
    return 0;
  }

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = parse_config_file(config_path);
    for (size_t i = 0; i < studies.size(); ++i)
      if (studies[i]->parsed())
        apply_override(cfg, "study",
                       std::vector<std::string>{"simulate", "convergence",
                                                "temperature", "invariants"}[i]);
    if (!seed_str.empty()) apply_override(cfg, "seed", seed_str);
    if (!out_str.empty()) apply_override(cfg, "out", out_str);
    if (!threads_str.empty()) apply_override(cfg, "threads", threads_str);
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got '" + kv + "'");
      std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
      k.erase(k.find_last_not_of(" \t") + 1);
      v.erase(0, v.find_first_not_of(" \t"));
      apply_override(cfg, k, v);
    }
    validate_config(cfg);
    run_experiment(cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    std::error_code ec;
    fs::create_directories(cfg.out, ec);
    if (!ec) {
      std::ofstream marker(fs::path(cfg.out) / "FAILED");
      marker << "error: " << e.what() << "\n";
    }
    return 1;
  }
  out << "wrote " << (fs::path(cfg.out) / "summary.txt").string() << "\n";
  return 0;
}

} // namespace svint
