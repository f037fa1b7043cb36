// gaugefix: evolve | symbol | project | constraints

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "gaugefix/harness.hpp"
#include "gaugefix/snapshot.hpp"

namespace {

using gaugefix::harness::json;

int emit(const json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  std::ofstream os(out);
  if (!os) {
    std::cerr << "error: cannot write '" << out << "'\n";
    return 1;
  }
  os << j.dump(2) << '\n';
  return 0;
}

int cmd_evolve(const std::string& config_path, std::string out, const std::optional<std::uint64_t>& seed) {
  using namespace gaugefix;
  harness::RunConfig cfg;
  try {
    cfg = harness::load_config(config_path);
    if (seed) {
      cfg.seed = *seed;
      cfg.validate();
    }
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  if (out.empty()) out = cfg.output;
  harness::RunOutcome outcome;
  try {
    outcome = harness::run(cfg);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  const auto& res = outcome.result;
  if (out.empty() || out == "-") {
    res.series.write_csv(std::cout);
  } else {
    std::ofstream os(out);
    if (!os) {
      std::cerr << "error: cannot write '" << out << "'\n";
      return 1;
    }
    res.series.write_csv(os);
  }
  if (!cfg.snapshot_out.empty()) {
    try {
      snapshot::write(cfg.snapshot_out, res.final_state);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  if (res.aborted) {
    std::cerr << "non-finite state detected; last good time t = " << res.last_good_time << '\n';
    return 2;
  }
  return 0;
}

int cmd_symbol(const std::string& formulation, int samples, std::uint64_t seed, const std::string& out) {
  using namespace gaugefix;
  PrincipalSymbol sym;
  try {
    sym = harness::symbol_by_name(formulation);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  SymbolAnalysisOptions opt;
  opt.n_samples = samples;
  opt.seed = seed;
  return emit(harness::to_json(analyze_symbol(sym, opt)), out);
}

int cmd_project(const std::string& input, const std::string& out, double tol) {
  using namespace gaugefix;
  FieldState s;
  try {
    s = snapshot::read(input);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  SpectralWorkspace ws(s.grid);
  const auto before = constraint_norms(ws, s);
  const FieldState p = correct_initial_data(ws, s);
  const auto after = constraint_norms(ws, p);
  std::printf("before: norm_divA=%.6e norm_divPi=%.6e\n", before.div_a, before.div_pi);
  std::printf("after:  norm_divA=%.6e norm_divPi=%.6e\n", after.div_a, after.div_pi);
  if (tol > 0 && std::max(after.div_a, after.div_pi) > tol) {
    std::fprintf(stderr, "warning: projected constraint norms exceed tol=%g\n", tol);
  }
  if (!out.empty()) {
    try {
      snapshot::write(out, p);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 0;
}

int cmd_constraints(const std::string& model, std::uint64_t seed, const std::string& out) {
  using namespace gaugefix;
  try {
    return emit(harness::to_json(harness::analyze_toy(model, seed)), out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirac constraint analysis and Maxwell evolution"};
  app.require_subcommand(1);

  std::string config, out, formulation = "canonical", input, model;
  double tol = 1e-10;
  std::uint64_t seed = 12345;
  int samples = 70;

  auto* evolve = app.add_subcommand("evolve", "run a field evolution and write diagnostics CSV");
  evolve->add_option("--config", config, "JSON run configuration")->required();
  evolve->add_option("--out", out, "CSV path (default: config 'output' or stdout)");
  auto* evolve_seed = evolve->add_option("--seed", seed, "override the config seed");

  auto* symbol = app.add_subcommand("symbol", "principal symbol hyperbolicity report");
  symbol->add_option("--formulation", formulation, "canonical | gauge-fixed | identity")
      ->check(CLI::IsMember({"canonical", "gauge-fixed", "identity"}));
  symbol->add_option("--samples", samples, "directions on the unit sphere")->check(CLI::PositiveNumber);
  symbol->add_option("--seed", seed, "seed for random directions");
  symbol->add_option("--out", out, "JSON path (default stdout)");

  auto* project = app.add_subcommand("project", "project a field snapshot onto the constraint surface");
  project->add_option("input", input, "input snapshot")->required();
  project->add_option("--out", out, "output snapshot");
  project->add_option("--tol", tol, "warn if projected norms exceed this")->check(CLI::NonNegativeNumber);

  auto* constraints = app.add_subcommand("constraints", "Dirac-Bergmann analysis of a toy model");
  constraints->add_option("model", model, "chain-demo | second-class-demo | regular-demo")->required();
  constraints->add_option("--seed", seed, "surface sampler seed");
  constraints->add_option("--out", out, "JSON path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*evolve) {
      std::optional<std::uint64_t> s;
      if (evolve_seed->count() > 0) s = seed;
      return cmd_evolve(config, out, s);
    }
    if (*symbol) return cmd_symbol(formulation, samples, seed, out);
    if (*project) return cmd_project(input, out, tol);
    if (*constraints) return cmd_constraints(model, seed, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
