#include <CLI11.hpp>
#include <iostream>

#include "navslip/error.hpp"
#include "navslip/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Flux-driven channel flow with Navier slip: solve, verify and inspect scenarios"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 1;

  for (const char* name : {"solve", "verify", "sweep", "inequalities", "carrier-check"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "artifact directory (report.json, tables/, plots/)");
    sub->add_option("--seed", seed, "override the scenario seed");
    sub->add_option("--threads", threads, "concurrent sweep members")->check(CLI::PositiveNumber);
  }
  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  navslip::RunOptions options;
  options.out = out;
  options.threads = threads;
  if (app.get_subcommands().front()->count("--seed")) options.seed = seed;

  navslip::Scenario scenario;
  try {
    scenario = navslip::load_scenario(config);
  } catch (const navslip::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  const navslip::RunResult r = navslip::run_command(command, scenario, options);
  if (r.report.contains("error")) std::cerr << r.report["error"]["message"].get<std::string>() << "\n";
  std::cout << command << " " << scenario.name << ": " << r.report["verdict"].get<std::string>() << "\n";
  if (out.empty()) std::cout << navslip::dump_report(r.report);
  return r.exit_code;
}
