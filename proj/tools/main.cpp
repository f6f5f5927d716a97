#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "magatom/cli.hpp"
#include "magatom/errors.hpp"
#include "magatom/scenario.hpp"

using namespace magatom;

int main(int argc, char** argv) {
  CLI::App app{"Classical two-charge atom in external magnetic fields"};
  app.set_version_flag("--version", std::string(cli::kSoftwareName) + " " + cli::kVersion);
  app.require_subcommand(1);

  std::string path;
  std::vector<std::string> sets;
  std::string output_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("scenario", path, "Scenario configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--set", sets, "Override one key: section.key=value (repeatable)");
    sub->add_option("-o,--output-dir", output_dir, "Shortcut for --set output.directory=DIR");
  };

  for (const std::string& name : cli::command_names()) add_common(app.add_subcommand(name, ""));
  app.get_subcommand("simulate-direct")->description("Integrate the two charges directly in the lab frame");
  app.get_subcommand("simulate-reduced")->description("Integrate the center-of-mass / relative equations");
  app.get_subcommand("compare")->description("Run both formulations and report their deviation");
  app.get_subcommand("ensemble")->description("Beam of atoms through the field; deflection statistics");
  app.get_subcommand("fieldmap")->description("Far-field potentials and fields on a probe grid");
  app.get_subcommand("moment")->description("Time-averaged magnetic moment and gyromagnetic ratio");
  CLI::App* check = app.add_subcommand("check", "Validate a scenario and print it with all defaults filled");
  add_common(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kValidationFailure;
  }

  try {
    std::vector<Override> overrides;
    for (const std::string& s : sets) overrides.push_back(parse_override(s));
    if (!output_dir.empty()) overrides.push_back({"output", "directory", output_dir});
    const Scenario scenario = load_scenario(path, overrides);

    CLI::App* sub = app.get_subcommands().front();
    if (sub == check) {
      std::cout << serialize_scenario(scenario);
      return cli::kSuccess;
    }
    const cli::RunResult res = cli::run(cli::parse_command(sub->get_name()), scenario, std::cerr);
    for (const std::string& f : res.outputs) std::cout << f << "\n";
    if (res.exit_code != cli::kSuccess) std::cerr << "error: " << res.message << "\n";
    return res.exit_code;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return cli::exit_code_for_current_exception();
  }
}
