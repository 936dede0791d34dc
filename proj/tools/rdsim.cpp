#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "rdsim/config.hpp"
#include "rdsim/errors.hpp"
#include "rdsim/report.hpp"

using namespace rdsim;

namespace {

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::string> sector;
  std::optional<int> threads;
  bool dry_run = false;
};

CLI::App* add_command(CLI::App& app, Command c, const std::string& help, Options& o, bool with_sector) {
  auto* sub = app.add_subcommand(to_string(c), help);
  sub->add_option("config", o.config, "JSON configuration file (defaults: reference preset)");
  sub->add_option("--out", o.out, "Output directory")->capture_default_str();
  sub->add_option("--threads", o.threads, "Worker threads");
  sub->add_flag("--dry-run", o.dry_run, "Print the resolved parameters and exit");
  if (with_sector) {
    sub->add_option("--sector", o.sector, "singlet (symmetric) or triplet (antisymmetric)")
        ->check(CLI::IsMember({"singlet", "triplet", "symmetric", "antisymmetric", "bosonic", "fermionic"}));
  }
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-body lattice simulations with power-law interactions"};
  app.require_subcommand(1);
  Options o;
  struct Entry {
    Command command;
    CLI::App* app;
  };
  const Entry entries[] = {
      {Command::prep_he, add_command(app, Command::prep_he, "Adiabatic preparation of pseudo-helium", o, true)},
      {Command::prep_h2, add_command(app, Command::prep_h2, "Adiabatic preparation of pseudo-H2", o, true)},
      {Command::bond_scan, add_command(app, Command::bond_scan, "H2 binding curve over separations", o, true)},
      {Command::spectroscopy, add_command(app, Command::spectroscopy, "Driven Rabi spectroscopy sweep", o, false)},
      {Command::spectrum, add_command(app, Command::spectrum, "Low-lying eigenvalues and orbitals", o, true)},
      {Command::dressing_report,
       add_command(app, Command::dressing_report, "Dressing loss budget of a preparation", o, true)},
  };
  CLI11_PARSE(app, argc, argv);

  Command command = Command::prep_he;
  for (const auto& e : entries) {
    if (e.app->parsed()) command = e.command;
  }
  try {
    nlohmann::json doc = nlohmann::json::object();
    RunConfig config = o.config.empty() ? resolve_config(command, doc, o.sector)
                                        : load_config(command, o.config, o.sector);
    if (o.threads) {
      if (*o.threads < 1) throw rdsim::ValidationError("threads must be >= 1");
      config.threads = *o.threads;
      config.spectroscopy.threads = *o.threads;
    }
    if (o.dry_run) {
      std::cout << resolved_dump(config).dump(2) << '\n';
      return 0;
    }
    const auto summary = run_command(config, o.out);
    std::cout << summary.dump(2) << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << error_json(e).dump() << '\n';
    return error_status(e);
  }
}
