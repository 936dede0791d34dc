#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "rdsim/dressing.hpp"
#include "rdsim/protocols.hpp"
#include "rdsim/spectroscopy.hpp"

namespace rdsim {

enum class Command { prep_he, prep_h2, bond_scan, spectroscopy, spectrum, dressing_report };

const char* to_string(Command c) noexcept;
// Throws ValidationError for an unknown name.
Command parse_command(const std::string& name);

// Bare eigensolve of one or two particles in a background potential.
struct SpectrumParams {
  LatticeGeometry geometry{21, 21};
  PotentialSpec potential;
  // Optional per-site field ("index,value" rows) added to the potential.
  std::string custom_field_csv;
  int particles = 1;
  Exchange symmetry = Exchange::symmetric;
  InteractionSpec interaction;
  int levels = 6;
  bool orbitals = true;
  EigenOptions eigen;
};

struct ScanParams {
  std::vector<int> separations{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> interaction_times{10.0, 20.0, 40.0};
  int padding = 10;
};

// Everything a command needs, with every default filled in.
struct RunConfig {
  Command command = Command::prep_he;
  // Preset selectors: sector (singlet/triplet), lattice padding, and the H2
  // nucleus separation.
  std::string sector = "singlet";
  int padding = 10;
  int separation = 3;
  int threads = 1;
  // Also run the preparation backwards and report the return probability.
  bool reverse = false;

  PrepParams prep;
  ScanParams scan;
  SpectroscopyParams spectroscopy;
  SpectrumParams spectrum;
  std::optional<DressingParams> dressing;
};

// Builds the reference preset for (command, sector, padding, separation) and
// applies the user document on top. Keys that do not exist in the resolved
// document are rejected, so nothing is silently ignored. `sector` overrides
// the document's sector when given.
RunConfig resolve_config(Command command, const nlohmann::json& user,
                         const std::optional<std::string>& sector = std::nullopt);
RunConfig load_config(Command command, const std::string& path,
                      const std::optional<std::string>& sector = std::nullopt);

// Nested document holding every parameter of the command.
nlohmann::json to_json(const RunConfig& c);
// Flat form ("/prep/ramp_time": 200, ...); feeding its unflattened form back
// to resolve_config reproduces the same configuration.
nlohmann::json resolved_dump(const RunConfig& c);

Exchange parse_sector(const std::string& s);

}  // namespace rdsim
