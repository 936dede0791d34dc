#pragma once

#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "rdsim/config.hpp"

namespace rdsim {

inline constexpr const char* kVersion = "0.1.0";

// Shortest round-trip text for a double; "nan" / "inf" / "-inf" otherwise.
std::string format_number(double v);

// t,norm,fidelity_target,fidelity_instantaneous,E_kin,E_pot,E_int,E_total
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectorySample>& trajectory);
// separation,interaction_time,final_energy,exact_energy,atom_energy,binding,
// exact_binding,final_fidelity,ok,error
void write_scan_csv(std::ostream& out, const std::vector<BondPoint>& points);
// omega,amplitude,rabi,residual,flat,fit_failed,unbound,refined
void write_sweep_csv(std::ostream& out, const std::vector<FrequencyRecord>& records);
// index,energy,gap,matrix_element,label,unbound
void write_levels_csv(std::ostream& out, const std::vector<SpectralLevel>& levels);
// index,energy[,label]
void write_spectrum_csv(std::ostream& out, const std::vector<double>& energies,
                        const std::vector<std::string>& labels = {});
// site,x,y,level,re,im,probability
void write_orbitals_csv(std::ostream& out, const LatticeGeometry& g, const std::vector<StateVector>& states);

nlohmann::json dressing_json(const DressingReport& r);
nlohmann::json run_json(const RunResult& r);

// Executes the configured command, writes its artifacts into `out_dir` and
// returns the summary document (also written as summary.json). Identical
// configurations give identical summaries apart from "timestamp".
nlohmann::json run_command(const RunConfig& config, const std::filesystem::path& out_dir);

// Machine-readable description of a failure.
nlohmann::json error_json(const std::exception& e);
// Process exit status for a failure: 2 invalid input, 3 solver or stepping
// failure, 1 anything else.
int error_status(const std::exception& e) noexcept;

}  // namespace rdsim
