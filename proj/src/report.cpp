#include "rdsim/report.hpp"

#include <omp.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <ostream>

#include "rdsim/errors.hpp"

namespace rdsim {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

template <class... T>
void row(std::ostream& out, const T&... cells) {
  bool first = true;
  auto put = [&](const auto& c) {
    if (!first) out << ',';
    first = false;
    using C = std::decay_t<decltype(c)>;
    if constexpr (std::is_same_v<C, double>) {
      out << format_number(c);
    } else if constexpr (std::is_same_v<C, bool>) {
      out << (c ? 1 : 0);
    } else if constexpr (std::is_same_v<C, std::string>) {
      out << csv_text(c);
    } else {
      out << c;
    }
  };
  (put(cells), ...);
  out << '\n';
}

// NaN and infinities have no JSON form; they become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::ofstream open_output(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

json components_json(const EnergyComponents& e) {
  return {{"kinetic", number(e.kinetic)},
          {"potential", number(e.potential)},
          {"interaction", number(e.interaction)},
          {"total", number(e.total)}};
}

json scan_json(const std::vector<BondPoint>& pts) {
  json a = json::array();
  for (const auto& b : pts) {
    a.push_back({{"separation", b.separation},
                 {"interaction_time", b.interaction_time},
                 {"final_energy", number(b.final_energy)},
                 {"exact_energy", number(b.exact_energy)},
                 {"atom_energy", number(b.atom_energy)},
                 {"binding", number(b.binding)},
                 {"exact_binding", number(b.exact_binding)},
                 {"final_fidelity", number(b.final_fidelity)},
                 {"ok", b.ok},
                 {"error", b.error}});
  }
  return a;
}

json sweep_json(const SpectroscopyResult& r) {
  json levels = json::array();
  for (const auto& l : r.levels) {
    levels.push_back({{"index", l.index},
                      {"energy", number(l.energy)},
                      {"gap", number(l.gap)},
                      {"matrix_element", number(l.matrix_element)},
                      {"label", l.label},
                      {"unbound", l.unbound}});
  }
  json res = json::array();
  for (const auto& x : r.resonances) {
    res.push_back({{"level", x.level},
                   {"label", x.label},
                   {"gap", number(x.gap)},
                   {"matrix_element", number(x.matrix_element)},
                   {"peak_omega", number(x.peak_omega)},
                   {"peak_amplitude", number(x.peak_amplitude)},
                   {"on_gap_amplitude", number(x.on_gap_amplitude)},
                   {"tolerance", number(x.tolerance)},
                   {"within_tolerance", x.within_tolerance},
                   {"unbound", x.unbound}});
  }
  json fits = json::array();
  for (const auto& f : r.records) {
    fits.push_back({{"omega", number(f.omega)},
                    {"amplitude", number(f.amplitude)},
                    {"rabi", number(f.rabi)},
                    {"residual", number(f.residual)},
                    {"flat", f.flat},
                    {"fit_failed", f.fit_failed},
                    {"unbound", f.unbound},
                    {"refined", f.refined}});
  }
  json peaks = json::array();
  for (double p : r.peaks) peaks.push_back(number(p));
  return {{"ground_energy", number(r.ground_energy)},
          {"unbound_threshold", number(r.unbound_threshold)},
          {"levels", levels},
          {"resonances", res},
          {"peaks", peaks},
          {"fits", fits}};
}

// Exposure of the configured preparation without building its operators.
DressedExposure prep_exposure(const PrepParams& p) {
  Schedule s;
  s.hold(p.noninteracting_time(), 0.0).then(RampShape::sin4_up, p.interaction_time, 0.0, 1.0);
  return dressed_time(s, 0.0, p.total_time());
}

json run_spectrum(const SpectrumParams& s, const fs::path& dir) {
  const auto& g = s.geometry;
  auto field = assemble_potential(s.potential, g);
  if (!s.custom_field_csv.empty()) {
    const auto extra = load_site_field_csv(s.custom_field_csv, g);
    for (std::size_t i = 0; i < field.size(); ++i) field[i] += extra[i];
  }
  const auto basis = s.particles == 1 ? SectorBasis::single_particle(g) : SectorBasis::two_particle(g, s.symmetry);
  SparseOperator h = assemble_h0(basis, field, s.potential.hopping);
  if (s.particles == 2) h = h + assemble_interaction(basis, s.interaction);
  const auto levels = low_spectrum(h, std::min(s.levels, h.dim()), s.eigen);

  std::vector<double> energies;
  std::vector<std::string> labels;
  std::vector<StateVector> states;
  json lv = json::array();
  for (const auto& l : levels) {
    energies.push_back(l.energy);
    json e = {{"energy", number(l.energy)}};
    if (s.particles == 1 && !s.potential.nuclei.empty()) {
      labels.push_back(classify_orbital(l.state, g, s.potential.nuclei.front().position));
      e["label"] = labels.back();
    }
    lv.push_back(e);
    states.push_back(l.state);
  }
  {
    auto out = open_output(dir / "spectrum.csv");
    write_spectrum_csv(out, energies, labels);
  }
  if (s.particles == 1 && s.orbitals) {
    auto out = open_output(dir / "orbitals.csv");
    write_orbitals_csv(out, g, states);
  }
  return {{"dimension", h.dim()}, {"levels", lv}};
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectorySample>& trajectory) {
  out << "t,norm,fidelity_target,fidelity_instantaneous,E_kin,E_pot,E_int,E_total\n";
  for (const auto& s : trajectory) {
    row(out, s.t, s.norm, s.fidelity_target, s.fidelity_instantaneous, s.energy.kinetic, s.energy.potential,
        s.energy.interaction, s.energy.total);
  }
}

void write_scan_csv(std::ostream& out, const std::vector<BondPoint>& points) {
  out << "separation,interaction_time,final_energy,exact_energy,atom_energy,binding,exact_binding,final_fidelity,"
         "ok,error\n";
  for (const auto& b : points) {
    row(out, b.separation, b.interaction_time, b.final_energy, b.exact_energy, b.atom_energy, b.binding,
        b.exact_binding, b.final_fidelity, b.ok, b.error);
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<FrequencyRecord>& records) {
  out << "omega,amplitude,rabi,residual,flat,fit_failed,unbound,refined\n";
  for (const auto& r : records) {
    row(out, r.omega, r.amplitude, r.rabi, r.residual, r.flat, r.fit_failed, r.unbound, r.refined);
  }
}

void write_levels_csv(std::ostream& out, const std::vector<SpectralLevel>& levels) {
  out << "index,energy,gap,matrix_element,label,unbound\n";
  for (const auto& l : levels) row(out, l.index, l.energy, l.gap, l.matrix_element, l.label, l.unbound);
}

void write_spectrum_csv(std::ostream& out, const std::vector<double>& energies,
                        const std::vector<std::string>& labels) {
  if (!labels.empty() && labels.size() != energies.size()) throw ShapeError("one label per level");
  out << (labels.empty() ? "index,energy\n" : "index,energy,label\n");
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (labels.empty()) {
      row(out, i, energies[i]);
    } else {
      row(out, i, energies[i], labels[i]);
    }
  }
}

void write_orbitals_csv(std::ostream& out, const LatticeGeometry& g, const std::vector<StateVector>& states) {
  out << "site,x,y,level,re,im,probability\n";
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (states[k].size() != static_cast<std::size_t>(g.num_sites())) throw ShapeError("orbitals are one-particle states");
    for (int i = 0; i < g.num_sites(); ++i) {
      const auto c = g.site_coord(i);
      const Complex a = states[k][static_cast<std::size_t>(i)];
      row(out, i, c.x, c.y, k, a.real(), a.imag(), std::norm(a));
    }
  }
}

json dressing_json(const DressingReport& r) {
  json j = {{"beta", number(r.beta)},
            {"softcore_cap", number(r.softcore_cap)},
            {"figure_of_merit", r.figure_of_merit ? number(*r.figure_of_merit) : json(nullptr)},
            {"dressed_time", number(r.dressed_time)},
            {"active_time", number(r.active_time)},
            {"survival", r.survival ? number(*r.survival) : json(nullptr)},
            {"advisories", r.advisories}};
  if (r.stroboscopic) {
    j["stroboscopic"] = {{"beta_factor", number(r.stroboscopic->beta)},
                         {"loss_rate_factor", number(r.stroboscopic->loss_rate)},
                         {"merit_factor", number(r.stroboscopic->merit)}};
  } else {
    j["stroboscopic"] = nullptr;
  }
  return j;
}

json run_json(const RunResult& r) {
  return {{"kind", to_string(r.kind)},
          {"symmetry", to_string(r.symmetry)},
          {"final_energy", components_json(r.final_energy)},
          {"exact_energy", number(r.exact_energy)},
          {"ground_degeneracy", r.ground_degeneracy},
          {"relative_energy_error", number(r.relative_error)},
          {"relative_energy_error_absolute", number(r.relative_error_absolute)},
          {"final_fidelity", number(r.final_fidelity)},
          {"interaction_start", number(r.interaction_start)},
          {"t_end", number(r.t_end)},
          {"step_halving_change", number(r.step_halving_change)},
          {"steps", r.stats.steps},
          {"matvecs", r.stats.matvecs},
          {"max_norm_drift", number(r.stats.max_norm_drift)},
          {"dressed_time", number(r.exposure.dressed_time)},
          {"active_time", number(r.exposure.active_time)}};
}

json run_command(const RunConfig& c, const fs::path& dir) {
  fs::create_directories(dir);
  omp_set_num_threads(c.threads);
  json summary = {{"command", to_string(c.command)},
                  {"version", kVersion},
                  {"timestamp", utc_timestamp()},
                  {"parameters", resolved_dump(c)}};

  switch (c.command) {
    case Command::prep_he:
    case Command::prep_h2: {
      const RunResult r = c.command == Command::prep_h2 ? prepare_h2(c.prep, c.prep.symmetry)
                          : c.prep.symmetry == Exchange::symmetric ? prepare_bosonic_helium(c.prep)
                                                                   : prepare_fermionic_helium(c.prep);
      json res = run_json(r);
      res["fidelity_squared"] = number(r.final_fidelity * r.final_fidelity);
      res["return_probability"] = c.reverse ? number(reverse_prep_return_probability(r, c.prep)) : json(nullptr);
      summary["result"] = res;
      summary["dressing"] = r.dressing ? dressing_json(*r.dressing) : json(nullptr);
      auto out = open_output(dir / "trajectory.csv");
      write_trajectory_csv(out, r.trajectory);
      break;
    }
    case Command::bond_scan: {
      const auto pts = bond_scan(c.prep, c.scan.separations, c.scan.interaction_times, c.threads, c.scan.padding);
      summary["result"] = {{"points", scan_json(pts)}};
      summary["dressing"] = nullptr;
      if (c.dressing) {
        // One block per interaction time; scan runs start at the interaction ramp.
        json blocks = json::array();
        for (double t : c.scan.interaction_times) {
          PrepParams q = c.prep;
          q.start_from_ground_state = true;
          q.interaction_time = t;
          json b = dressing_json(dressing_report(*c.dressing, prep_exposure(q)));
          b["interaction_time"] = t;
          blocks.push_back(b);
        }
        summary["dressing"] = blocks;
      }
      auto out = open_output(dir / "scan.csv");
      write_scan_csv(out, pts);
      break;
    }
    case Command::spectroscopy: {
      const auto r = spectroscopy_sweep(c.spectroscopy);
      summary["result"] = sweep_json(r);
      summary["dressing"] = nullptr;
      {
        auto out = open_output(dir / "spectroscopy.csv");
        write_sweep_csv(out, r.records);
      }
      {
        auto out = open_output(dir / "spectrum.csv");
        write_levels_csv(out, r.levels);
      }
      auto out = open_output(dir / "orbitals.csv");
      write_orbitals_csv(out, c.spectroscopy.geometry, r.level_states);
      break;
    }
    case Command::spectrum:
      summary["result"] = run_spectrum(c.spectrum, dir);
      summary["dressing"] = nullptr;
      break;
    case Command::dressing_report: {
      if (!c.dressing) throw ValidationError("dressing-report needs a dressing block");
      const auto rep = dressing_report(*c.dressing, prep_exposure(c.prep));
      summary["result"] = nullptr;
      summary["dressing"] = dressing_json(rep);
      break;
    }
  }

  auto out = open_output(dir / "summary.json");
  out << summary.dump(2) << '\n';
  return summary;
}

json error_json(const std::exception& e) {
  std::string type = "error";
  if (dynamic_cast<const ValidationError*>(&e)) {
    type = "validation";
  } else if (dynamic_cast<const DomainError*>(&e)) {
    type = "domain";
  } else if (dynamic_cast<const ShapeError*>(&e)) {
    type = "shape";
  } else if (dynamic_cast<const UnsupportedError*>(&e)) {
    type = "unsupported";
  } else if (dynamic_cast<const ConvergenceError*>(&e)) {
    type = "convergence";
  } else if (dynamic_cast<const StiffnessError*>(&e)) {
    type = "stiffness";
  }
  json j = {{"error", {{"type", type}, {"message", e.what()}}}};
  if (const auto* ce = dynamic_cast<const ConvergenceError*>(&e)) j["error"]["residual"] = number(ce->residual());
  return j;
}

int error_status(const std::exception& e) noexcept {
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const ShapeError*>(&e) || dynamic_cast<const UnsupportedError*>(&e)) {
    return 2;
  }
  if (dynamic_cast<const ConvergenceError*>(&e) || dynamic_cast<const StiffnessError*>(&e)) return 3;
  return 1;
}

}  // namespace rdsim
