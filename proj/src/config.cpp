#include "rdsim/config.hpp"

#include <fstream>
#include <numbers>

#include "rdsim/errors.hpp"

namespace rdsim {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& m) { throw ValidationError(m); }

template <class T>
std::optional<T> opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

// Recursive overlay of `patch` onto `base`. Unlike a JSON merge patch, null is
// an ordinary value (an unset optional or an empty list), not a deletion.
void overlay(json& base, const json& patch) {
  if (!base.is_object() || !patch.is_object()) {
    base = patch;
    return;
  }
  for (const auto& [key, value] : patch.items()) {
    if (base.contains(key) && base[key].is_object() && value.is_object()) {
      overlay(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

// Flattening stores empty arrays as null.
template <class T>
std::vector<T> list_from(const json& j) {
  return j.is_null() ? std::vector<T>{} : j.get<std::vector<T>>();
}

json site_json(SiteCoord c) { return json::array({c.x, c.y}); }
SiteCoord site_from(const json& j) {
  if (!j.is_array() || j.size() != 2) fail("sites are written as [x, y]");
  return {j[0].get<int>(), j[1].get<int>()};
}

json geometry_json(const LatticeGeometry& g) { return {{"lx", g.lx()}, {"ly", g.ly()}}; }
LatticeGeometry geometry_from(const json& j) { return {j.at("lx").get<int>(), j.at("ly").get<int>()}; }

json nucleus_json(const NucleusSpec& n) {
  return {{"x", n.position.x}, {"y", n.position.y}, {"charge", n.charge}, {"scale", n.strength_scale}};
}
NucleusSpec nucleus_from(const json& j) {
  return {{j.at("x").get<double>(), j.at("y").get<double>()}, j.at("charge").get<double>(),
          j.at("scale").get<double>()};
}

json nuclei_json(const std::vector<NucleusSpec>& v) {
  json a = json::array();
  for (const auto& n : v) a.push_back(nucleus_json(n));
  return a;
}
std::vector<NucleusSpec> nuclei_from(const json& j) {
  std::vector<NucleusSpec> v;
  for (const auto& n : j) {
    NucleusSpec d;
    json full = nucleus_json(d);
    overlay(full, n);
    v.push_back(nucleus_from(full));
  }
  return v;
}

json interaction_json(const InteractionSpec& s) {
  return {{"v_int", s.v_int}, {"alpha", s.alpha}, {"onsite_factor", s.onsite_factor}, {"clamp", opt_json(s.clamp)}};
}
InteractionSpec interaction_from(const json& j) {
  return {j.at("v_int").get<double>(), j.at("alpha").get<double>(), j.at("onsite_factor").get<double>(),
          opt<double>(j, "clamp")};
}

const char* scheme_name(Propagator p) { return p == Propagator::magnus4 ? "magnus4" : "midpoint"; }

json evolve_json(const EvolveOptions& o) {
  return {{"scheme", scheme_name(o.scheme)},
          {"max_step", o.max_step},
          {"steps_per_period", o.steps_per_period},
          {"min_steps_per_ramp", o.min_steps_per_ramp},
          {"min_step", o.min_step},
          {"krylov_tol", o.krylov_tol},
          {"max_krylov_dim", o.max_krylov_dim},
          {"samples", o.samples}};
}
EvolveOptions evolve_from(const json& j) {
  EvolveOptions o;
  const auto s = j.at("scheme").get<std::string>();
  if (s == "midpoint") {
    o.scheme = Propagator::midpoint;
  } else if (s == "magnus4") {
    o.scheme = Propagator::magnus4;
  } else {
    fail("unknown propagator scheme '" + s + "' (midpoint, magnus4)");
  }
  o.max_step = j.at("max_step").get<double>();
  o.steps_per_period = j.at("steps_per_period").get<int>();
  o.min_steps_per_ramp = j.at("min_steps_per_ramp").get<int>();
  o.min_step = j.at("min_step").get<double>();
  o.krylov_tol = j.at("krylov_tol").get<double>();
  o.max_krylov_dim = j.at("max_krylov_dim").get<int>();
  o.samples = j.at("samples").get<int>();
  if (!(o.max_step > 0.0) || o.samples < 1 || o.steps_per_period < 1 || o.max_krylov_dim < 2) {
    fail("evolve: max_step > 0, samples >= 1, steps_per_period >= 1 and max_krylov_dim >= 2 are required");
  }
  return o;
}

json eigen_json(const EigenOptions& o) {
  return {{"tol", o.tol},
          {"max_restarts", o.max_restarts},
          {"krylov_dim", o.krylov_dim},
          {"seed", o.seed},
          {"dense_threshold", o.dense_threshold},
          {"degeneracy_tol", o.degeneracy_tol}};
}
EigenOptions eigen_from(const json& j) {
  EigenOptions o;
  o.tol = j.at("tol").get<double>();
  o.max_restarts = j.at("max_restarts").get<int>();
  o.krylov_dim = j.at("krylov_dim").get<int>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.dense_threshold = j.at("dense_threshold").get<int>();
  o.degeneracy_tol = j.at("degeneracy_tol").get<double>();
  return o;
}

json dressing_json(const DressingParams& d) {
  return {{"rabi", d.rabi},
          {"detuning", d.detuning},
          {"hopping", d.hopping},
          {"lifetime", opt_json(d.lifetime)},
          {"principal_number", opt_json(d.principal_number)},
          {"duty_cycle", opt_json(d.duty_cycle)}};
}
DressingParams dressing_from(const json& j) {
  DressingParams d;
  json full = dressing_json(d);
  overlay(full, j);
  d.rabi = full.at("rabi").get<double>();
  d.detuning = full.at("detuning").get<double>();
  d.hopping = full.at("hopping").get<double>();
  d.lifetime = opt<double>(full, "lifetime");
  d.principal_number = opt<int>(full, "principal_number");
  d.duty_cycle = opt<double>(full, "duty_cycle");
  return d;
}

const char* sector_name(Exchange e) { return e == Exchange::antisymmetric ? "antisymmetric" : "symmetric"; }

Exchange exchange_from(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "symmetric") return Exchange::symmetric;
  if (s == "antisymmetric") return Exchange::antisymmetric;
  if (s == "distinguishable") return Exchange::distinguishable;
  fail("unknown exchange symmetry '" + s + "'");
}

PrepKind kind_from(const std::string& s) {
  for (auto k : {PrepKind::bosonic_helium, PrepKind::fermionic_helium, PrepKind::hydrogen2, PrepKind::custom}) {
    if (s == to_string(k)) return k;
  }
  fail("unknown preparation kind '" + s + "'");
}

json prep_json(const PrepParams& p) {
  return {{"kind", to_string(p.kind)},
          {"geometry", geometry_json(p.geometry)},
          {"nuclei", nuclei_json(p.nuclei)},
          {"bohr_radius", p.bohr_radius},
          {"hopping", p.hopping},
          {"regularization", p.regularization},
          {"interaction", interaction_json(p.interaction)},
          {"symmetry", sector_name(p.symmetry)},
          {"ramp_time", p.ramp_time},
          {"interaction_time", p.interaction_time},
          {"first_site", site_json(p.first_site)},
          {"second_site", site_json(p.second_site)},
          {"aux_scale", opt_json(p.aux_scale)},
          {"aux_ramp_time", p.aux_ramp_time},
          {"orbital_bias_fraction", opt_json(p.orbital_bias_fraction)},
          {"bias_axis", p.bias_axis_x ? "x" : "y"},
          {"start_from_ground_state", p.start_from_ground_state},
          {"evolve", evolve_json(p.evolve)},
          {"verify_step", p.verify_step},
          {"instantaneous_stride", p.instantaneous_stride},
          {"eigen", eigen_json(p.eigen)}};
}

PrepParams prep_from(const json& j) {
  PrepParams p;
  p.kind = kind_from(j.at("kind").get<std::string>());
  p.geometry = geometry_from(j.at("geometry"));
  p.nuclei = nuclei_from(j.at("nuclei"));
  p.bohr_radius = j.at("bohr_radius").get<double>();
  p.hopping = j.at("hopping").get<double>();
  p.regularization = j.at("regularization").get<double>();
  p.interaction = interaction_from(j.at("interaction"));
  p.symmetry = exchange_from(j.at("symmetry"));
  p.ramp_time = j.at("ramp_time").get<double>();
  p.interaction_time = j.at("interaction_time").get<double>();
  p.first_site = site_from(j.at("first_site"));
  p.second_site = site_from(j.at("second_site"));
  p.aux_scale = opt<double>(j, "aux_scale");
  p.aux_ramp_time = j.at("aux_ramp_time").get<double>();
  p.orbital_bias_fraction = opt<double>(j, "orbital_bias_fraction");
  const auto axis = j.at("bias_axis").get<std::string>();
  if (axis != "x" && axis != "y") fail("bias_axis must be \"x\" or \"y\"");
  p.bias_axis_x = axis == "x";
  p.start_from_ground_state = j.at("start_from_ground_state").get<bool>();
  p.evolve = evolve_from(j.at("evolve"));
  p.verify_step = j.at("verify_step").get<bool>();
  p.instantaneous_stride = j.at("instantaneous_stride").get<int>();
  p.eigen = eigen_from(j.at("eigen"));
  return p;
}

json spectroscopy_json(const SpectroscopyParams& p) {
  return {{"geometry", geometry_json(p.geometry)},
          {"nucleus", nucleus_json(p.nucleus)},
          {"bohr_radius", p.bohr_radius},
          {"hopping", p.hopping},
          {"regularization", p.regularization},
          {"drive", p.drive},
          {"total_time", p.total_time},
          {"omegas", p.omegas},
          {"grid_points", p.grid_points},
          {"levels", p.levels},
          {"refine_peaks", p.refine_peaks},
          {"refine_tol", p.refine_tol},
          {"peak_threshold", p.peak_threshold},
          {"residual_limit", p.residual_limit},
          {"samples", p.samples},
          {"evolve", evolve_json(p.evolve)},
          {"eigen", eigen_json(p.eigen)}};
}

SpectroscopyParams spectroscopy_from(const json& j) {
  SpectroscopyParams p;
  p.geometry = geometry_from(j.at("geometry"));
  p.nucleus = nucleus_from(j.at("nucleus"));
  p.bohr_radius = j.at("bohr_radius").get<double>();
  p.hopping = j.at("hopping").get<double>();
  p.regularization = j.at("regularization").get<double>();
  p.drive = j.at("drive").get<double>();
  p.total_time = j.at("total_time").get<double>();
  p.omegas = list_from<double>(j.at("omegas"));
  p.grid_points = j.at("grid_points").get<int>();
  p.levels = j.at("levels").get<int>();
  p.refine_peaks = j.at("refine_peaks").get<bool>();
  p.refine_tol = j.at("refine_tol").get<double>();
  p.peak_threshold = j.at("peak_threshold").get<double>();
  p.residual_limit = j.at("residual_limit").get<double>();
  p.samples = j.at("samples").get<int>();
  p.evolve = evolve_from(j.at("evolve"));
  p.eigen = eigen_from(j.at("eigen"));
  return p;
}

json spectrum_json(const SpectrumParams& s) {
  return {{"geometry", geometry_json(s.geometry)},
          {"nuclei", nuclei_json(s.potential.nuclei)},
          {"bohr_radius", s.potential.bohr_radius},
          {"hopping", s.potential.hopping},
          {"regularization", s.potential.regularization},
          {"custom_field_csv", s.custom_field_csv},
          {"particles", s.particles},
          {"symmetry", sector_name(s.symmetry)},
          {"interaction", interaction_json(s.interaction)},
          {"levels", s.levels},
          {"orbitals", s.orbitals},
          {"eigen", eigen_json(s.eigen)}};
}

SpectrumParams spectrum_from(const json& j) {
  SpectrumParams s;
  s.geometry = geometry_from(j.at("geometry"));
  s.potential.nuclei = nuclei_from(j.at("nuclei"));
  s.potential.bohr_radius = j.at("bohr_radius").get<double>();
  s.potential.hopping = j.at("hopping").get<double>();
  s.potential.regularization = j.at("regularization").get<double>();
  s.custom_field_csv = j.at("custom_field_csv").get<std::string>();
  s.particles = j.at("particles").get<int>();
  s.symmetry = exchange_from(j.at("symmetry"));
  s.interaction = interaction_from(j.at("interaction"));
  s.levels = j.at("levels").get<int>();
  s.orbitals = j.at("orbitals").get<bool>();
  s.eigen = eigen_from(j.at("eigen"));
  if (s.particles != 1 && s.particles != 2) fail("spectrum: particles must be 1 or 2");
  if (s.levels < 1) fail("spectrum: levels must be >= 1");
  return s;
}

bool uses_prep(Command c) {
  return c == Command::prep_he || c == Command::prep_h2 || c == Command::bond_scan ||
         c == Command::dressing_report;
}

// Reference preset for the selectors in `c`.
void apply_preset(RunConfig& c) {
  const Exchange sym = parse_sector(c.sector);
  if (c.padding < 1) fail("padding must be >= 1");
  switch (c.command) {
    case Command::prep_he:
    case Command::dressing_report:
      c.prep = sym == Exchange::symmetric ? bosonic_helium_params(c.padding) : fermionic_helium_params(c.padding);
      break;
    case Command::prep_h2:
      c.prep = h2_params(sym, c.separation, c.padding);
      break;
    case Command::bond_scan:
      c.prep = h2_params(sym, c.separation, c.padding);
      c.scan.padding = c.padding;
      break;
    case Command::spectroscopy:
      break;
    case Command::spectrum: {
      c.spectrum.geometry = LatticeGeometry::from_padding(c.padding);
      c.spectrum.potential.nuclei = {{c.spectrum.geometry.center(), 1.0, 1.0}};
      c.spectrum.potential.bohr_radius = 4.0;
      c.spectrum.symmetry = sym;
      c.spectrum.interaction = {default_vint(4.0, 6.0), 6.0, 2.0, {}};
      break;
    }
  }
  if (c.command == Command::dressing_report) {
    // Illustrative calibration: J = 2 pi x 1.7 kHz, 1 ms effective lifetime,
    // beta = 0.1.
    DressingParams d;
    d.hopping = 2.0 * std::numbers::pi * 1.7e3;
    d.lifetime = 1e-3;
    d.rabi = 0.2;
    d.detuning = 1.0;
    c.dressing = d;
  }
}

// Every path of `user` must name a key of `defaults`, or sit below an array
// or optional (null) entry of it.
void check_known_keys(const json& defaults, const json& user, const std::string& path = "") {
  if (!user.is_object()) fail("configuration " + (path.empty() ? std::string("document") : path) + " must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string here = path + "/" + key;
    if (!defaults.contains(key)) fail("unknown configuration key " + here);
    const json& d = defaults.at(key);
    if (d.is_object() && value.is_object()) {
      check_known_keys(d, value, here);
    } else if (d.is_object() && !value.is_null()) {
      fail("configuration key " + here + " must be an object");
    }
  }
}

}  // namespace

const char* to_string(Command c) noexcept {
  switch (c) {
    case Command::prep_he: return "prep-he";
    case Command::prep_h2: return "prep-h2";
    case Command::bond_scan: return "bond-scan";
    case Command::spectroscopy: return "spectroscopy";
    case Command::spectrum: return "spectrum";
    case Command::dressing_report: return "dressing-report";
  }
  return "prep-he";
}

Command parse_command(const std::string& name) {
  for (auto c : {Command::prep_he, Command::prep_h2, Command::bond_scan, Command::spectroscopy, Command::spectrum,
                 Command::dressing_report}) {
    if (name == to_string(c)) return c;
  }
  fail("unknown command '" + name + "'");
}

Exchange parse_sector(const std::string& s) {
  if (s == "singlet" || s == "symmetric" || s == "bosonic") return Exchange::symmetric;
  if (s == "triplet" || s == "antisymmetric" || s == "fermionic") return Exchange::antisymmetric;
  fail("unknown sector '" + s + "' (singlet or triplet)");
}

json to_json(const RunConfig& c) {
  json j = {{"command", to_string(c.command)},
            {"sector", c.sector},
            {"padding", c.padding},
            {"separation", c.separation},
            {"threads", c.threads},
            {"dressing", c.dressing ? dressing_json(*c.dressing) : json(nullptr)}};
  if (uses_prep(c.command)) j["prep"] = prep_json(c.prep);
  if (c.command == Command::prep_he || c.command == Command::prep_h2) j["reverse"] = c.reverse;
  if (c.command == Command::bond_scan) {
    j["scan"] = {{"separations", c.scan.separations},
                 {"interaction_times", c.scan.interaction_times},
                 {"padding", c.scan.padding}};
  }
  if (c.command == Command::spectroscopy) j["spectroscopy"] = spectroscopy_json(c.spectroscopy);
  if (c.command == Command::spectrum) j["spectrum"] = spectrum_json(c.spectrum);
  return j;
}

json resolved_dump(const RunConfig& c) { return to_json(c).flatten(); }

RunConfig resolve_config(Command command, const json& user, const std::optional<std::string>& sector) {
  if (!user.is_null() && !user.is_object()) fail("configuration document must be a JSON object");
  const json doc = user.is_null() ? json::object() : user;
  if (doc.contains("command") && doc.at("command").get<std::string>() != to_string(command)) {
    fail("configuration is for '" + doc.at("command").get<std::string>() + "', not '" + to_string(command) + "'");
  }
  try {
    RunConfig c;
    c.command = command;
    if (doc.contains("sector")) c.sector = doc.at("sector").get<std::string>();
    if (sector) c.sector = *sector;
    if (doc.contains("padding")) c.padding = doc.at("padding").get<int>();
    if (doc.contains("separation")) c.separation = doc.at("separation").get<int>();
    apply_preset(c);

    json merged = to_json(c);
    check_known_keys(merged, doc);
    overlay(merged, doc);
    merged["sector"] = c.sector;

    c.threads = merged.at("threads").get<int>();
    if (c.threads < 1) fail("threads must be >= 1");
    if (merged.contains("reverse")) c.reverse = merged.at("reverse").get<bool>();
    c.dressing.reset();
    if (merged.contains("dressing") && !merged.at("dressing").is_null()) {
      c.dressing = dressing_from(merged.at("dressing"));
    }
    if (uses_prep(command)) {
      c.prep = prep_from(merged.at("prep"));
      c.prep.dressing = c.dressing;
    }
    if (command == Command::bond_scan) {
      const auto& s = merged.at("scan");
      c.scan.separations = list_from<int>(s.at("separations"));
      c.scan.interaction_times = list_from<double>(s.at("interaction_times"));
      c.scan.padding = s.at("padding").get<int>();
      if (c.scan.separations.empty() || c.scan.interaction_times.empty()) fail("scan needs separations and times");
    }
    if (command == Command::spectroscopy) {
      c.spectroscopy = spectroscopy_from(merged.at("spectroscopy"));
      c.spectroscopy.threads = c.threads;
      c.spectroscopy.validate();
    }
    if (command == Command::spectrum) c.spectrum = spectrum_from(merged.at("spectrum"));
    if (uses_prep(command)) c.prep.validate();
    if (c.dressing) c.dressing->validate();
    return c;
  } catch (const json::exception& e) {
    fail(std::string("malformed configuration: ") + e.what());
  } catch (const DomainError& e) {
    fail(e.what());
  }
}

RunConfig load_config(Command command, const std::string& path, const std::optional<std::string>& sector) {
  std::ifstream in(path);
  if (!in) fail("cannot read configuration file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    fail("configuration file '" + path + "' is not valid JSON: " + e.what());
  }
  // A flat resolved dump is accepted as well.
  if (doc.is_object() && !doc.empty() && doc.begin().key().starts_with("/")) doc = doc.unflatten();
  return resolve_config(command, doc, sector);
}

}  // namespace rdsim
