#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rdsim/config.hpp"
#include "rdsim/errors.hpp"
#include "rdsim/report.hpp"

using namespace rdsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("rdsim_config_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

// Small helium that runs in well under a second.
json tiny_helium() {
  return json::parse(R"({
    "padding": 2,
    "prep": {"bohr_radius": 2.0, "ramp_time": 20.0, "interaction_time": 5.0,
             "verify_step": false, "instantaneous_stride": 0,
             "evolve": {"samples": 10}}
  })");
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(RDSIM_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("commands and sectors") {
  for (auto c : {Command::prep_he, Command::prep_h2, Command::bond_scan, Command::spectroscopy, Command::spectrum,
                 Command::dressing_report}) {
    CHECK(parse_command(to_string(c)) == c);
  }
  CHECK_THROWS_AS(parse_command("prep-li"), ValidationError);
  CHECK(parse_sector("singlet") == Exchange::symmetric);
  CHECK(parse_sector("triplet") == Exchange::antisymmetric);
  CHECK(parse_sector("fermionic") == Exchange::antisymmetric);
  CHECK_THROWS_AS(parse_sector("quintet"), ValidationError);
}

TEST_CASE("presets follow the sector") {
  const auto he = resolve_config(Command::prep_he, json::object());
  CHECK(he.prep.kind == PrepKind::bosonic_helium);
  CHECK(he.prep.interaction_time == 20.0);
  const auto fe = resolve_config(Command::prep_he, json::object(), "triplet");
  CHECK(fe.prep.kind == PrepKind::fermionic_helium);
  CHECK(fe.prep.symmetry == Exchange::antisymmetric);
  CHECK(fe.prep.aux_scale.value() == 0.9);
  const auto h2 = resolve_config(Command::prep_h2, json{{"sector", "triplet"}, {"padding", 4}});
  CHECK(h2.prep.symmetry == Exchange::antisymmetric);
  CHECK(h2.prep.geometry.lx() == 12);
  // The flag wins over the document.
  const auto flag = resolve_config(Command::prep_h2, json{{"sector", "triplet"}}, "singlet");
  CHECK(flag.prep.symmetry == Exchange::symmetric);
  const auto sp = resolve_config(Command::spectroscopy, json::object());
  CHECK(sp.spectroscopy.geometry.lx() == 40);
  CHECK(sp.spectroscopy.geometry.ly() == 38);
  CHECK(sp.spectroscopy.drive == 0.01);
  CHECK(sp.spectroscopy.total_time == 1000.0);
  const auto dr = resolve_config(Command::dressing_report, json::object());
  REQUIRE(dr.dressing.has_value());
  CHECK(dr.dressing->lifetime.value() == 1e-3);
}

TEST_CASE("overrides, partial nuclei and unknown keys") {
  auto doc = json::parse(R"({"prep": {"ramp_time": 150, "nuclei": [{"x": 3, "y": 4, "charge": 2}],
                                      "interaction": {"clamp": 5.0}},
                             "threads": 2})");
  const auto c = resolve_config(Command::prep_he, doc);
  CHECK(c.prep.ramp_time == 150.0);
  REQUIRE(c.prep.nuclei.size() == 1);
  CHECK(c.prep.nuclei[0].position.x == 3.0);
  CHECK(c.prep.nuclei[0].strength_scale == 1.0);
  CHECK(c.prep.interaction.clamp.value() == 5.0);
  CHECK(c.threads == 2);

  CHECK_THROWS_AS(resolve_config(Command::prep_he, json{{"prep", {{"ramptime", 1}}}}), ValidationError);
  CHECK_THROWS_AS(resolve_config(Command::prep_he, json{{"spectroscopy", json::object()}}), ValidationError);
  CHECK_THROWS_AS(resolve_config(Command::prep_he, json{{"prep", 3}}), ValidationError);
  CHECK_THROWS_AS(resolve_config(Command::prep_he, json{{"prep", {{"ramp_time", "long"}}}}), ValidationError);
  CHECK_THROWS_AS(resolve_config(Command::prep_he, json{{"command", "prep-h2"}}), ValidationError);
  CHECK_THROWS_AS(resolve_config(Command::prep_he, json{{"threads", 0}}), ValidationError);
  CHECK_THROWS_AS(resolve_config(Command::prep_he, json{{"prep", {{"evolve", {{"scheme", "euler"}}}}}}),
                  ValidationError);
  // Validation happens before any solve.
  CHECK_THROWS_AS(resolve_config(Command::prep_he, json{{"prep", {{"nuclei", json::array()}}}}), ValidationError);
  CHECK_THROWS_AS(resolve_config(Command::spectroscopy, json{{"spectroscopy", {{"drive", -1.0}}}}),
                  ValidationError);
  CHECK_THROWS_AS(resolve_config(Command::prep_he, json{{"dressing", {{"detuning", 0.0}}}}), ValidationError);
}

TEST_CASE("resolved dump round trip") {
  for (auto c : {Command::prep_he, Command::prep_h2, Command::bond_scan, Command::spectroscopy, Command::spectrum,
                 Command::dressing_report}) {
    auto doc = json::parse(R"({"sector": "triplet", "padding": 3})");
    if (c == Command::spectroscopy) doc = json{{"spectroscopy", {{"omegas", {0.1, 0.25}}}}};
    if (c == Command::prep_h2) doc["dressing"] = {{"rabi", 1.0}, {"detuning", 4.0}, {"duty_cycle", 0.5}};
    const auto first = resolve_config(c, doc);
    const json flat = resolved_dump(first);
    for (const auto& [key, value] : flat.items()) CHECK(key.front() == '/');
    const auto again = resolve_config(c, flat.unflatten());
    CHECK(resolved_dump(again) == flat);

    const auto dir = scratch("dump");
    std::ofstream(dir / "flat.json") << flat.dump(2);
    CHECK(resolved_dump(load_config(c, (dir / "flat.json").string())) == flat);
  }
  // Empty lists survive flattening.
  const auto sp = resolve_config(Command::spectroscopy, json::object());
  CHECK(resolve_config(Command::spectroscopy, resolved_dump(sp).unflatten()).spectroscopy.omegas.empty());
}

TEST_CASE("load_config errors") {
  const auto dir = scratch("load");
  CHECK_THROWS_AS(load_config(Command::prep_he, (dir / "missing.json").string()), ValidationError);
  std::ofstream(dir / "broken.json") << "{\"prep\": ";
  CHECK_THROWS_AS(load_config(Command::prep_he, (dir / "broken.json").string()), ValidationError);
  std::ofstream(dir / "comments.json") << "{\n  // short ramp\n  \"prep\": {\"ramp_time\": 7}\n}";
  CHECK(load_config(Command::prep_he, (dir / "comments.json").string()).prep.ramp_time == 7.0);
}

TEST_CASE("CSV writers") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-2.5e-12) == "-2.5e-12");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);

  std::ostringstream t;
  TrajectorySample s;
  s.t = 1.5;
  s.norm = 1.0;
  s.fidelity_target = 0.25;
  s.fidelity_instantaneous = std::nan("");
  s.energy = {1.0, -2.0, 0.5, -0.5};
  write_trajectory_csv(t, {s});
  CHECK(t.str() == "t,norm,fidelity_target,fidelity_instantaneous,E_kin,E_pot,E_int,E_total\n"
                   "1.5,1,0.25,nan,1,-2,0.5,-0.5\n");

  std::ostringstream b;
  BondPoint bad;
  bad.separation = 2;
  bad.ok = false;
  bad.error = "no \"convergence\", sorry";
  write_scan_csv(b, {bad});
  CHECK(b.str().find("\"no \"\"convergence\"\", sorry\"") != std::string::npos);

  std::ostringstream sp;
  write_spectrum_csv(sp, {-1.0, -0.5}, {"1s", "2p"});
  CHECK(sp.str() == "index,energy,label\n0,-1,1s\n1,-0.5,2p\n");
  CHECK_THROWS_AS(write_spectrum_csv(sp, {-1.0}, {"1s", "2p"}), ShapeError);

  std::ostringstream o;
  LatticeGeometry g(2, 1);
  write_orbitals_csv(o, g, {StateVector{{0.6, 0.0}, {0.0, 0.8}}});
  CHECK(o.str() == "site,x,y,level,re,im,probability\n0,0,0,0,0.6,0,0.36\n1,1,0,0,0,0.8,0.6400000000000001\n");
  CHECK_THROWS_AS(write_orbitals_csv(o, g, {StateVector(3)}), ShapeError);
}

TEST_CASE("run_command: preparation artifacts and determinism") {
  auto doc = tiny_helium();
  doc["reverse"] = true;
  doc["dressing"] = {{"rabi", 1.0}, {"detuning", 5.0}, {"lifetime", 10.0}};
  const auto c = resolve_config(Command::prep_he, doc);
  const auto d1 = scratch("prep1"), d2 = scratch("prep2");
  auto s1 = run_command(c, d1);
  auto s2 = run_command(c, d2);
  CHECK(first_line(d1 / "trajectory.csv") == "t,norm,fidelity_target,fidelity_instantaneous,E_kin,E_pot,E_int,E_total");
  CHECK(slurp(d1 / "trajectory.csv") == slurp(d2 / "trajectory.csv"));
  CHECK(json::parse(slurp(d1 / "summary.json")) == s1);
  s1.erase("timestamp");
  s2.erase("timestamp");
  CHECK(s1 == s2);

  const auto& r = s1.at("result");
  CHECK(r.at("relative_energy_error").get<double>() >= 0.0);
  CHECK(r.at("final_fidelity").get<double>() <= 1.0 + 1e-12);
  CHECK(r.at("return_probability").is_number());
  CHECK(r.at("final_energy").at("total").get<double>() >= r.at("exact_energy").get<double>() - 1e-9);
  const auto& dr = s1.at("dressing");
  CHECK(dr.at("figure_of_merit").get<double>() == doctest::Approx(10.0));
  // sqrt of a sin^4 ramp integrates to T_int / 2; the faint onset below the
  // activity floor is not counted.
  const double dressed = dr.at("dressed_time").get<double>();
  CHECK(dressed == doctest::Approx(2.5).epsilon(1e-4));
  CHECK(dressed <= 2.5);
  CHECK(dr.at("survival").get<double>() == doctest::Approx(std::exp(-dressed / 10.0)).epsilon(1e-12));
  CHECK(s1.at("parameters") == resolved_dump(c));
  CHECK(s1.at("version") == kVersion);
}

TEST_CASE("run_command: scan, spectrum, spectroscopy and dressing report") {
  SUBCASE("bond scan") {
    auto doc = json::parse(R"({"padding": 2, "scan": {"separations": [0, 2], "interaction_times": [2.0]},
                               "prep": {"verify_step": false}})");
    const auto dir = scratch("scan");
    const auto s = run_command(resolve_config(Command::bond_scan, doc), dir);
    const auto& pts = s.at("result").at("points");
    REQUIRE(pts.size() == 2);
    CHECK_FALSE(pts[0].at("ok").get<bool>());
    CHECK(pts[0].at("binding").is_null());
    CHECK(pts[1].at("ok").get<bool>());
    CHECK(first_line(dir / "scan.csv").starts_with("separation,interaction_time,final_energy"));
  }
  SUBCASE("spectrum") {
    auto doc = json::parse(R"({"padding": 4, "spectrum": {"bohr_radius": 1.0, "levels": 3}})");
    const auto dir = scratch("spectrum");
    const auto s = run_command(resolve_config(Command::spectrum, doc), dir);
    const auto& lv = s.at("result").at("levels");
    REQUIRE(lv.size() == 3);
    CHECK(lv[0].at("label") == "1s");
    CHECK(first_line(dir / "spectrum.csv") == "index,energy,label");
    CHECK(first_line(dir / "orbitals.csv") == "site,x,y,level,re,im,probability");

    // Two particles with a custom field from CSV.
    {
      std::ofstream f(dir / "field.csv");
      f << "index,value\n";
      for (int i = 0; i < 25; ++i) f << i << ',' << (i == 0 ? 0.5 : 0.0) << '\n';
    }
    auto two = json::parse(R"({"padding": 2, "spectrum": {"particles": 2, "levels": 2}})");
    two["spectrum"]["custom_field_csv"] = (dir / "field.csv").string();
    const auto s2 = run_command(resolve_config(Command::spectrum, two, "triplet"), dir);
    CHECK(s2.at("result").at("dimension") == 25 * 24 / 2);
  }
  SUBCASE("spectroscopy") {
    auto doc = json::parse(R"({"spectroscopy": {"geometry": {"lx": 9, "ly": 8}, "nucleus": {"x": 4, "y": 3},
                               "total_time": 100, "omegas": [0.3, 0.6], "levels": 4, "samples": 40,
                               "drive": 0.05}})");
    const auto dir = scratch("spectroscopy");
    const auto s = run_command(resolve_config(Command::spectroscopy, doc), dir);
    CHECK(s.at("result").at("fits").size() >= 2);
    CHECK(first_line(dir / "spectroscopy.csv") == "omega,amplitude,rabi,residual,flat,fit_failed,unbound,refined");
    CHECK(first_line(dir / "spectrum.csv") == "index,energy,gap,matrix_element,label,unbound");
  }
  SUBCASE("dressing report") {
    const auto dir = scratch("dressing");
    const auto s = run_command(resolve_config(Command::dressing_report, json::object()), dir);
    const auto& d = s.at("dressing");
    CHECK(d.at("beta").get<double>() == doctest::Approx(0.1));
    // Bosonic helium: T_int = 20 gives 10 dressed time units.
    CHECK(d.at("dressed_time").get<double>() == doctest::Approx(10.0).epsilon(1e-4));
    CHECK(d.at("figure_of_merit").get<double>() == doctest::Approx(2.0 * M_PI * 1.7));
  }
}

TEST_CASE("error documents and exit codes") {
  const auto j = error_json(ValidationError("bad"));
  CHECK(j.at("error").at("type") == "validation");
  CHECK(j.at("error").at("message") == "bad");
  CHECK(error_json(ConvergenceError("slow", 1e-3)).at("error").at("residual").get<double>() == 1e-3);
  CHECK(error_status(ValidationError("x")) == 2);
  CHECK(error_status(StiffnessError("x")) == 3);
  CHECK(error_status(std::runtime_error("x")) == 1);

  const auto dir = scratch("cli");
  std::ofstream(dir / "empty_nuclei.json") << R"({"prep": {"nuclei": []}})";
  CHECK(run_cli("prep-he " + (dir / "empty_nuclei.json").string() + " --out " + (dir / "o").string()) == 2);
  CHECK_FALSE(fs::exists(dir / "o" / "summary.json"));
  CHECK(run_cli("prep-he --dry-run") == 0);
  CHECK(run_cli("prep-h2 --sector triplet --dry-run --threads 2") == 0);
  CHECK(run_cli("prep-h2 --sector quartet --dry-run") != 0);
  CHECK(run_cli("fly") != 0);
  std::ofstream(dir / "tiny.json") << tiny_helium().dump();
  CHECK(run_cli("prep-he " + (dir / "tiny.json").string() + " --out " + (dir / "run").string()) == 0);
  CHECK(fs::exists(dir / "run" / "summary.json"));
  CHECK(fs::exists(dir / "run" / "trajectory.csv"));
}
