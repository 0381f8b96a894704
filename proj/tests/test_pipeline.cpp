#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cpspot/config.hpp"
#include "cpspot/constants.hpp"
#include "cpspot/cp_potential.hpp"
#include "cpspot/pipeline.hpp"

using namespace cpspot;
namespace fs = std::filesystem;

namespace {

const double kIndiumMass = 114.8 * constants::atomic_mass;

fs::path scratch_dir(const std::string &name) {
  const auto dir = fs::temp_directory_path() / ("cpspot_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig small_config(const fs::path &out) {
  RunConfig c;
  c.out_dir = out;
  c.phase_model = "power_law";
  c.N_theta = 201;
  c.pixels = 40;
  c.image_size = 16;
  c.set_b_range(0.05e-3, 1.05e-3, 3);
  return c;
}

std::vector<std::vector<double>> read_table(const fs::path &path) {
  std::ifstream in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#')
      continue;
    std::istringstream s(line);
    std::vector<double> row;
    double v;
    while (s >> v)
      row.push_back(v);
    rows.push_back(row);
  }
  return rows;
}

} // namespace

TEST_CASE("beam thermodynamics") {
  const auto beam = beam_from_temperature(1473.15, kIndiumMass);
  CHECK(beam.speed == doctest::Approx(521.0).epsilon(0.01));
  CHECK(beam.wavelength == doctest::Approx(6.67e-12).epsilon(0.01));
  CHECK(beam_from_temperature(4 * 1473.15, kIndiumMass).speed / beam.speed == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(beam_from_temperature(0.0, kIndiumMass), ConfigurationError);

  const auto atom = PolarizabilityModel::indium();
  const double f = boltzmann_excited_fraction(atom, 1473.15);
  CHECK(f > 2.5e-11);
  CHECK(f < 1e-10);
  CHECK(boltzmann_excited_fraction(atom, 0.0) == 0.0);
  PolarizabilityModel soft;
  soft.transitions = {{1.0, 1e-29}};
  CHECK(boltzmann_excited_fraction(soft, 300.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(boltzmann_excited_fraction(PolarizabilityModel{}, 300.0), ConfigurationError);

  RunConfig c;
  c.temperature.reset();
  c.speed = 400.0;
  CHECK(beam_from_config(c).speed == 400.0);
}

TEST_CASE("config parsing and round trip") {
  const std::string text = R"(
# a comment
[geometry]
radius = 100e-9   # sphere
g = 0.6
b_range = 0.05e-3:1.05e-3:11

[beam]
speed = 500

[atom]
J0 = 0.5
transition = 4.594e15 1.6e-29

[diffraction]
corridor = yes
n_theta = 1999
annulus_rule = gauss
)";
  const auto c = parse_config(text);
  CHECK(c.R == 100e-9);
  REQUIRE(c.b_values.size() == 11);
  CHECK(c.b_values[10] == doctest::Approx(1.05e-3));
  CHECK_FALSE(c.temperature.has_value());
  CHECK(*c.speed == 500.0);
  CHECK(c.atom.transitions.size() == 1);
  CHECK(c.sphere.resonances.size() == 2); // default kept
  CHECK(c.corridor);
  CHECK(c.N_theta == 1999);

  const auto once = serialize_config(c);
  const auto twice = serialize_config(parse_config(once));
  CHECK(once == twice);
  CHECK(serialize_config(parse_config(serialize_config(RunConfig{}))) == serialize_config(RunConfig{}));

  CHECK_THROWS_AS(parse_config("[geometry]\nwidth = 1\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("[geometry]\ng = 1\ng = 2\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("[geometry]\nb = 1e-4\nb_range = 1e-4:2e-4:2\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("[beam]\nspeed = 500\ntemperature = 1000\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("[geometry]\ng = abc\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("[sphere]\noptical_data = /no/such/file.txt\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("[diffraction]\nn_theta = 2\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("[geometry\n"), ConfigurationError);

  double lo, hi;
  int n;
  const auto r = parse_range("1:3:5", &lo, &hi, &n);
  CHECK(r.size() == 5);
  CHECK(r[1] == 1.5);
  CHECK(n == 5);
  CHECK_THROWS_AS(parse_range("1:3"), ConfigurationError);
  CHECK_THROWS_AS(parse_range("3:1:4"), ConfigurationError);

  auto t = apply_override(once, "geometry.radius", "2e-07");
  CHECK(parse_config(t).R == 2e-7);
  t = apply_override(t, "geometry.b_range", "");
  t = apply_override(t, "geometry.b", "0.0003");
  CHECK(parse_config(t).b_values == std::vector<double>{0.0003});
  t = apply_override("", "output.threads", "3");
  CHECK(parse_config(t).threads == 3);
  CHECK_THROWS_AS(apply_override(t, "threads", "3"), ConfigurationError);
}

TEST_CASE("optical data path resolves against the config file") {
  const auto dir = scratch_dir("optical");
  std::vector<double> omegas;
  for (int i = 0; i <= 120; ++i)
    omegas.push_back(1e12 * std::pow(10.0, 6.0 * i / 120.0));
  const auto table = OpticalDataTable::from_model(DrudeLorentzModel::silica(), omegas);
  {
    std::ofstream out(dir / "sio2.txt");
    out.precision(17);
    for (const auto &r : table.rows)
      out << r.omega << ' ' << r.n << ' ' << r.k << '\n';
  }
  {
    std::ofstream out(dir / "run.cfg");
    out << "[sphere]\noptical_data = sio2.txt\n[output]\ndirectory = out\n";
  }
  const auto c = read_config(dir / "run.cfg");
  CHECK(fs::equivalent(c.optical_data, dir / "sio2.txt"));
  CHECK(fs::equivalent(c.out_dir.parent_path(), dir));
  const auto m = run_pipeline(c, Stage::Material);
  const double ref = c3_halfspace(DrudeLorentzModel::silica(), PolarizabilityModel::indium());
  CHECK(m.C3 == doctest::Approx(ref).epsilon(0.02));
  CHECK(fs::exists(c.out_dir / "material_fit.txt"));
}

TEST_CASE("pipeline outputs, manifest and reproducibility") {
  const auto dir = scratch_dir("pipeline");
  auto c = small_config(dir / "run");
  const auto m = run_pipeline(c);
  CHECK(m.status == "ok");
  REQUIRE(m.stages.size() == 4);
  CHECK(m.stages[1].status == "skipped"); // power-law phase needs no potential curve
  CHECK(m.stages[3].status == "ok");
  CHECK(m.C52 > 0.0);
  CHECK(m.excited_fraction > 0.0);

  // on-axis ordering of the b scan: CP above no CP, convolved with the 20 um source
  const auto onaxis = read_table(c.out_dir / "onaxis.txt");
  REQUIRE(onaxis.size() == 3);
  for (const auto &row : onaxis) {
    REQUIRE(row.size() == 3);
    CHECK(row[2] > row[1]);
  }

  std::ifstream mf(c.out_dir / "manifest.json");
  const auto j = nlohmann::json::parse(mf);
  CHECK(j["status"] == "ok");
  CHECK(j["constants"] == std::string(constants::version));
  CHECK(j["outputs"].size() == m.outputs.size());
  CHECK(j["config_hash"] == fnv1a_hex(serialize_config(c)));
  for (const auto &o : m.outputs)
    CHECK(fnv1a_file(c.out_dir / o.path) == o.hash);

  const auto again = run_pipeline(c);
  REQUIRE(again.outputs.size() == m.outputs.size());
  for (std::size_t i = 0; i < m.outputs.size(); ++i) {
    CHECK(again.outputs[i].path == m.outputs[i].path);
    CHECK(again.outputs[i].hash == m.outputs[i].hash);
  }

  c.threads = 2;
  const auto threaded = run_pipeline(c);
  for (std::size_t i = 0; i < m.outputs.size(); ++i)
    CHECK(threaded.outputs[i].hash == m.outputs[i].hash);

  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("corridor, obstacle-free and failing runs") {
  const auto dir = scratch_dir("corridor");
  auto c = small_config(dir / "corridor");
  c.corridor = true;
  c.images = false;
  c.b_values = {0.1e-3};
  c.b_is_range = false;
  run_pipeline(c);
  const auto onaxis = read_table(c.out_dir / "onaxis.txt");
  REQUIRE(onaxis.size() == 1);
  REQUIRE(onaxis[0].size() == 5); // b, no CP, 0.8, 1.0, 1.8
  CHECK(onaxis[0][2] < onaxis[0][3]);
  CHECK(onaxis[0][3] < onaxis[0][4]);
  for (const char *f : {"0.8", "1.0", "1.8"})
    CHECK(fs::exists(c.out_dir / (std::string("profile_b000_cp_x") + f + ".txt")));

  auto flat = small_config(dir / "flat");
  flat.R = 0.0;
  flat.images = false;
  const auto m = run_pipeline(flat);
  CHECK(m.stages[2].status == "skipped");
  for (std::size_t i = 0; i < 3; ++i) {
    const auto rows = read_table(flat.out_dir / ("profile_b00" + std::to_string(i) + "_nocp.txt"));
    for (const auto &r : rows)
      CHECK(r[1] == doctest::Approx(1.0).epsilon(1e-3));
  }

  {
    std::ofstream bad(dir / "bad.txt");
    bad << "1e15 1.5 0.1\n";
  }
  auto broken = small_config(dir / "broken");
  broken.optical_data = dir / "bad.txt";
  try {
    run_pipeline(broken);
    FAIL("expected a stage failure");
  } catch (const PipelineError &e) {
    CHECK(e.stage() == "materials");
    CHECK(e.partial().status == "failed");
    std::ifstream mf(broken.out_dir / "manifest.json");
    CHECK(nlohmann::json::parse(mf)["status"] == "failed");
  }
}
