#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "cpspot/constants.hpp"
#include "cpspot/cp_potential.hpp"
#include "cpspot/eikonal.hpp"

using namespace cpspot;

namespace {

const double kIndiumMass = 114.8 * constants::atomic_mass;
const double kC3 = 9.77e-50;

// mean thermal speed at 1200 C
Beam indium_beam() {
  return Beam::from_speed(kIndiumMass,
                          std::sqrt(8.0 * constants::boltzmann * 1473.15 / (constants::pi * kIndiumMass)));
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return out;
}

} // namespace

TEST_CASE("beam") {
  const auto b = indium_beam();
  CHECK(b.speed == doctest::Approx(521.0).epsilon(0.01));
  CHECK(b.wavelength == doctest::Approx(6.67e-12).epsilon(0.01));
  CHECK(std::abs(b.wavelength * b.mass * b.speed / constants::planck - 1.0) < 1e-12);
  CHECK_THROWS_AS(Beam::from_speed(kIndiumMass, 0.0), ConfigurationError);
}

TEST_CASE("WKB validity") {
  const auto beam = Beam::from_speed(kIndiumMass, 500.0);
  CHECK(wkb_validity([](double) { return 0.0; }, beam, 1e-9) == 0.0);

  const auto bnr = [](double z) { return -kC3 / (z * z * z); };
  auto analytic = [&](double z) {
    const double E = beam.kinetic_energy();
    const double p2 = 2.0 * beam.mass * (E - bnr(z));
    const double dU = 3.0 * kC3 / std::pow(z, 4);
    return beam.mass * dU / std::sqrt(p2) / (p2 / constants::hbar);
  };
  const double at_1nm = wkb_validity(bnr, beam, 1e-9);
  CHECK(at_1nm == doctest::Approx(analytic(1e-9)).epsilon(1e-6));
  CHECK(at_1nm < 1e-5);
  CHECK(wkb_validity(bnr, beam, 10e-9) < 1e-9);

  double prev = 0.0;
  for (double z : log_grid(100e-9, 0.5e-9, 30)) {
    const double v = wkb_validity(bnr, beam, z);
    CHECK(v > prev);
    prev = v;
  }
  const double E = beam.kinetic_energy();
  CHECK_THROWS_AS(wkb_validity([&](double) { return 2.0 * E; }, beam, 1e-9), DomainError);
}

TEST_CASE("eikonal phase") {
  const auto beam = indium_beam();
  SUBCASE("numeric against the closed form") {
    for (double R : {50e-9, 500e-9}) {
      const auto U = [&](double x, double rho) {
        const double z = std::hypot(x, rho) - R;
        return -kC3 / (z * z * z);
      };
      for (double a : {0.2e-9, 1e-9, 10e-9, 100e-9, 3e-6})
        CHECK(rel(eikonal_phase_numeric(U, a, R, beam), eikonal_phase_analytic(a, R, kC3, beam)) <
              1e-6);
    }
  }
  SUBCASE("zero potential and a non-decaying tail") {
    CHECK(eikonal_phase_numeric([](double, double) { return 0.0; }, 1e-9, 50e-9, beam) == 0.0);
    CHECK_THROWS_AS(eikonal_phase_numeric([](double, double) { return -1e-30; }, 1e-9, 50e-9, beam),
                    ConvergenceError);
    CHECK_THROWS_AS(eikonal_phase_numeric([](double, double) { return 0.0; }, 0.0, 50e-9, beam),
                    GeometryError);
  }
  SUBCASE("closed form limits") {
    const double R = 50e-9;
    CHECK(eikonal_phase_analytic(1.0, R, kC3, beam) < 1e-12 * eikonal_phase_analytic(1e-9, R, kC3, beam));
    const double a = R / 100.0;
    CHECK(rel(eikonal_phase_analytic(a, R, kC3, beam), c52(R, kC3, beam) / std::pow(a, 2.5)) < 0.02);
    // the 4 pi contour of the power law sits at 1.23 nm
    const double a4pi = std::pow(c52(R, kC3, beam) / (4.0 * constants::pi), 0.4);
    CHECK(a4pi == doctest::Approx(1.2e-9).epsilon(0.05));
    double prev = std::numeric_limits<double>::infinity();
    for (double x : log_grid(0.1e-9, 1e-5, 60)) {
      const double v = eikonal_phase_analytic(x, R, kC3, beam);
      CHECK(v > 0.0);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("C52 and annulus radii") {
  const auto beam = indium_beam();
  const double R[] = {50e-9, 100e-9, 200e-9};
  const double expected_c52[] = {6.622e-22, 9.365e-22, 13.244e-22};
  const double inner[] = {51.2e-9, 101.4e-9, 201.6e-9};
  const double outer[] = {83.8e-9, 138.9e-9, 244.7e-9};
  for (int i = 0; i < 3; ++i) {
    const double c = c52(R[i], kC3, beam);
    CHECK(rel(c, expected_c52[i]) < 0.01);
    const auto radii = annulus_radii(c, R[i]);
    CHECK(std::abs(radii.inner - inner[i]) < 0.2e-9);
    CHECK(std::abs(radii.outer - outer[i]) < 0.2e-9);
    CHECK(R[i] < radii.inner);
    CHECK(radii.inner < radii.outer);
  }
  CHECK(c52(4.0 * R[0], kC3, beam) / c52(R[0], kC3, beam) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(annulus_radii(1e-21, 50e-9, 0.1, 0.2), ConfigurationError);
  CHECK_THROWS_AS(c52(0.0, kC3, beam), ConfigurationError);
}

TEST_CASE("capture impact parameter") {
  const auto beam = indium_beam();
  const double R[] = {50e-9, 100e-9, 200e-9};
  const double expected[] = {1.0e-9, 1.2e-9, 1.4e-9};
  for (int i = 0; i < 3; ++i) {
    const double a = capture_impact_parameter(R[i], kC3, beam);
    CHECK(std::abs(a - expected[i]) < 0.1e-9);
    CHECK(a < annulus_radii(c52(R[i], kC3, beam), R[i]).inner - R[i]);

    // orbit check: b^2 = (R + a_min)^2 touches the minimum of s^2 (1 - U/E)
    const double E = beam.kinetic_energy();
    double lowest = std::numeric_limits<double>::infinity();
    for (double z : log_grid(0.01e-9, 50e-9, 20001)) {
      const double s = R[i] + z;
      lowest = std::min(lowest, s * s * (1.0 + kC3 / (E * z * z * z)));
    }
    CHECK(std::sqrt(lowest) - R[i] == doctest::Approx(a).epsilon(1e-4));
  }
  double prev = capture_impact_parameter(50e-9, kC3, beam);
  for (double f : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const double a = capture_impact_parameter(50e-9, f * kC3, beam);
    CHECK(a < prev);
    prev = a;
  }
  CHECK(prev < 0.05e-9);
  CHECK(capture_impact_parameter(50e-9, 0.0, beam) == 0.0);
  CHECK_THROWS_AS(capture_impact_parameter(50e-9, 1e-20, beam), BracketError);
}

TEST_CASE("phase profiles") {
  const auto beam = indium_beam();
  const double R = 50e-9;
  const auto p = PhaseProfile::power_law(R, kC3, beam);
  CHECK(p(2e-9) == doctest::Approx(p.C52 / std::pow(2e-9, 2.5)).epsilon(1e-14));
  CHECK(p.R < p.R_i_CP);
  CHECK(p.R_i_CP < p.R_o_CP);

  SUBCASE("tabulated power law interpolates exactly") {
    std::vector<PhaseSample> s;
    for (double a : log_grid(0.1e-9, 1e-6, 30))
      s.push_back({a, p(a)});
    const auto t = PhaseProfile::tabulated(R, kC3, beam, s);
    for (double a : {0.05e-9, 0.37e-9, 7.7e-9, 123e-9, 5e-6})
      CHECK(t(a) == doctest::Approx(p(a)).epsilon(1e-10));
    CHECK_FALSE(t.is_power_law());
  }
  SUBCASE("numeric tabulation of the half-space potential") {
    const auto U = [&](double r) { return -kC3 / std::pow(r - R, 3); };
    const auto grid = log_grid(0.2e-9, 500e-9, 40);
    const auto t1 = tabulate_phase(U, R, kC3, beam, grid, 1);
    const auto t3 = tabulate_phase(U, R, kC3, beam, grid, 3);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(rel(t1.samples[i].phi, eikonal_phase_analytic(grid[i], R, kC3, beam)) < 1e-6);
      CHECK(t1.samples[i].phi == t3.samples[i].phi);
    }
  }
  SUBCASE("scaling") {
    const auto zero = p.scaled(0.0);
    CHECK(zero(1e-9) == 0.0);
    CHECK(zero.R_i_CP == R);
    const auto up = p.scaled(1.8);
    CHECK(up(3e-9) == doctest::Approx(1.8 * p(3e-9)).epsilon(1e-14));
    CHECK(up.R_i_CP > p.R_i_CP);
    CHECK(up.C3 == doctest::Approx(1.8 * kC3));
  }
  SUBCASE("validation and export") {
    CHECK_THROWS_AS(PhaseProfile::tabulated(R, kC3, beam, {{1e-9, 1.0}, {2e-9, 2.0}}),
                    ConfigurationError);
    CHECK_THROWS_AS(PhaseProfile::tabulated(R, kC3, beam, {{1e-9, 1.0}}), ConfigurationError);
    CHECK_THROWS_AS(p(0.0), GeometryError);
    std::ostringstream out;
    p.write(out, 1e-9, 1e-7, 5);
    const auto text = out.str();
    CHECK(text.find("# C52 ") != std::string::npos);
    CHECK(text.find("# R_o_CP ") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 11);
  }
}

TEST_CASE("full-potential phase approaches the half-space form for larger spheres") {
  const auto beam = indium_beam();
  const auto atom = PolarizabilityModel::indium();
  const auto sphere = DrudeLorentzModel::silica();
  const double c3 = c3_halfspace(sphere, atom);
  std::vector<double> discrepancy;
  for (double R : {50e-9, 100e-9, 200e-9, 500e-9}) {
    SphereSystem sys;
    sys.R = R;
    sys.sphere = sphere;
    sys.atom = atom;
    std::vector<double> grid;
    for (double z : log_grid(0.3e-9, 30e-6, 45))
      grid.push_back(R + z);
    const auto curve = stitched_potential(sys, grid);
    const double a = 5e-9;
    const double full = eikonal_phase_numeric(
        [&](double x, double rho) { return curve(std::hypot(x, rho)); }, a, R, beam);
    discrepancy.push_back(std::abs(full / eikonal_phase_analytic(a, R, c3, beam) - 1.0));
  }
  for (std::size_t i = 1; i < discrepancy.size(); ++i)
    CHECK(discrepancy[i] < discrepancy[i - 1]);
  CHECK(discrepancy.back() < 0.1);
}
