#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cpspot/constants.hpp"
#include "cpspot/materials.hpp"

// Run configuration: one text file with [section] headers and `key = value`
// lines. Repeated keys (sphere `resonance`, atom `transition`) build lists.
// '#' starts a comment. Lengths in metres, frequencies in rad/s.
//
//   [geometry]    radius, g, b, b_range = lo:hi:n
//   [beam]        temperature (K) or speed (m/s), mass (kg)
//   [sphere]      resonance = plasma transverse damping | optical_data = path
//   [atom]        J0, transition = omega dipole
//   [potential]   l_max, stitch_tol, z_min, z_max, points, phase_model = full|power_law
//   [diffraction] cp, source_diameter, n_theta, cp_step, pixels, annulus_rule, corridor
//   [output]      directory, images, image_size, threads
namespace cpspot {

struct RunConfig {
  // geometry
  double R = 50e-9;
  double g = 0.6;
  std::vector<double> b_values{0.1e-3};
  bool b_is_range = false;
  double b_lo = 0.0, b_hi = 0.0;
  int b_count = 0;

  // beam: exactly one of temperature / speed
  std::optional<double> temperature = 1473.15;
  std::optional<double> speed;
  double mass = 114.8 * constants::atomic_mass;

  DrudeLorentzModel sphere = DrudeLorentzModel::silica();
  std::filesystem::path optical_data; // empty: use `sphere`
  PolarizabilityModel atom = PolarizabilityModel::indium();

  int l_max = 800;
  double stitch_tol = 0.03;
  double z_min = 0.3e-9;
  double z_max = 30e-6;
  int potential_points = 45;
  std::string phase_model = "full";

  bool cp = true;
  double source_diameter = 20e-6;
  int N_theta = 19997;
  double cp_step = 0.1e-9;
  int pixels = 2000;
  std::string annulus_rule = "trapezoid";
  bool corridor = false;

  std::filesystem::path out_dir = "cpspot_out";
  bool images = true;
  int image_size = 4000;
  int threads = 1;

  void set_b_range(double lo, double hi, int n);
  void validate() const;
};

// Relative paths in the text resolve against base_dir.
RunConfig parse_config(const std::string &text, const std::filesystem::path &base_dir = ".");
RunConfig read_config(const std::filesystem::path &path);
// Every key written explicitly; numbers in shortest round-trip form.
std::string serialize_config(const RunConfig &config);

// Replaces every `key` line of `section` in config text (adding the section
// if needed); an empty value only removes. Key is "section.key".
std::string apply_override(const std::string &text, const std::string &key, const std::string &value);

// "lo:hi:n" -> n evenly spaced values
std::vector<double> parse_range(const std::string &text, double *lo = nullptr, double *hi = nullptr,
                                int *n = nullptr);

} // namespace cpspot
