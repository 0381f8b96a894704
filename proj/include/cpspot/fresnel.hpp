#pragma once

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cpspot/eikonal.hpp"

// Fresnel diffraction behind a sphere with a Casimir-Polder phase annulus.
//
// The integration plane holds the sphere cross-section (blocked disk), the
// annulus [R_i_CP, R_o_CP] where the eikonal phase is applied, and free space
// beyond. For a detection point at axis distance rho_P the origin is moved to
// where the source-detector line crosses the plane, c0 = rho_P g / (g + b),
// and the plane integral is split into N_theta radial rays from that origin.
namespace cpspot {

enum class AnnulusRule {
  Trapezoid,   // plain trapezoid of rho e^{i psi}
  PhaseLinear, // psi linear and rho linear on each step, integrated exactly
  GaussPanel,  // 6-point Gauss-Legendre on each step
};

struct Scene {
  double R = 50e-9;   // sphere radius; 0 means no obstacle
  double g = 0.6;     // source to sphere
  double b = 0.1e-3;  // sphere to detector
  Beam beam;
  PhaseProfile phase; // used when cp_enabled
  bool cp_enabled = true;
  double source_diameter = 20e-6;
  int N_theta = 19997;
  double cp_step = 0.1e-9;
  int n_pixels_radial = 2000;
  AnnulusRule annulus_rule = AnnulusRule::Trapezoid;
  int threads = 1;

  // (pi / lambda)(1/g + 1/b)
  double kappa() const;
  double blocked_radius() const;
  bool has_annulus() const;
  void validate() const;
  // Fresnel-regime checks (lambda << R << g, b)
  std::vector<std::string> warnings() const;
};

double geometric_phase(double rho, const Scene &scene);

// Part of the ray rho_bar (cos theta, sin theta), rho_bar >= 0, inside the
// circle of radius r centred at (c0, 0).
struct RayInterval {
  bool hit = false;
  bool origin_inside = false; // entry is then 0
  double entry = 0.0;
  double exit = 0.0;
};

RayInterval ray_intersections(double theta, double c0, double r_circle);

// int_{start}^{inf} rho e^{i kappa rho^2} d rho with the oscillating term at
// infinity dropped, and the bounded version by endpoint differences.
std::complex<double> free_segment_amplitude(double rho_start, const Scene &scene);
std::complex<double> free_segment_amplitude(double rho_start, double rho_end, const Scene &scene);

// Annulus part of the ray integral, int rho e^{i(kappa rho^2 + dphi(a))} over
// the ray's intervals between the R_i_CP and R_o_CP circles.
std::complex<double> cp_segment_amplitude(double theta, double c0, const Scene &scene);

// Whole ray: free segments plus annulus segments, blocked disk removed.
std::complex<double> ray_amplitude(double theta, double c0, const Scene &scene);

// -i/(lambda g b) (2 pi / N_theta) sum over rays
std::complex<double> point_amplitude(double rho_P, const Scene &scene);
// same machinery without an obstacle
std::complex<double> free_amplitude(const Scene &scene);
double relative_intensity(double rho_P, const Scene &scene);

struct RadialProfile {
  std::vector<double> rho;       // m, detection plane
  std::vector<double> intensity; // I_rel
  double b = 0.0;
  double R = 0.0;
  bool cp = false;
  double corridor_factor = 1.0;
  bool convolved = false;
  double source_diameter = 0.0;
  std::vector<std::string> notes;

  // linear interpolation, clamped to the end samples
  double operator()(double rho) const;
  void write(std::ostream &out) const;
};

// n_pixels_radial samples at rho_j = j R / (n - 1). Pixels are shared among
// scene.threads workers; every pixel is computed independently.
RadialProfile radial_profile(const Scene &scene);

// Uniform disk of diameter source_diameter b / g, integrated per radius with a
// polar Gauss-Legendre x trapezoid rule. Kernels narrower than the sample
// pitch leave the profile unchanged (a note is added).
RadialProfile convolve_source(const RadialProfile &profile, const Scene &scene);

struct DiffractionImage {
  int n = 0;
  double pitch = 0.0;  // m per pixel
  double R = 0.0;      // radius covered by the source profile
  std::vector<double> pixels; // row-major, n x n

  double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * n + col]; }
  // Binary 16-bit big-endian PGM plus a text sidecar "<path>.txt" with pitch,
  // scale and clamping. Gray value = round(65535 * I / scale), scale = max I.
  void write_pgm(const std::filesystem::path &path) const;
};

// Pixel centres at ((k + 1/2) - n/2) pitch, pitch = 2R/n; intensity from the
// profile at the pixel radius, clamped beyond R.
DiffractionImage assemble_image(const RadialProfile &profile, int n = 4000);

struct BScanEntry {
  double b = 0.0;
  RadialProfile with_cp;
  RadialProfile without_cp;
};

// Point-source profiles with and without the phase annulus for every b; the
// source convolution is applied when source_diameter > 0.
std::vector<BScanEntry> b_scan(const Scene &scene, std::span<const double> b_values);

double fresnel_zone_width(const Scene &scene);

} // namespace cpspot
