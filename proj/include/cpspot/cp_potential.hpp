#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cpspot/error.hpp"
#include "cpspot/materials.hpp"

// Casimir-Polder potential of a ground-state atom outside a dielectric sphere.
// r is the distance from the sphere centre, z = r - R the surface distance.
namespace cpspot {

struct SphereSystem {
  double R = 0.0;
  DrudeLorentzModel sphere;
  PolarizabilityModel atom;
  int l_max = 800;
  double stitch_tol = 0.03;
  // l-series stops after 10 consecutive terms below series_tol * partial sum;
  // 0 sums every order up to l_max
  double series_tol = 1e-8;
  // relative change between quadrature doublings
  double quad_tol = 1e-4;

  void validate() const;
};

struct MieCoefficients {
  double te = 0.0;
  double tm = 0.0;
};

// Reflection coefficients at omega = i xi, real on the imaginary axis.
MieCoefficients mie_coefficients(int l, double xi, const SphereSystem &sys);

// (2l+1){r_TE h_l^2 + r_TM [l(l+1) h_l^2 + ([kr h_l]')^2]/(kr)^2} at k = i xi/c
// for l = 1..n, n <= l_max set by the stopping rule. Entry 0 is unused.
std::vector<double> series_terms(double r, double xi, const SphereSystem &sys);

// Integrand of U(r) = int_0^inf dxi f(xi), J s.
double potential_integrand(double r, double xi, const SphereSystem &sys);

double cp_potential_full(double r, const SphereSystem &sys);

// Non-retarded multipole sum.
double cp_potential_nonretarded(double r, const SphereSystem &sys);

// Lennard-Jones coefficient, U_BNR = -C3 / z^3.
double c3_halfspace(const DrudeLorentzModel &sphere, const PolarizabilityModel &atom);

struct AsymptoticPotentials {
  double small_sphere = 0.0;               // U_S
  double small_sphere_nonretarded = 0.0;   // U_SNR
  double small_sphere_retarded = 0.0;      // U_SR
};

AsymptoticPotentials asymptotic_potentials(double r, const SphereSystem &sys);

enum class PotentialMethod { FullSeries, HalfSpace };

std::string to_string(PotentialMethod m);

struct PotentialPoint {
  double r = 0.0;
  double U = 0.0;
  PotentialMethod method = PotentialMethod::FullSeries;
};

struct PotentialCurve {
  double R = 0.0;
  double c3 = 0.0;
  double r_stitch = 0.0;
  std::vector<PotentialPoint> points; // ascending r
  std::vector<std::string> warnings;

  // Log-log interpolation in (z, |U|); -C3/z^3 below the grid, power-law
  // continuation of the last two points above it.
  double operator()(double r) const;

  // r[m] U[J] method, one point per line, '#' header
  void write(std::ostream &out) const;
};

// Full series outside the stitch radius, -C3/z^3 inside. The grid is scanned
// from the outside in; the first point with |U_full/U_BNR - 1| <= stitch_tol
// becomes r_stitch and it and every point closer to the surface take the
// half-space value. If no point enters the band the join is placed at the
// smallest deviation and a warning is recorded. Points are processed in parallel batches of `threads`.
PotentialCurve stitched_potential(const SphereSystem &sys, std::span<const double> r_grid,
                                  int threads = 1);

} // namespace cpspot
