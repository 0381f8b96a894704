#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "cpspot/error.hpp"

// Eikonal phase of an atom passing a sphere on a straight line at grazing
// distance a (axis distance rho = R + a).
namespace cpspot {

struct Beam {
  double mass = 0.0;       // kg
  double speed = 0.0;      // m/s
  double wavelength = 0.0; // m, h / (m v)

  static Beam from_speed(double mass, double speed);
  double kinetic_energy() const { return 0.5 * mass * speed * speed; }
  void validate() const;
};

// |d/dx sqrt(2m(E-U))| / (2m(E-U)/hbar) at coordinate x, central differences.
// Throws DomainError at a classical turning point (E <= U).
double wkb_validity(const std::function<double(double)> &U, const Beam &beam, double x);

// -(1/hbar v) int dx U(x, rho) along the line rho = a + R. U takes the
// coordinate along the line and the axis distance.
double eikonal_phase_numeric(const std::function<double(double, double)> &U, double a, double R,
                             const Beam &beam);

// Closed form for U = -C3 / (sqrt(rho^2 + x^2) - R)^3.
double eikonal_phase_analytic(double a, double R, double C3, const Beam &beam);

// Delta phi ~ C52 / a^{5/2} for a << R.
double c52(double R, double C3, const Beam &beam);

struct AnnulusRadii {
  double inner = 0.0; // axis distance where the phase equals phi_hi
  double outer = 0.0; // axis distance where the phase equals phi_lo
};

inline constexpr double kPhaseInner = 4.0 * 3.14159265358979323846;
inline constexpr double kPhaseOuter = 3.14159265358979323846 / 1000.0;

AnnulusRadii annulus_radii(double C52, double R, double phi_hi = kPhaseInner,
                           double phi_lo = kPhaseOuter);

// Smallest grazing distance whose classical orbit in -C3/z^3 does not reach
// the surface. Throws BracketError if the barrier is not resolved on
// z in [1e-13, 1e-7] m.
double capture_impact_parameter(double R, double C3, const Beam &beam);

struct PhaseSample {
  double a = 0.0;   // m
  double phi = 0.0; // rad
};

struct PhaseProfile {
  double C3 = 0.0;
  double C52 = 0.0;
  double R = 0.0;
  double R_i_CP = 0.0;
  double R_o_CP = 0.0;
  // empty: exact power law C52 a^{-5/2}
  std::vector<PhaseSample> samples;

  static PhaseProfile power_law(double R, double C3, const Beam &beam);
  // samples ascending in a, positive and strictly decreasing in phi
  static PhaseProfile tabulated(double R, double C3, const Beam &beam,
                                std::vector<PhaseSample> samples);

  bool is_power_law() const { return samples.empty(); }
  // linear in (log a, log phi), end segments continued beyond the table
  double operator()(double a) const;
  // every phase multiplied by factor (C3 -> factor C3), radii recomputed
  PhaseProfile scaled(double factor) const;

  // header block (C3, C52, R, R_i_CP, R_o_CP) then a[m] phi[rad]; a power-law
  // profile is written on n log-spaced points between a_lo and a_hi
  void write(std::ostream &out, double a_lo = 0.1e-9, double a_hi = 1e-6, int n = 200) const;
};

// Phase profile of an arbitrary potential U(r) of the centre distance,
// evaluated numerically on the given grazing distances.
PhaseProfile tabulate_phase(const std::function<double(double)> &U_of_r, double R, double C3,
                            const Beam &beam, const std::vector<double> &a_grid, int threads = 1);

} // namespace cpspot
