#pragma once

#include <complex>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cpspot/error.hpp"

namespace cpspot {

// One Lorentz line on the imaginary axis: w_P^2 / (w_T^2 + gamma xi + xi^2).
struct Resonance {
  double plasma = 0.0;     // rad/s
  double transverse = 0.0; // rad/s
  double damping = 0.0;    // rad/s
};

// eps(i xi) = 1 + sum_i w_P,i^2 / (w_T,i^2 + gamma_i xi + xi^2)
struct DrudeLorentzModel {
  std::vector<Resonance> resonances;

  // Two-line fit for amorphous SiO2.
  static DrudeLorentzModel silica();
  void validate() const;
};

double permittivity(const DrudeLorentzModel &model, double xi);

// Same model continued to the real axis, eps(w) = 1 + sum w_P^2/(w_T^2 - w^2 - i gamma w).
std::complex<double> permittivity_real_axis(const DrudeLorentzModel &model, double omega);

struct OpticalSample {
  double omega = 0.0; // rad/s
  double n = 0.0;
  double k = 0.0;
};

struct OpticalDataTable {
  std::vector<OpticalSample> rows;

  // decades spanned by the frequency column
  double decades() const;
  void validate() const;

  // Three whitespace/comma separated columns (omega[rad/s], n, k); '#' starts a comment.
  static OpticalDataTable read(const std::filesystem::path &path);
  static OpticalDataTable parse(const std::string &text);
  // n + ik = sqrt(eps(w)) sampled on the given frequencies
  static OpticalDataTable from_model(const DrudeLorentzModel &model, std::span<const double> omegas);
};

struct KramersKronigResult {
  double value = 1.0;
  std::vector<std::string> warnings;
};

// eps(i xi) = 1 + (2/pi) int_0^inf dw w Im eps(w) / (w^2 + xi^2), Im eps = 2nk.
// Trapezoid on the table grid, linear ramp from the origin to the first row,
// Im eps ~ w^-3 beyond the last row.
KramersKronigResult kramers_kronig_imag_axis(const OpticalDataTable &table, double xi);

struct PermittivitySample {
  double xi = 0.0;
  double epsilon = 1.0;
};

struct DrudeLorentzFit {
  DrudeLorentzModel model;
  double residual_norm = 0.0; // sqrt(sum (log eps_model - log eps_sample)^2)
  // relative 1-sigma uncertainties, same layout as model.resonances
  std::vector<Resonance> relative_uncertainty;
  int iterations = 0;
};

class FitError : public std::runtime_error {
public:
  FitError(const std::string &what, DrudeLorentzFit best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const DrudeLorentzFit &best() const noexcept { return best_; }

private:
  DrudeLorentzFit best_;
};

// Levenberg-Marquardt on log eps over log-parameters. Without an initial model a
// multistart over line positions spread across the sample range is used.
DrudeLorentzFit fit_drude_lorentz(std::span<const PermittivitySample> samples, int n_lines,
                                  const std::optional<DrudeLorentzModel> &initial = std::nullopt);

struct Transition {
  double omega = 0.0;  // rad/s
  double dipole = 0.0; // C m
};

struct PolarizabilityModel {
  double J0 = 0.5;
  std::vector<Transition> transitions;

  // Ground-state indium, 5P_1/2.
  static PolarizabilityModel indium();
  void validate() const;
  std::vector<std::string> warnings() const;
  // transition with the largest static weight d^2/omega
  double dominant_frequency() const;
  double lowest_frequency() const;
};

// alpha(i xi) = 2 / (3 hbar (2 J0 + 1)) sum_k w_k d_k^2 / (w_k^2 + xi^2), C^2 m^2 / J.
// An empty transition list gives 0.
double polarizability(const PolarizabilityModel &model, double xi);

// z^3 |U(z)| for the non-retarded potential of an atom above a film of
// thickness d on a substrate, J m^3.
double effective_c3_layered(const DrudeLorentzModel &film, const DrudeLorentzModel &substrate,
                            const PolarizabilityModel &atom, double d, double z);

} // namespace cpspot
