#pragma once

#include <cmath>
#include <complex>

#include "cpspot/constants.hpp"
#include "cpspot/fresnel.hpp"
#include "cpspot/quadrature.hpp"

namespace cpspot::oracle {

// Plane integral on a grid centred on the sphere axis: A_free plus the
// disturbance (G - 1) e^{i kappa |rho - c|^2} inside R_o, disk blocked.
inline std::complex<double> babinet_amplitude(double rho_P, const Scene &s) {
  const double kappa = s.kappa();
  const double c = rho_P * s.g / (s.g + s.b);
  const double ri = s.phase.R_i_CP, ro = s.phase.R_o_CP, R = s.R;
  const int n_phi = 512;
  const auto gl = gauss_legendre(32);
  auto ring = [&](double r, std::complex<double> factor) {
    std::complex<double> acc = 0.0;
    for (int k = 0; k < n_phi; ++k) {
      const double phi = 2.0 * constants::pi * k / n_phi;
      const double d2 = r * r + c * c - 2.0 * r * c * std::cos(phi);
      acc += std::exp(std::complex<double>(0.0, kappa * d2));
    }
    return factor * acc * (2.0 * constants::pi / n_phi) * r;
  };
  std::complex<double> dist = 0.0;
  // blocked disk
  const int disk_panels = 16;
  for (int p = 0; p < disk_panels; ++p)
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double h = ri / disk_panels;
      const double r = (p + 0.5 + 0.5 * gl.nodes[q]) * h;
      dist += 0.5 * h * gl.weights[q] * ring(r, -1.0);
    }
  // annulus, panels uniform in log(r - R)
  const double t_hi = std::log((ro - R) / (ri - R));
  const int ann_panels = 24;
  for (int p = 0; p < ann_panels; ++p)
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double h = t_hi / ann_panels;
      const double t = (p + 0.5 + 0.5 * gl.nodes[q]) * h;
      const double a = (ri - R) * std::exp(t);
      const std::complex<double> g = std::exp(std::complex<double>(0.0, s.phase(a))) - 1.0;
      dist += 0.5 * h * gl.weights[q] * a * ring(R + a, g);
    }
  const double lambda = s.beam.wavelength;
  return free_amplitude(s) + std::complex<double>(0.0, -1.0) / (lambda * s.g * s.b) * dist;
}

} // namespace cpspot::oracle
