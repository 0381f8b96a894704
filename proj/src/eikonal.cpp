#include "cpspot/eikonal.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <thread>

#include <boost/math/tools/minima.hpp>

#include "cpspot/constants.hpp"

namespace cpspot {

Beam Beam::from_speed(double mass, double speed) {
  Beam b{mass, speed, constants::planck / (mass * speed)};
  b.validate();
  return b;
}

void Beam::validate() const {
  if (!(mass > 0.0) || !(speed > 0.0) || !(wavelength > 0.0) || !std::isfinite(mass) ||
      !std::isfinite(speed) || !std::isfinite(wavelength))
    throw ConfigurationError("Beam: mass, speed and wavelength must be positive");
}

double wkb_validity(const std::function<double(double)> &U, const Beam &beam, double x) {
  beam.validate();
  const double E = beam.kinetic_energy();
  const auto momentum = [&](double at) {
    const double excess = E - U(at);
    if (!(excess > 0.0))
      throw DomainError("wkb_validity: classical turning point (E <= U)");
    return std::sqrt(2.0 * beam.mass * excess);
  };
  const double p = momentum(x);
  const double h = x != 0.0 ? 1e-4 * std::abs(x) : 1e-12;
  const double dp = (momentum(x + h) - momentum(x - h)) / (2.0 * h);
  return std::abs(dp) / (p * p / constants::hbar);
}

double eikonal_phase_numeric(const std::function<double(double, double)> &U, double a, double R,
                             const Beam &beam) {
  if (!(a > 0.0))
    throw GeometryError("eikonal_phase_numeric: grazing distance must be positive");
  beam.validate();
  const double rho = a + R;
  // x = L sinh(u) resolves the peak width sqrt(a (2R + a)) and the algebraic tails
  const double L = std::max(std::sqrt(a * (2.0 * R + a)), a);
  const auto g = [&](double u) { return U(L * std::sinh(u), rho) * L * std::cosh(u); };

  // extent: integrand at both ends below 1e-14 of its largest value
  constexpr double kTail = 1e-14;
  constexpr double kUMax = 45.0;
  double peak = std::abs(g(0.0));
  double lo = 0.0, hi = 0.0;
  auto extend = [&](double dir) {
    double u = 0.0;
    int quiet = 0;
    while (quiet < 2) {
      u += dir;
      if (std::abs(u) > kUMax)
        throw ConvergenceError("eikonal_phase_numeric: potential tail does not decay", 0.0);
      const double v = std::abs(g(u));
      peak = std::max(peak, v);
      quiet = v <= kTail * peak ? quiet + 1 : 0;
    }
    return u;
  };
  hi = extend(1.0);
  lo = extend(-1.0);
  if (peak == 0.0)
    return 0.0;

  double h = 0.25;
  int n = static_cast<int>(std::round((hi - lo) / h));
  double sum = 0.0;
  for (int k = 0; k <= n; ++k)
    sum += (k == 0 || k == n ? 0.5 : 1.0) * g(lo + k * h);
  double estimate = h * sum;
  for (int level = 0; level < 16; ++level) {
    double mid = 0.0;
    for (int k = 0; k < n; ++k)
      mid += g(lo + (k + 0.5) * h);
    sum += mid;
    n *= 2;
    h *= 0.5;
    const double refined = h * sum;
    const bool done = std::abs(refined - estimate) <= 1e-9 * std::abs(refined);
    estimate = refined;
    if (done)
      return -estimate / (constants::hbar * beam.speed);
  }
  throw ConvergenceError("eikonal_phase_numeric: trapezoid refinement did not converge",
                         -estimate / (constants::hbar * beam.speed));
}

double eikonal_phase_analytic(double a, double R, double C3, const Beam &beam) {
  if (!(a > 0.0))
    throw GeometryError("eikonal_phase_analytic: grazing distance must be positive");
  beam.validate();
  const double s = std::sqrt(a * (2.0 * R + a));
  const double brace = 6.0 * R * R + 8.0 * R * a + 4.0 * a * a +
                       3.0 * R * (R + a) * (R + a) / s *
                           (2.0 * std::atan(R / s) + constants::pi);
  return C3 / (2.0 * constants::hbar * beam.speed) * brace /
         (a * a * (2.0 * R + a) * (2.0 * R + a));
}

double c52(double R, double C3, const Beam &beam) {
  if (!(R > 0.0))
    throw ConfigurationError("c52: sphere radius must be positive");
  beam.validate();
  return C3 / (2.0 * constants::hbar * beam.speed) * 3.0 * constants::pi * std::sqrt(R) /
         (2.0 * std::sqrt(2.0));
}

AnnulusRadii annulus_radii(double C52, double R, double phi_hi, double phi_lo) {
  if (!(phi_hi > phi_lo && phi_lo > 0.0))
    throw ConfigurationError("annulus_radii: need phi_hi > phi_lo > 0");
  return {R + std::pow(C52 / phi_hi, 0.4), R + std::pow(C52 / phi_lo, 0.4)};
}

double capture_impact_parameter(double R, double C3, const Beam &beam) {
  if (!(R > 0.0))
    throw ConfigurationError("capture_impact_parameter: sphere radius must be positive");
  if (!(C3 >= 0.0))
    throw ConfigurationError("capture_impact_parameter: C3 must be non-negative");
  beam.validate();
  if (C3 == 0.0)
    return 0.0;
  const double E = beam.kinetic_energy();
  // b^2 reaching centre distance s: s^2 (1 - U(s)/E); captured below its minimum.
  // Written as the excess over R^2 to avoid cancellation.
  const auto excess = [&](double log_z) {
    const double z = std::exp(log_z);
    const double s = R + z;
    return s * s * C3 / (E * z * z * z) + 2.0 * R * z + z * z;
  };
  const double lo = std::log(1e-13), hi = std::log(1e-7);
  const auto [log_z, f] = boost::math::tools::brent_find_minima(excess, lo, hi, 50);
  if (log_z - lo < 1e-3 || hi - log_z < 1e-3)
    throw BracketError("capture_impact_parameter: barrier maximum outside the search bracket");
  return f / (std::sqrt(R * R + f) + R);
}

PhaseProfile PhaseProfile::power_law(double R, double C3, const Beam &beam) {
  PhaseProfile p;
  p.R = R;
  p.C3 = C3;
  p.C52 = c52(R, C3, beam);
  if (C3 > 0.0) {
    const auto radii = annulus_radii(p.C52, R);
    p.R_i_CP = radii.inner;
    p.R_o_CP = radii.outer;
  } else {
    p.R_i_CP = p.R_o_CP = R;
  }
  return p;
}

PhaseProfile PhaseProfile::tabulated(double R, double C3, const Beam &beam,
                                     std::vector<PhaseSample> samples) {
  if (samples.size() < 2)
    throw ConfigurationError("PhaseProfile: a table needs at least two samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i].a > 0.0) || !(samples[i].phi > 0.0))
      throw ConfigurationError("PhaseProfile: samples need a > 0 and phi > 0");
    if (i > 0 && (!(samples[i].a > samples[i - 1].a) || !(samples[i].phi < samples[i - 1].phi)))
      throw ConfigurationError("PhaseProfile: phase must decrease strictly with a");
  }
  auto p = power_law(R, C3, beam);
  p.samples = std::move(samples);
  return p;
}

double PhaseProfile::operator()(double a) const {
  if (!(a > 0.0))
    throw GeometryError("PhaseProfile: grazing distance must be positive");
  if (samples.empty())
    return C52 == 0.0 ? 0.0 : C52 / (a * a * std::sqrt(a));
  std::size_t hi = std::upper_bound(samples.begin(), samples.end(), a,
                                    [](double v, const PhaseSample &s) { return v < s.a; }) -
                   samples.begin();
  hi = std::clamp<std::size_t>(hi, 1, samples.size() - 1);
  const auto &l = samples[hi - 1];
  const auto &r = samples[hi];
  const double t = std::log(a / l.a) / std::log(r.a / l.a);
  return l.phi * std::exp(t * std::log(r.phi / l.phi));
}

PhaseProfile PhaseProfile::scaled(double factor) const {
  if (!(factor >= 0.0))
    throw ConfigurationError("PhaseProfile: scale factor must be non-negative");
  PhaseProfile p = *this;
  p.C3 *= factor;
  p.C52 *= factor;
  for (auto &s : p.samples)
    s.phi *= factor;
  if (factor == 0.0) {
    p.samples.clear();
    p.R_i_CP = p.R_o_CP = R;
  } else {
    const auto radii = annulus_radii(p.C52, R);
    p.R_i_CP = radii.inner;
    p.R_o_CP = radii.outer;
  }
  return p;
}

void PhaseProfile::write(std::ostream &out, double a_lo, double a_hi, int n) const {
  out << std::setprecision(17) << "# C3 " << C3 << "\n# C52 " << C52 << "\n# R " << R
      << "\n# R_i_CP " << R_i_CP << "\n# R_o_CP " << R_o_CP << "\n# a[m] dphi[rad]\n";
  if (!samples.empty()) {
    for (const auto &s : samples)
      out << s.a << ' ' << s.phi << '\n';
    return;
  }
  for (int i = 0; i < n; ++i) {
    const double a = a_lo * std::pow(a_hi / a_lo, n > 1 ? static_cast<double>(i) / (n - 1) : 0.0);
    out << a << ' ' << (*this)(a) << '\n';
  }
}

PhaseProfile tabulate_phase(const std::function<double(double)> &U_of_r, double R, double C3,
                            const Beam &beam, const std::vector<double> &a_grid, int threads) {
  std::vector<PhaseSample> samples(a_grid.size());
  const auto lateral = [&](double x, double rho) { return U_of_r(std::hypot(x, rho)); };
  std::vector<std::exception_ptr> failures(a_grid.size());
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < a_grid.size(); i += step) {
      try {
        samples[i] = {a_grid[i], eikonal_phase_numeric(lateral, a_grid[i], R, beam)};
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  threads = std::max(1, threads);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back(work, static_cast<std::size_t>(t), static_cast<std::size_t>(threads));
    for (auto &t : pool)
      t.join();
  }
  for (const auto &f : failures)
    if (f)
      std::rethrow_exception(f);
  return PhaseProfile::tabulated(R, C3, beam, std::move(samples));
}

} // namespace cpspot
