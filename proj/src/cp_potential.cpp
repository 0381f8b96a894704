#include "cpspot/cp_potential.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "cpspot/constants.hpp"
#include "cpspot/quadrature.hpp"
#include "cpspot/specfun.hpp"

namespace cpspot {

namespace {

constexpr double kSkipExponent = 750.0; // e^{-2 xi z / c} below ~1e-326
constexpr int kQuietRun = 10;

double frequency_scale(const SphereSystem &sys) {
  return sys.atom.transitions.empty() ? 1e15 : sys.atom.dominant_frequency();
}

void require_outside(double r, double R) {
  if (!(r > R) || !std::isfinite(r))
    throw GeometryError("atom must lie outside the sphere (r > R)");
}

// Rows needed for one frequency: sphere surface inside and outside, atom position.
struct FrequencyRows {
  double eps = 1.0;
  ScaledBesselRow outer; // x1 = xi R / c
  ScaledBesselRow inner; // x2 = x1 sqrt(eps)
};

FrequencyRows sphere_rows(double xi, const SphereSystem &sys, int l_max) {
  FrequencyRows rows;
  rows.eps = permittivity(sys.sphere, xi);
  const double x1 = xi * sys.R / constants::speed_of_light;
  rows.outer = modified_sph_bessel(l_max, x1);
  rows.inner = modified_sph_bessel(l_max, x1 * std::sqrt(rows.eps));
  return rows;
}

struct ModeFactors {
  double te;
  double tm;
};

// Ratios of Riccati log-derivatives; the Bessel magnitudes are factored out.
ModeFactors mode_factors(const FrequencyRows &rows, int l) {
  const double di1 = rows.outer.first_log_derivative(l);
  const double dk1 = rows.outer.third_log_derivative(l);
  const double di2 = rows.inner.first_log_derivative(l);
  const double eps = rows.eps;
  return {(di2 - di1) / (di2 - dk1), (eps * di1 - di2) / (di2 - eps * dk1)};
}

std::vector<double> terms_from_rows(const FrequencyRows &rows, const ScaledBesselRow &atom_row,
                                    const SphereSystem &sys) {
  const double x = atom_row.x;
  std::vector<double> terms(1, 0.0);
  terms.reserve(sys.l_max + 1);
  double partial = 0.0;
  int quiet = 0;
  for (int l = 1; l <= sys.l_max; ++l) {
    const ModeFactors f = mode_factors(rows, l);
    const ScaledReal k = atom_row.third(l);
    const double q = (rows.outer.first(l) * k * k / rows.outer.third(l)).value();
    const double dk = atom_row.third_log_derivative(l);
    const double ll = static_cast<double>(l) * (l + 1);
    const double term = (2.0 * l + 1.0) * q * (f.te + f.tm * (ll + dk * dk) / (x * x));
    terms.push_back(term);
    partial += term;
    if (sys.series_tol > 0.0) {
      quiet = std::abs(term) < sys.series_tol * std::abs(partial) ? quiet + 1 : 0;
      if (quiet >= kQuietRun)
        break;
    }
  }
  return terms;
}

double integrand_prefactor(double xi, const SphereSystem &sys) {
  return -constants::hbar * constants::mu0 /
         (8.0 * constants::pi * constants::pi * constants::speed_of_light) * xi * xi * xi *
         polarizability(sys.atom, xi);
}

} // namespace

void SphereSystem::validate() const {
  if (!(R > 0.0) || !std::isfinite(R))
    throw ConfigurationError("SphereSystem: radius must be positive");
  if (l_max < 1)
    throw ConfigurationError("SphereSystem: l_max must be >= 1");
  if (!(stitch_tol > 0.0 && stitch_tol <= 1.0))
    throw ConfigurationError("SphereSystem: stitch_tol must lie in (0, 1]");
  if (!(series_tol >= 0.0) || !(quad_tol > 0.0))
    throw ConfigurationError("SphereSystem: tolerances must be positive");
  sphere.validate();
  atom.validate();
}

MieCoefficients mie_coefficients(int l, double xi, const SphereSystem &sys) {
  if (l < 1)
    throw ConfigurationError("mie_coefficients: l must be >= 1");
  if (!(xi > 0.0))
    throw DomainError("mie_coefficients: xi must be positive");
  const auto rows = sphere_rows(xi, sys, l);
  const ModeFactors f = mode_factors(rows, l);
  const double ratio = (rows.outer.first(l) / rows.outer.third(l)).value();
  const double sign = (l % 2 == 0) ? 1.0 : -1.0;
  return {sign * ratio * f.te, -sign * ratio * f.tm};
}

std::vector<double> series_terms(double r, double xi, const SphereSystem &sys) {
  require_outside(r, sys.R);
  if (!(xi > 0.0))
    throw DomainError("series_terms: xi must be positive");
  if (sys.l_max > kBesselOrderCap)
    throw ConfigurationError("series_terms: l_max exceeds the Bessel order cap " +
                             std::to_string(kBesselOrderCap));
  const auto rows = sphere_rows(xi, sys, sys.l_max);
  const auto atom_row = modified_sph_bessel(sys.l_max, xi * r / constants::speed_of_light);
  return terms_from_rows(rows, atom_row, sys);
}

double potential_integrand(double r, double xi, const SphereSystem &sys) {
  require_outside(r, sys.R);
  if (!(xi >= 0.0))
    throw DomainError("potential_integrand: xi must be non-negative");
  if (xi == 0.0 || sys.atom.transitions.empty())
    return 0.0;
  if (2.0 * xi * (r - sys.R) / constants::speed_of_light > kSkipExponent)
    return 0.0;
  const auto terms = series_terms(r, xi, sys);
  double sum = 0.0;
  for (std::size_t l = 1; l < terms.size(); ++l)
    sum += terms[l];
  return integrand_prefactor(xi, sys) * sum;
}

double cp_potential_full(double r, const SphereSystem &sys) {
  require_outside(r, sys.R);
  sys.validate();
  if (sys.atom.transitions.empty())
    return 0.0;
  const auto q = integrate_semi_infinite(
      [&](double xi) { return potential_integrand(r, xi, sys); }, frequency_scale(sys),
      sys.quad_tol);
  if (!q.converged)
    throw ConvergenceError("cp_potential_full: frequency quadrature did not converge", q.value);
  return q.value;
}

double cp_potential_nonretarded(double r, const SphereSystem &sys) {
  require_outside(r, sys.R);
  sys.validate();
  if (sys.atom.transitions.empty())
    return 0.0;

  const double scale = frequency_scale(sys);
  const double ratio = sys.R / r;
  const double ratio2 = ratio * ratio;

  auto evaluate = [&](int n) {
    const auto rule = gauss_legendre(n);
    std::vector<double> w(n), alpha(n), eps(n);
    for (int i = 0; i < n; ++i) {
      const double t = 0.5 * (rule.nodes[i] + 1.0);
      const double xi = scale * t / (1.0 - t);
      w[i] = 0.5 * rule.weights[i] * scale / ((1.0 - t) * (1.0 - t));
      alpha[i] = polarizability(sys.atom, xi);
      eps[i] = permittivity(sys.sphere, xi);
    }
    double sum = 0.0;
    double geometric = ratio / (r * r * r); // R^{2l+1} / r^{2l+4} at l = 0
    int quiet = 0;
    for (int l = 1; l <= sys.l_max; ++l) {
      geometric *= ratio2;
      const double shift = static_cast<double>(l + 1) / l;
      double integral = 0.0;
      for (int i = 0; i < n; ++i)
        integral += w[i] * alpha[i] * (eps[i] - 1.0) / (eps[i] + shift);
      const double term = (2.0 * l + 1.0) * (l + 1.0) * geometric * integral;
      sum += term;
      if (sys.series_tol > 0.0) {
        quiet = std::abs(term) < sys.series_tol * std::abs(sum) ? quiet + 1 : 0;
        if (quiet >= kQuietRun)
          break;
      }
    }
    return sum;
  };

  double previous = evaluate(60);
  double current = previous;
  bool converged = false;
  for (int n = 120; n <= 1920; n *= 2) {
    current = evaluate(n);
    if (std::abs(current - previous) <= sys.quad_tol * std::abs(current)) {
      converged = true;
      break;
    }
    previous = current;
  }
  const double pref = -constants::hbar / (8.0 * constants::pi * constants::pi * constants::epsilon0);
  if (!converged)
    throw ConvergenceError("cp_potential_nonretarded: quadrature did not converge",
                           pref * current);
  return pref * current;
}

double c3_halfspace(const DrudeLorentzModel &sphere, const PolarizabilityModel &atom) {
  if (atom.transitions.empty())
    return 0.0;
  const auto q = integrate_semi_infinite(
      [&](double xi) {
        const double e = permittivity(sphere, xi);
        return polarizability(atom, xi) * (e - 1.0) / (e + 1.0);
      },
      atom.dominant_frequency(), 1e-10);
  if (!q.converged)
    throw ConvergenceError("c3_halfspace: quadrature did not converge", q.value);
  return constants::hbar / (16.0 * constants::pi * constants::pi * constants::epsilon0) * q.value;
}

AsymptoticPotentials asymptotic_potentials(double r, const SphereSystem &sys) {
  require_outside(r, sys.R);
  AsymptoticPotentials out;
  if (sys.atom.transitions.empty())
    return out;
  const double c = constants::speed_of_light;
  const double pref = constants::hbar / (constants::pi * constants::pi * constants::epsilon0);
  const double geom6 = std::pow(sys.R, 3) / std::pow(r, 6);
  const auto clausius = [&](double xi) {
    const double e = permittivity(sys.sphere, xi);
    return (e - 1.0) / (e + 2.0);
  };

  const double scale = std::min(sys.atom.dominant_frequency(), c / r);
  const auto us = integrate_semi_infinite(
      [&](double xi) {
        const double y = xi * r / c;
        const double poly = 3.0 + y * (6.0 + y * (5.0 + y * (2.0 + y)));
        return polarizability(sys.atom, xi) * clausius(xi) * std::exp(-2.0 * y) * poly;
      },
      scale, 1e-8);
  out.small_sphere = -pref / 4.0 * geom6 * us.value;

  const auto snr = integrate_semi_infinite(
      [&](double xi) { return polarizability(sys.atom, xi) * clausius(xi); },
      sys.atom.dominant_frequency(), 1e-10);
  out.small_sphere_nonretarded = -3.0 * pref / 4.0 * geom6 * snr.value;

  out.small_sphere_retarded = -23.0 * pref * c / 16.0 * geom6 / r *
                              polarizability(sys.atom, 0.0) * clausius(0.0);
  if (!us.converged || !snr.converged)
    throw ConvergenceError("asymptotic_potentials: quadrature did not converge", out.small_sphere);
  return out;
}

std::string to_string(PotentialMethod m) {
  return m == PotentialMethod::FullSeries ? "full" : "halfspace";
}

double PotentialCurve::operator()(double r) const {
  if (!(r > R))
    throw GeometryError("PotentialCurve: r must exceed the sphere radius");
  if (points.empty() || (r <= points.front().r && points.front().method == PotentialMethod::HalfSpace))
    return -c3 / std::pow(r - R, 3);
  if (points.size() == 1)
    return points.front().U * std::pow((points.front().r - R) / (r - R), 3);
  std::size_t hi = std::upper_bound(points.begin(), points.end(), r,
                                    [](double v, const PotentialPoint &p) { return v < p.r; }) -
                   points.begin();
  hi = std::clamp<std::size_t>(hi, 1, points.size() - 1);
  const auto &a = points[hi - 1];
  const auto &b = points[hi];
  const double la = std::log(a.r - R), lb = std::log(b.r - R);
  const double ua = std::log(-a.U), ub = std::log(-b.U);
  const double t = (std::log(r - R) - la) / (lb - la);
  return -std::exp(ua + t * (ub - ua));
}

void PotentialCurve::write(std::ostream &out) const {
  out << "# R " << std::setprecision(17) << R << "\n# C3 " << c3 << "\n# r_stitch " << r_stitch
      << '\n';
  for (const auto &w : warnings)
    out << "# warning: " << w << '\n';
  out << "# r[m] U[J] method\n";
  for (const auto &p : points)
    out << p.r << ' ' << p.U << ' ' << to_string(p.method) << '\n';
}

PotentialCurve stitched_potential(const SphereSystem &sys, std::span<const double> r_grid,
                                  int threads) {
  sys.validate();
  if (r_grid.empty())
    throw ConfigurationError("stitched_potential: empty grid");
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    require_outside(r_grid[i], sys.R);
    if (i > 0 && !(r_grid[i] > r_grid[i - 1]))
      throw ConfigurationError("stitched_potential: grid must be strictly increasing");
  }
  threads = std::max(1, threads);

  PotentialCurve curve;
  curve.R = sys.R;
  curve.c3 = c3_halfspace(sys.sphere, sys.atom);
  const std::size_t n = r_grid.size();
  curve.points.resize(n);
  const auto half_space = [&](double r) { return -curve.c3 / std::pow(r - sys.R, 3); };
  if (curve.c3 == 0.0) {
    curve.r_stitch = sys.R;
    for (std::size_t i = 0; i < n; ++i)
      curve.points[i] = {r_grid[i], 0.0, PotentialMethod::FullSeries};
    return curve;
  }

  std::size_t stitch = n; // index of r_stitch, n while not found
  std::size_t next = n;   // points [next, n) done
  std::vector<double> deviation(n, std::numeric_limits<double>::infinity());
  while (next > 0 && stitch == n) {
    const std::size_t batch = std::min<std::size_t>(threads, next);
    const std::size_t lo = next - batch;
    std::vector<double> values(batch);
    std::vector<std::exception_ptr> failures(batch);
    auto work = [&](std::size_t k) {
      try {
        values[k] = cp_potential_full(r_grid[lo + k], sys);
      } catch (...) {
        failures[k] = std::current_exception();
      }
    };
    if (batch == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t k = 0; k < batch; ++k)
        pool.emplace_back(work, k);
      for (auto &t : pool)
        t.join();
    }
    for (std::size_t k = batch; k-- > 0;) {
      if (failures[k])
        std::rethrow_exception(failures[k]);
      const std::size_t i = lo + k;
      deviation[i] = std::abs(values[k] / half_space(r_grid[i]) - 1.0);
      if (deviation[i] <= sys.stitch_tol) {
        stitch = i;
        break;
      }
      curve.points[i] = {r_grid[i], values[k], PotentialMethod::FullSeries};
    }
    next = lo;
  }

  if (stitch == n) {
    // band never entered: join where the series comes closest to the half-space
    stitch = std::min_element(deviation.begin(), deviation.end()) - deviation.begin();
    std::ostringstream msg;
    msg << "full series never within stitch_tol of -C3/z^3; joined at closest approach ("
        << 100.0 * deviation[stitch] << "% at z = " << r_grid[stitch] - sys.R << " m)";
    curve.warnings.push_back(msg.str());
  }
  {
    curve.r_stitch = r_grid[stitch];
    for (std::size_t i = 0; i <= stitch; ++i)
      curve.points[i] = {r_grid[i], half_space(r_grid[i]), PotentialMethod::HalfSpace};
  }
  return curve;
}

} // namespace cpspot
