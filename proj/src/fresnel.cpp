#include "cpspot/fresnel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "cpspot/constants.hpp"
#include "cpspot/quadrature.hpp"

namespace cpspot {

using cplx = std::complex<double>;

namespace {

constexpr cplx kI(0.0, 1.0);

// int_0^1 e^{i d t} dt and int_0^1 t e^{i d t} dt
void phase_moments(double d, cplx &m0, cplx &m1) {
  if (std::abs(d) < 1e-3) {
    const double d2 = d * d;
    m0 = cplx(1.0 - d2 / 6.0, d / 2.0 - d2 * d / 24.0);
    m1 = cplx(0.5 - d2 / 8.0, d / 3.0 - d2 * d / 30.0);
    return;
  }
  const cplx e = std::exp(kI * d);
  const cplx id = kI * d;
  m0 = (e - 1.0) / id;
  m1 = e / id - (e - 1.0) / (id * id);
}

// Runs f on indices [0, n) with a static strided split over `threads` workers.
template <class F> void parallel_indices(std::size_t n, int threads, F &&f) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  std::vector<std::exception_ptr> failures(threads);
  auto work = [&](int t) {
    try {
      for (std::size_t i = t; i < n; i += threads)
        f(i);
    } catch (...) {
      failures[t] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back(work, t);
    for (auto &t : pool)
      t.join();
  }
  for (const auto &e : failures)
    if (e)
      std::rethrow_exception(e);
}

cplx annulus_interval(double lo, double hi, double cos_theta, double c0, const Scene &scene) {
  if (!(hi > lo))
    return 0.0;
  const double kappa = scene.kappa();
  const double R = scene.R;
  const auto phase = [&](double rho) {
    const double a = std::sqrt(std::max(rho * rho + c0 * c0 - 2.0 * rho * c0 * cos_theta, 0.0)) - R;
    if (!(a > 0.0))
      throw GeometryError("annulus point inside the sphere cross-section");
    return kappa * rho * rho + scene.phase(a);
  };
  const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / scene.cp_step - 1e-9)));
  const double h = (hi - lo) / n;
  cplx sum = 0.0;
  switch (scene.annulus_rule) {
  case AnnulusRule::Trapezoid:
    for (int k = 0; k <= n; ++k) {
      const double rho = k == n ? hi : lo + k * h;
      const double w = (k == 0 || k == n) ? 0.5 : 1.0;
      sum += w * rho * std::exp(kI * phase(rho));
    }
    return h * sum;
  case AnnulusRule::PhaseLinear: {
    double psi0 = phase(lo);
    for (int k = 0; k < n; ++k) {
      const double rho0 = lo + k * h;
      const double psi1 = phase(k + 1 == n ? hi : rho0 + h);
      cplx m0, m1;
      phase_moments(psi1 - psi0, m0, m1);
      sum += std::exp(kI * psi0) * (rho0 * m0 + h * m1);
      psi0 = psi1;
    }
    return h * sum;
  }
  case AnnulusRule::GaussPanel: {
    static const auto rule = gauss_legendre(6);
    for (int k = 0; k < n; ++k) {
      const double mid = lo + (k + 0.5) * h;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double rho = mid + 0.5 * h * rule.nodes[q];
        sum += rule.weights[q] * rho * std::exp(kI * phase(rho));
      }
    }
    return 0.5 * h * sum;
  }
  }
  return sum;
}

} // namespace

double Scene::kappa() const { return constants::pi / beam.wavelength * (1.0 / g + 1.0 / b); }

bool Scene::has_annulus() const {
  return cp_enabled && R > 0.0 && phase.C52 > 0.0 && phase.R_o_CP > phase.R_i_CP;
}

double Scene::blocked_radius() const { return has_annulus() ? phase.R_i_CP : R; }

void Scene::validate() const {
  beam.validate();
  if (!(g > 0.0) || !(b > 0.0))
    throw ConfigurationError("Scene: g and b must be positive");
  if (!(R >= 0.0))
    throw ConfigurationError("Scene: sphere radius must be non-negative");
  if (N_theta < 3)
    throw ConfigurationError("Scene: N_theta must be at least 3");
  if (!(cp_step > 0.0))
    throw ConfigurationError("Scene: cp_step must be positive");
  if (n_pixels_radial < 2)
    throw ConfigurationError("Scene: need at least two radial pixels");
  if (!(source_diameter >= 0.0))
    throw ConfigurationError("Scene: source diameter must be non-negative");
  if (has_annulus() && (std::abs(phase.R - R) > 1e-12 * R || !(phase.R_i_CP > R)))
    throw GeometryError("Scene: phase profile does not belong to this sphere");
}

std::vector<std::string> Scene::warnings() const {
  std::vector<std::string> out;
  if (R > 0.0 && beam.wavelength > 1e-2 * R)
    out.push_back("wavelength not small against the sphere radius; Fresnel regime doubtful");
  if (R > 1e-2 * std::min(g, b))
    out.push_back("sphere radius not small against g and b; Fresnel regime doubtful");
  return out;
}

double geometric_phase(double rho, const Scene &scene) { return scene.kappa() * rho * rho; }

RayInterval ray_intersections(double theta, double c0, double r_circle) {
  if (!(c0 >= 0.0))
    throw GeometryError("ray_intersections: c0 must be non-negative");
  RayInterval out;
  if (!(r_circle > 0.0))
    return out;
  const double ct = std::cos(theta), st = std::sin(theta);
  const double disc = r_circle * r_circle - c0 * c0 * st * st;
  if (disc <= 0.0)
    return out;
  const double root = std::sqrt(disc);
  const double hi = c0 * ct + root;
  if (!(hi > 0.0))
    return out;
  out.hit = true;
  out.exit = hi;
  if (c0 < r_circle) {
    out.origin_inside = true;
    out.entry = 0.0;
  } else {
    // product of roots is c0^2 - r^2 >= 0; avoids cancellation in c0 ct - root
    out.entry = std::max(0.0, (c0 * c0 - r_circle * r_circle) / hi);
  }
  return out;
}

std::complex<double> free_segment_amplitude(double rho_start, const Scene &scene) {
  if (!(rho_start >= 0.0))
    throw DomainError("free_segment_amplitude: start must be non-negative");
  const double kappa = scene.kappa();
  return -std::exp(kI * (kappa * rho_start * rho_start)) / (2.0 * kI * kappa);
}

std::complex<double> free_segment_amplitude(double rho_start, double rho_end, const Scene &scene) {
  if (!(rho_start >= 0.0) || !(rho_end >= rho_start))
    throw DomainError("free_segment_amplitude: need 0 <= start <= end");
  const double kappa = scene.kappa();
  return (std::exp(kI * (kappa * rho_end * rho_end)) -
          std::exp(kI * (kappa * rho_start * rho_start))) /
         (2.0 * kI * kappa);
}

std::complex<double> cp_segment_amplitude(double theta, double c0, const Scene &scene) {
  if (!scene.has_annulus())
    return 0.0;
  const auto outer = ray_intersections(theta, c0, scene.phase.R_o_CP);
  if (!outer.hit)
    return 0.0;
  const auto inner = ray_intersections(theta, c0, scene.phase.R_i_CP);
  const double ct = std::cos(theta);
  if (!inner.hit)
    return annulus_interval(outer.entry, outer.exit, ct, c0, scene);
  cplx sum = 0.0;
  if (!inner.origin_inside)
    sum += annulus_interval(outer.entry, inner.entry, ct, c0, scene);
  sum += annulus_interval(inner.exit, outer.exit, ct, c0, scene);
  return sum;
}

std::complex<double> ray_amplitude(double theta, double c0, const Scene &scene) {
  if (scene.R == 0.0)
    return free_segment_amplitude(0.0, scene);
  const double edge = scene.has_annulus() ? scene.phase.R_o_CP : scene.R;
  const auto cut = ray_intersections(theta, c0, edge);
  if (!cut.hit)
    return free_segment_amplitude(0.0, scene);
  cplx sum = free_segment_amplitude(cut.exit, scene);
  if (!cut.origin_inside)
    sum += free_segment_amplitude(0.0, cut.entry, scene);
  sum += cp_segment_amplitude(theta, c0, scene);
  return sum;
}

std::complex<double> point_amplitude(double rho_P, const Scene &scene) {
  if (!(rho_P >= 0.0))
    throw DomainError("point_amplitude: rho_P must be non-negative");
  const double c0 = rho_P * scene.g / (scene.g + scene.b);
  const int N = scene.N_theta;
  // rays at theta and -theta see the same geometry
  cplx sum = ray_amplitude(0.0, c0, scene);
  for (int k = 1; 2 * k < N; ++k)
    sum += 2.0 * ray_amplitude(2.0 * constants::pi * k / N, c0, scene);
  if (N % 2 == 0)
    sum += ray_amplitude(constants::pi, c0, scene);
  const double lambda = scene.beam.wavelength;
  return -kI / (lambda * scene.g * scene.b) * (2.0 * constants::pi / N) * sum;
}

std::complex<double> free_amplitude(const Scene &scene) {
  const double lambda = scene.beam.wavelength;
  return -kI / (lambda * scene.g * scene.b) * (2.0 * constants::pi) *
         free_segment_amplitude(0.0, scene);
}

double relative_intensity(double rho_P, const Scene &scene) {
  return std::norm(point_amplitude(rho_P, scene)) / std::norm(free_amplitude(scene));
}

double RadialProfile::operator()(double r) const {
  if (rho.empty())
    throw ConfigurationError("RadialProfile: empty profile");
  if (r <= rho.front())
    return intensity.front();
  if (r >= rho.back())
    return intensity.back();
  const std::size_t hi = std::upper_bound(rho.begin(), rho.end(), r) - rho.begin();
  const double t = (r - rho[hi - 1]) / (rho[hi] - rho[hi - 1]);
  return intensity[hi - 1] + t * (intensity[hi] - intensity[hi - 1]);
}

void RadialProfile::write(std::ostream &out) const {
  out << std::setprecision(17) << "# b " << b << "\n# R " << R << "\n# cp " << (cp ? "on" : "off")
      << "\n# corridor_factor " << corridor_factor << "\n# convolved " << (convolved ? "yes" : "no")
      << "\n# source_diameter " << source_diameter << '\n';
  for (const auto &n : notes)
    out << "# note: " << n << '\n';
  out << "# rho[m] I_rel\n";
  for (std::size_t i = 0; i < rho.size(); ++i)
    out << rho[i] << ' ' << intensity[i] << '\n';
}

RadialProfile radial_profile(const Scene &scene) {
  scene.validate();
  const int n = scene.n_pixels_radial;
  RadialProfile p;
  p.b = scene.b;
  p.R = scene.R;
  p.cp = scene.has_annulus();
  p.notes = scene.warnings();
  p.rho.resize(n);
  p.intensity.resize(n);
  // an obstacle-free scene still needs a radial extent
  const double extent = scene.R > 0.0 ? scene.R : 1e-6;
  for (int j = 0; j < n; ++j)
    p.rho[j] = extent * j / (n - 1);
  const double free_norm = std::norm(free_amplitude(scene));
  parallel_indices(n, scene.threads, [&](std::size_t j) {
    p.intensity[j] = std::norm(point_amplitude(p.rho[j], scene)) / free_norm;
  });
  return p;
}

RadialProfile convolve_source(const RadialProfile &profile, const Scene &scene) {
  if (profile.convolved)
    throw ConfigurationError("convolve_source: profile is already convolved");
  if (profile.rho.size() < 2)
    throw ConfigurationError("convolve_source: profile needs at least two samples");
  RadialProfile out = profile;
  out.convolved = true;
  out.source_diameter = scene.source_diameter;
  const double radius = 0.5 * scene.source_diameter * scene.b / scene.g;
  const double pitch = profile.rho[1] - profile.rho[0];
  if (2.0 * radius < pitch) {
    out.notes.push_back("source image narrower than the sample pitch; profile left unconvolved");
    return out;
  }
  constexpr int kRadial = 32;
  constexpr int kAngular = 64;
  const auto rule = gauss_legendre(kRadial);
  std::vector<double> u(kRadial), w(kRadial);
  for (int k = 0; k < kRadial; ++k) {
    u[k] = 0.5 * radius * (rule.nodes[k] + 1.0);
    w[k] = 0.5 * radius * rule.weights[k] * u[k];
  }
  std::vector<double> ct(kAngular), st(kAngular);
  for (int m = 0; m < kAngular; ++m) {
    ct[m] = std::cos(2.0 * constants::pi * (m + 0.5) / kAngular);
    st[m] = std::sin(2.0 * constants::pi * (m + 0.5) / kAngular);
  }
  const double norm = 2.0 * constants::pi / kAngular / (constants::pi * radius * radius);
  for (std::size_t j = 0; j < profile.rho.size(); ++j) {
    const double r = profile.rho[j];
    double sum = 0.0;
    for (int k = 0; k < kRadial; ++k) {
      double ring = 0.0;
      for (int m = 0; m < kAngular; ++m) {
        const double x = r + u[k] * ct[m];
        const double y = u[k] * st[m];
        ring += profile(std::sqrt(x * x + y * y));
      }
      sum += w[k] * ring;
    }
    out.intensity[j] = sum * norm;
  }
  if (radius > 0.0 && profile.rho.back() - 2.0 * radius < profile.rho.front())
    out.notes.push_back("source image comparable to the profile extent; edge samples clamped");
  out.notes.push_back("uniform source disk of radius " + std::to_string(radius) +
                      " m; samples beyond the profile clamped to the last value");
  return out;
}

void DiffractionImage::write_pgm(const std::filesystem::path &path) const {
  const double scale = pixels.empty() ? 1.0 : std::max(*std::max_element(pixels.begin(), pixels.end()), 1e-300);
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ConfigurationError("cannot write image " + path.string());
  out << "P5\n" << n << ' ' << n << "\n65535\n";
  for (double v : pixels) {
    const auto g = static_cast<unsigned>(std::lround(std::clamp(v / scale, 0.0, 1.0) * 65535.0));
    const char bytes[2] = {static_cast<char>((g >> 8) & 0xff), static_cast<char>(g & 0xff)};
    out.write(bytes, 2);
  }
  std::ofstream side(path.string() + ".txt");
  if (!side)
    throw ConfigurationError("cannot write image sidecar for " + path.string());
  side << std::setprecision(17) << "format P5 16-bit big-endian row-major\n"
       << "size " << n << "\npitch_m " << pitch << "\ncentre_pixel_offset 0.5\n"
       << "profile_radius_m " << R << "\nscale_I_rel " << scale
       << "\ngray = round(65535 * I_rel / scale)\n"
       << "pixels beyond profile_radius take the profile value at profile_radius\n";
}

DiffractionImage assemble_image(const RadialProfile &profile, int n) {
  if (n < 1)
    throw ConfigurationError("assemble_image: n must be positive");
  if (profile.rho.empty())
    throw ConfigurationError("assemble_image: empty profile");
  DiffractionImage img;
  img.n = n;
  img.R = profile.rho.back();
  img.pitch = 2.0 * img.R / n;
  img.pixels.resize(static_cast<std::size_t>(n) * n);
  std::vector<double> coord(n);
  for (int k = 0; k < n; ++k)
    coord[k] = ((k + 0.5) - 0.5 * n) * img.pitch;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      img.pixels[static_cast<std::size_t>(i) * n + j] =
          profile(std::sqrt(coord[i] * coord[i] + coord[j] * coord[j]));
  return img;
}

std::vector<BScanEntry> b_scan(const Scene &scene, std::span<const double> b_values) {
  std::vector<BScanEntry> out;
  out.reserve(b_values.size());
  for (double b : b_values) {
    if (!(b > 0.0))
      throw ConfigurationError("b_scan: image distances must be positive");
    Scene s = scene;
    s.b = b;
    BScanEntry e;
    e.b = b;
    s.cp_enabled = true;
    e.with_cp = radial_profile(s);
    s.cp_enabled = false;
    e.without_cp = radial_profile(s);
    if (scene.source_diameter > 0.0) {
      e.with_cp = convolve_source(e.with_cp, s);
      e.without_cp = convolve_source(e.without_cp, s);
    }
    out.push_back(std::move(e));
  }
  return out;
}

double fresnel_zone_width(const Scene &scene) {
  const double q = scene.beam.wavelength * scene.g * scene.b / (scene.g + scene.b);
  return q / (std::sqrt(scene.R * scene.R + q) + scene.R);
}

} // namespace cpspot
