#include "cpspot/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "cpspot/constants.hpp"
#include "cpspot/cp_potential.hpp"
#include "cpspot/error.hpp"
#include "cpspot/fresnel.hpp"

namespace cpspot {

Beam beam_from_temperature(double T_s, double mass) {
  if (!(T_s > 0.0))
    throw ConfigurationError("beam_from_temperature: temperature must be positive");
  if (!(mass > 0.0))
    throw ConfigurationError("beam_from_temperature: mass must be positive");
  return Beam::from_speed(mass, std::sqrt(8.0 * constants::boltzmann * T_s / (constants::pi * mass)));
}

double boltzmann_excited_fraction(const PolarizabilityModel &atom, double T_s) {
  if (atom.transitions.empty())
    throw ConfigurationError("boltzmann_excited_fraction: atom has no transitions");
  if (!(T_s >= 0.0))
    throw ConfigurationError("boltzmann_excited_fraction: temperature must be non-negative");
  const double w = atom.lowest_frequency();
  if (T_s == 0.0)
    return w > 0.0 ? 0.0 : 1.0;
  return std::exp(-constants::hbar * w / (constants::boltzmann * T_s));
}

Beam beam_from_config(const RunConfig &config) {
  if (config.temperature)
    return beam_from_temperature(*config.temperature, config.mass);
  return Beam::from_speed(config.mass, config.speed.value());
}

std::string fnv1a_hex(const std::string &bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fnv1a_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigurationError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return fnv1a_hex(s.str());
}

std::string Manifest::to_json(const std::string &config_text) const {
  nlohmann::ordered_json j;
  j["tool"] = "cpspot";
  j["status"] = status;
  if (!error.empty())
    j["error"] = error;
  j["config_hash"] = config_hash;
  j["constants"] = constants_version;
  j["config"] = config_text;
  j["results"] = {{"C3_J_m3", C3}, {"C52_m52", C52}, {"R_i_CP_m", R_i_CP}, {"R_o_CP_m", R_o_CP}};
  if (excited_fraction >= 0.0)
    j["results"]["excited_fraction"] = excited_fraction;
  auto &st = j["stages"] = nlohmann::ordered_json::array();
  for (const auto &s : stages)
    st.push_back({{"name", s.name}, {"status", s.status}, {"seconds", s.seconds}});
  auto &out = j["outputs"] = nlohmann::ordered_json::array();
  for (const auto &o : outputs)
    out.push_back({{"path", o.path.generic_string()}, {"fnv1a64", o.hash}, {"bytes", o.bytes}});
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return out;
}

AnnulusRule rule_from_name(const std::string &name) {
  if (name == "phase_linear")
    return AnnulusRule::PhaseLinear;
  if (name == "gauss")
    return AnnulusRule::GaussPanel;
  return AnnulusRule::Trapezoid;
}

std::string label(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << v;
  return s.str();
}

std::string index_label(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return buf;
}

class Run {
public:
  explicit Run(const RunConfig &c) : cfg(c), config_text(serialize_config(c)) {
    manifest.config_hash = fnv1a_hex(config_text);
    manifest.constants_version = std::string(constants::version);
  }

  template <class F> void stage(const std::string &name, bool active, F &&f) {
    StageRecord rec{name, 0.0, active ? "ok" : "skipped"};
    if (!active) {
      manifest.stages.push_back(rec);
      return;
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
      f();
    } catch (const std::exception &e) {
      rec.status = "failed";
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      manifest.stages.push_back(rec);
      manifest.status = "failed";
      manifest.error = name + ": " + e.what();
      try {
        write_manifest();
      } catch (...) {
      }
      throw PipelineError(name, e.what(), manifest);
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest.stages.push_back(rec);
  }

  template <class F> void emit(const std::string &name, F &&writer) {
    const auto path = cfg.out_dir / name;
    {
      std::ofstream out(path);
      if (!out)
        throw ConfigurationError("cannot write " + path.string());
      out << std::setprecision(17);
      writer(out);
    }
    record(path);
  }

  void record(const std::filesystem::path &path) {
    manifest.outputs.push_back(
        {path.lexically_relative(cfg.out_dir), fnv1a_file(path), std::filesystem::file_size(path)});
  }

  void write_manifest() const {
    std::ofstream out(cfg.out_dir / "manifest.json");
    out << manifest.to_json(config_text);
  }

  const RunConfig &cfg;
  std::string config_text;
  Manifest manifest;
};

} // namespace

Manifest run_pipeline(const RunConfig &config, Stage last) {
  config.validate();
  std::filesystem::create_directories(config.out_dir);
  Run run(config);
  auto &m = run.manifest;
  const Beam beam = beam_from_config(config);
  const bool has_sphere = config.R > 0.0;

  DrudeLorentzModel sphere = config.sphere;
  run.stage("materials", true, [&] {
    if (!config.optical_data.empty()) {
      const auto table = OpticalDataTable::read(config.optical_data);
      const double lo = table.rows.front().omega, hi = table.rows.back().omega;
      std::vector<PermittivitySample> samples;
      for (double xi : log_grid(lo, hi, 40)) {
        const auto kk = kramers_kronig_imag_axis(table, xi);
        if (samples.empty())
          for (const auto &w : kk.warnings)
            m.warnings.push_back("optical data: " + w);
        samples.push_back({xi, kk.value});
      }
      const auto fit = fit_drude_lorentz(samples, 2);
      sphere = fit.model;
      run.emit("material_fit.txt", [&](std::ostream &o) {
        o << "# source " << config.optical_data.string() << "\n# residual_norm " << fit.residual_norm
          << "\n# plasma[rad/s] transverse[rad/s] damping[rad/s] rel_unc_plasma rel_unc_transverse rel_unc_damping\n";
        for (std::size_t i = 0; i < fit.model.resonances.size(); ++i) {
          const auto &r = fit.model.resonances[i];
          const auto &u = fit.relative_uncertainty[i];
          o << r.plasma << ' ' << r.transverse << ' ' << r.damping << ' ' << u.plasma << ' '
            << u.transverse << ' ' << u.damping << '\n';
        }
      });
    }
    for (const auto &w : config.atom.warnings())
      m.warnings.push_back("atom: " + w);
    m.C3 = c3_halfspace(sphere, config.atom);
    if (config.temperature)
      m.excited_fraction = boltzmann_excited_fraction(config.atom, *config.temperature);
    run.emit("material.txt", [&](std::ostream &o) {
      o << "# C3[J m^3] " << m.C3 << '\n';
      for (const auto &r : sphere.resonances)
        o << "# resonance " << r.plasma << ' ' << r.transverse << ' ' << r.damping << '\n';
      o << "# xi[rad/s] eps(i xi) alpha(i xi)[C^2 m^2/J]\n";
      for (double xi : log_grid(1e11, 1e18, 71))
        o << xi << ' ' << permittivity(sphere, xi) << ' ' << polarizability(config.atom, xi) << '\n';
    });
  });

  PotentialCurve curve;
  run.stage("potential", has_sphere && last >= Stage::Potential && config.phase_model == "full", [&] {
    SphereSystem sys;
    sys.R = config.R;
    sys.sphere = sphere;
    sys.atom = config.atom;
    sys.l_max = config.l_max;
    sys.stitch_tol = config.stitch_tol;
    std::vector<double> grid;
    for (double z : log_grid(config.z_min, config.z_max, config.potential_points))
      grid.push_back(config.R + z);
    curve = stitched_potential(sys, grid, config.threads);
    for (const auto &w : curve.warnings)
      m.warnings.push_back("potential: " + w);
    run.emit("potential.txt", [&](std::ostream &o) { curve.write(o); });
  });

  PhaseProfile phase;
  run.stage("phase", has_sphere && last >= Stage::Phase, [&] {
    if (config.phase_model == "full") {
      const auto U = [&](double r) { return curve(r); };
      phase = tabulate_phase(U, config.R, m.C3, beam, log_grid(0.3e-9, 1e-6, 48), config.threads);
    } else {
      phase = PhaseProfile::power_law(config.R, m.C3, beam);
    }
    m.C52 = phase.C52;
    m.R_i_CP = phase.R_i_CP;
    m.R_o_CP = phase.R_o_CP;
    run.emit("phase.txt", [&](std::ostream &o) { phase.write(o, 0.3e-9, 1e-6, 48); });
  });

  run.stage("diffraction", last >= Stage::Diffraction, [&] {
    std::vector<double> factors{1.0};
    if (config.corridor)
      factors = {0.8, 1.0, 1.8};
    const bool cp = config.cp && has_sphere;
    std::ostringstream onaxis;
    onaxis << std::setprecision(17) << "# b[m] I_rel(0) no_cp";
    if (cp)
      for (double f : factors)
        onaxis << " cp_x" << label(f);
    onaxis << '\n';
    for (std::size_t i = 0; i < config.b_values.size(); ++i) {
      Scene s;
      s.R = config.R;
      s.g = config.g;
      s.b = config.b_values[i];
      s.beam = beam;
      s.source_diameter = config.source_diameter;
      s.N_theta = config.N_theta;
      s.cp_step = config.cp_step;
      s.n_pixels_radial = config.pixels;
      s.annulus_rule = rule_from_name(config.annulus_rule);
      s.threads = config.threads;
      const std::string tag = "b" + index_label(i);
      auto finish = [&](RadialProfile p, double factor, const std::string &name) {
        p.corridor_factor = factor;
        if (config.source_diameter > 0.0)
          p = convolve_source(p, s);
        run.emit(name + ".txt", [&](std::ostream &o) { p.write(o); });
        if (config.images && factor == 1.0) {
          const auto path = config.out_dir / (name + ".pgm");
          assemble_image(p, config.image_size).write_pgm(path);
          run.record(path);
          run.record(path.string() + ".txt");
        }
        return p.intensity.front();
      };
      s.cp_enabled = false;
      onaxis << s.b << ' ' << finish(radial_profile(s), 1.0, "profile_" + tag + "_nocp");
      if (cp) {
        s.cp_enabled = true;
        for (double f : factors) {
          s.phase = f == 1.0 ? phase : phase.scaled(f);
          onaxis << ' ' << finish(radial_profile(s), f, "profile_" + tag + "_cp_x" + label(f));
        }
      }
      onaxis << '\n';
    }
    run.emit("onaxis.txt", [&](std::ostream &o) { o << onaxis.str(); });
  });

  run.write_manifest();
  return m;
}

} // namespace cpspot
