#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cpspot/config.hpp"
#include "cpspot/constants.hpp"
#include "cpspot/cp_potential.hpp"
#include "cpspot/eikonal.hpp"
#include "cpspot/fresnel.hpp"
#include "cpspot/materials.hpp"
#include "cpspot/pipeline.hpp"

namespace py = pybind11;
using namespace cpspot;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Casimir-Polder potential of a dielectric sphere and the resulting Poisson spot";

  py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<BracketError>(m, "BracketError", PyExc_RuntimeError);
  py::register_exception<PipelineError>(m, "PipelineError", PyExc_RuntimeError);

  m.attr("constants_version") = std::string(constants::version);
  m.attr("atomic_mass") = constants::atomic_mass;

  // materials
  py::class_<Resonance>(m, "Resonance")
      .def(py::init<double, double, double>(), py::arg("plasma"), py::arg("transverse"), py::arg("damping"))
      .def_readwrite("plasma", &Resonance::plasma)
      .def_readwrite("transverse", &Resonance::transverse)
      .def_readwrite("damping", &Resonance::damping);
  py::class_<DrudeLorentzModel>(m, "DrudeLorentzModel")
      .def(py::init<>())
      .def(py::init([](std::vector<Resonance> r) { return DrudeLorentzModel{std::move(r)}; }))
      .def_readwrite("resonances", &DrudeLorentzModel::resonances)
      .def_static("silica", &DrudeLorentzModel::silica)
      .def("validate", &DrudeLorentzModel::validate);
  py::class_<Transition>(m, "Transition")
      .def(py::init<double, double>(), py::arg("omega"), py::arg("dipole"))
      .def_readwrite("omega", &Transition::omega)
      .def_readwrite("dipole", &Transition::dipole);
  py::class_<PolarizabilityModel>(m, "PolarizabilityModel")
      .def(py::init<>())
      .def_readwrite("J0", &PolarizabilityModel::J0)
      .def_readwrite("transitions", &PolarizabilityModel::transitions)
      .def_static("indium", &PolarizabilityModel::indium)
      .def("validate", &PolarizabilityModel::validate)
      .def("lowest_frequency", &PolarizabilityModel::lowest_frequency);
  m.def("permittivity", &permittivity, py::arg("model"), py::arg("xi"),
        "eps(i xi) of a Drude-Lorentz model");
  m.def("polarizability", &polarizability, py::arg("atom"), py::arg("xi"));
  m.def("c3_halfspace", &c3_halfspace, py::arg("sphere"), py::arg("atom"));

  // potential
  py::class_<SphereSystem>(m, "SphereSystem")
      .def(py::init([](double R, const DrudeLorentzModel &sphere, const PolarizabilityModel &atom, int l_max) {
             SphereSystem s;
             s.R = R;
             s.sphere = sphere;
             s.atom = atom;
             s.l_max = l_max;
             return s;
           }),
           py::arg("R"), py::arg("sphere") = DrudeLorentzModel::silica(),
           py::arg("atom") = PolarizabilityModel::indium(), py::arg("l_max") = 800)
      .def_readwrite("R", &SphereSystem::R)
      .def_readwrite("l_max", &SphereSystem::l_max)
      .def_readwrite("stitch_tol", &SphereSystem::stitch_tol)
      .def_readwrite("series_tol", &SphereSystem::series_tol)
      .def_readwrite("quad_tol", &SphereSystem::quad_tol);
  m.def("cp_potential_full", &cp_potential_full, py::arg("r"), py::arg("system"));
  m.def("cp_potential_nonretarded", &cp_potential_nonretarded, py::arg("r"), py::arg("system"));
  m.def("asymptotic_potentials", [](double r, const SphereSystem &s) {
    const auto a = asymptotic_potentials(r, s);
    return py::dict(py::arg("small_sphere") = a.small_sphere,
                    py::arg("small_sphere_nonretarded") = a.small_sphere_nonretarded,
                    py::arg("small_sphere_retarded") = a.small_sphere_retarded);
  });
  py::class_<PotentialCurve>(m, "PotentialCurve")
      .def_readonly("R", &PotentialCurve::R)
      .def_readonly("c3", &PotentialCurve::c3)
      .def_readonly("r_stitch", &PotentialCurve::r_stitch)
      .def_readonly("warnings", &PotentialCurve::warnings)
      .def_property_readonly("r", [](const PotentialCurve &c) {
        std::vector<double> v;
        for (const auto &p : c.points)
          v.push_back(p.r);
        return v;
      })
      .def_property_readonly("U", [](const PotentialCurve &c) {
        std::vector<double> v;
        for (const auto &p : c.points)
          v.push_back(p.U);
        return v;
      })
      .def("__call__", &PotentialCurve::operator());
  m.def("stitched_potential",
        [](const SphereSystem &s, const std::vector<double> &grid, int threads) {
          return stitched_potential(s, grid, threads);
        },
        py::arg("system"), py::arg("r_grid"), py::arg("threads") = 1);

  // eikonal
  py::class_<Beam>(m, "Beam")
      .def_static("from_speed", &Beam::from_speed, py::arg("mass"), py::arg("speed"))
      .def_readonly("mass", &Beam::mass)
      .def_readonly("speed", &Beam::speed)
      .def_readonly("wavelength", &Beam::wavelength);
  m.def("beam_from_temperature", &beam_from_temperature, py::arg("T_s"), py::arg("mass"));
  m.def("boltzmann_excited_fraction", &boltzmann_excited_fraction, py::arg("atom"), py::arg("T_s"));
  m.def("c52", &c52, py::arg("R"), py::arg("C3"), py::arg("beam"));
  m.def("capture_impact_parameter", &capture_impact_parameter, py::arg("R"), py::arg("C3"), py::arg("beam"));
  m.def("eikonal_phase_analytic", &eikonal_phase_analytic, py::arg("a"), py::arg("R"), py::arg("C3"),
        py::arg("beam"));
  py::class_<PhaseProfile>(m, "PhaseProfile")
      .def_static("power_law", &PhaseProfile::power_law, py::arg("R"), py::arg("C3"), py::arg("beam"))
      .def_readonly("C3", &PhaseProfile::C3)
      .def_readonly("C52", &PhaseProfile::C52)
      .def_readonly("R", &PhaseProfile::R)
      .def_readonly("R_i_CP", &PhaseProfile::R_i_CP)
      .def_readonly("R_o_CP", &PhaseProfile::R_o_CP)
      .def("scaled", &PhaseProfile::scaled)
      .def("__call__", &PhaseProfile::operator());
  m.def("tabulate_phase",
        [](const PotentialCurve &curve, const Beam &beam, const std::vector<double> &a_grid, int threads) {
          return tabulate_phase([&](double r) { return curve(r); }, curve.R, curve.c3, beam, a_grid, threads);
        },
        py::arg("curve"), py::arg("beam"), py::arg("a_grid"), py::arg("threads") = 1);

  // diffraction
  py::enum_<AnnulusRule>(m, "AnnulusRule")
      .value("Trapezoid", AnnulusRule::Trapezoid)
      .value("PhaseLinear", AnnulusRule::PhaseLinear)
      .value("GaussPanel", AnnulusRule::GaussPanel);
  py::class_<Scene>(m, "Scene")
      .def(py::init<>())
      .def_readwrite("R", &Scene::R)
      .def_readwrite("g", &Scene::g)
      .def_readwrite("b", &Scene::b)
      .def_readwrite("beam", &Scene::beam)
      .def_readwrite("phase", &Scene::phase)
      .def_readwrite("cp_enabled", &Scene::cp_enabled)
      .def_readwrite("source_diameter", &Scene::source_diameter)
      .def_readwrite("N_theta", &Scene::N_theta)
      .def_readwrite("cp_step", &Scene::cp_step)
      .def_readwrite("n_pixels_radial", &Scene::n_pixels_radial)
      .def_readwrite("annulus_rule", &Scene::annulus_rule)
      .def_readwrite("threads", &Scene::threads)
      .def("kappa", &Scene::kappa)
      .def("warnings", &Scene::warnings);
  py::class_<RadialProfile>(m, "RadialProfile")
      .def_readonly("rho", &RadialProfile::rho)
      .def_readonly("intensity", &RadialProfile::intensity)
      .def_readonly("b", &RadialProfile::b)
      .def_readonly("cp", &RadialProfile::cp)
      .def_readonly("convolved", &RadialProfile::convolved)
      .def_readonly("notes", &RadialProfile::notes)
      .def("__call__", &RadialProfile::operator());
  m.def("relative_intensity", &relative_intensity, py::arg("rho_P"), py::arg("scene"));
  m.def("radial_profile", &radial_profile, py::arg("scene"), py::call_guard<py::gil_scoped_release>());
  m.def("convolve_source", &convolve_source, py::arg("profile"), py::arg("scene"));
  m.def("fresnel_zone_width", &fresnel_zone_width, py::arg("scene"));

  // configuration and pipeline
  m.def("normalize_config", [](const std::string &text) { return serialize_config(parse_config(text)); },
        py::arg("text"), "parse config text and write it back with every key explicit");
  m.def("run_pipeline",
        [](const std::string &config_text, const std::string &last) {
          const Stage stage = last == "material"    ? Stage::Material
                              : last == "potential" ? Stage::Potential
                              : last == "phase"     ? Stage::Phase
                                                    : Stage::Diffraction;
          const auto cfg = parse_config(config_text);
          Manifest man;
          {
            py::gil_scoped_release release;
            man = run_pipeline(cfg, stage);
          }
          return man.to_json(serialize_config(cfg));
        },
        py::arg("config_text"), py::arg("last") = "diffraction",
        "run the pipeline; returns the manifest as JSON text");
}
