#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cpspot/config.hpp"
#include "cpspot/error.hpp"
#include "cpspot/pipeline.hpp"

using namespace cpspot;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::vector<std::string> sets;
  double radius = -1.0;
  double b = -1.0;
  std::string b_range;
  double source_diameter = -1.0;
  bool no_cp = false;
  bool corridor = false;
  int threads = 0;
  bool seedless = false;
  bool print_config = false;
  bool images = false;
  bool no_images = false;
};

void add_common(CLI::App *cmd, Options &o) {
  cmd->add_option("--config", o.config, "run configuration file");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--set", o.sets, "override any key, section.key=value (repeatable)");
  cmd->add_option("--radius", o.radius, "sphere radius [m]; 0 removes the obstacle");
  cmd->add_option("--b", o.b, "sphere to detector distance [m]");
  cmd->add_option("--b-range", o.b_range, "image distances lo:hi:n [m]");
  cmd->add_option("--source-diameter", o.source_diameter, "source diameter [m]");
  cmd->add_flag("--no-cp", o.no_cp, "switch the Casimir-Polder phase off");
  cmd->add_flag("--corridor", o.corridor, "add profiles at 0.8 and 1.8 times C3");
  cmd->add_option("--threads", o.threads, "worker threads");
  cmd->add_flag("--seedless", o.seedless, "assert a deterministic run (no random numbers are used)");
  cmd->add_flag("--print-config", o.print_config, "print the effective configuration and exit");
  cmd->add_flag("--images", o.images, "write P5 images");
  cmd->add_flag("--no-images", o.no_images, "skip P5 images");
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

RunConfig effective_config(const Options &o, bool scan) {
  // relative paths are resolved when the file is read, so the serialized
  // text can be re-parsed from anywhere
  std::string text = serialize_config(o.config.empty() ? RunConfig{} : read_config(o.config));
  if (scan)
    text = apply_override(text, "output.images", "no");
  if (!o.out.empty())
    text = apply_override(text, "output.directory", o.out);
  if (o.radius >= 0.0)
    text = apply_override(text, "geometry.radius", fmt(o.radius));
  if (o.b > 0.0) {
    text = apply_override(text, "geometry.b_range", "");
    text = apply_override(text, "geometry.b", fmt(o.b));
  }
  if (!o.b_range.empty()) {
    text = apply_override(text, "geometry.b", "");
    text = apply_override(text, "geometry.b_range", o.b_range);
  }
  if (o.source_diameter >= 0.0)
    text = apply_override(text, "diffraction.source_diameter", fmt(o.source_diameter));
  if (o.no_cp)
    text = apply_override(text, "diffraction.cp", "no");
  if (o.corridor)
    text = apply_override(text, "diffraction.corridor", "yes");
  if (o.threads > 0)
    text = apply_override(text, "output.threads", std::to_string(o.threads));
  if (o.images)
    text = apply_override(text, "output.images", "yes");
  if (o.no_images)
    text = apply_override(text, "output.images", "no");
  for (const auto &s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigurationError("--set expects section.key=value, got " + s);
    const std::string key = s.substr(0, eq);
    if (key == "geometry.b")
      text = apply_override(text, "geometry.b_range", "");
    if (key == "geometry.b_range")
      text = apply_override(text, "geometry.b", "");
    if (key == "beam.temperature")
      text = apply_override(text, "beam.speed", "");
    if (key == "beam.speed")
      text = apply_override(text, "beam.temperature", "");
    text = apply_override(text, key, s.substr(eq + 1));
  }
  return parse_config(text);
}

int run(const Options &o, Stage last, bool scan) {
  const RunConfig cfg = effective_config(o, scan);
  if (o.print_config) {
    std::cout << serialize_config(cfg);
    return 0;
  }
  const Manifest m = run_pipeline(cfg, last);
  std::printf("C3      %.6e J m^3\n", m.C3);
  if (m.excited_fraction >= 0.0)
    std::printf("excited %.3e (Boltzmann fraction at the source)\n", m.excited_fraction);
  if (m.C52 > 0.0)
    std::printf("C52     %.6e m^(5/2)\nR_i_CP  %.4f nm\nR_o_CP  %.4f nm\n", m.C52, m.R_i_CP * 1e9,
                m.R_o_CP * 1e9);
  for (const auto &s : m.stages)
    std::printf("stage   %-12s %-8s %.2f s\n", s.name.c_str(), s.status.c_str(), s.seconds);
  for (const auto &w : m.warnings)
    std::printf("warning %s\n", w.c_str());
  std::printf("outputs %zu files in %s (manifest.json)\n", m.outputs.size(), cfg.out_dir.string().c_str());
  if (o.seedless)
    std::printf("seedless: no random numbers used; outputs are a pure function of the configuration\n");
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Casimir-Polder corrected Poisson spot simulation"};
  app.require_subcommand(1);
  Options o;
  struct Sub {
    const char *name;
    const char *help;
    Stage last;
    bool scan;
  };
  const Sub subs[] = {
      {"material", "permittivity, polarizability and C3", Stage::Material, false},
      {"potential", "Casimir-Polder potential curve of the sphere", Stage::Potential, false},
      {"phase", "eikonal phase profile and annulus radii", Stage::Phase, false},
      {"diffract", "diffraction profiles and images at the configured b", Stage::Diffraction, false},
      {"scan", "profiles over a range of b (images off unless --images)", Stage::Diffraction, true},
  };
  std::vector<CLI::App *> cmds;
  for (const auto &s : subs) {
    cmds.push_back(app.add_subcommand(s.name, s.help));
    add_common(cmds.back(), o);
  }
  CLI11_PARSE(app, argc, argv);
  try {
    for (std::size_t i = 0; i < cmds.size(); ++i)
      if (cmds[i]->parsed()) {
        if (subs[i].scan && o.b_range.empty() && o.config.empty())
          o.b_range = "5e-05:0.00105:21";
        return run(o, subs[i].last, subs[i].scan);
      }
  } catch (const PipelineError &e) {
    std::cerr << "cpspot: stage " << e.stage() << " failed: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "cpspot: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
