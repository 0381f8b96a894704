#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpspot/config.hpp"
#include "cpspot/eikonal.hpp"

namespace cpspot {

// v = sqrt(8 k T / (pi m)), lambda = h / (m v)
Beam beam_from_temperature(double T_s, double mass);
// exp(-hbar w_min / (k T)) with the lowest transition of the atom
double boltzmann_excited_fraction(const PolarizabilityModel &atom, double T_s);

Beam beam_from_config(const RunConfig &config);

enum class Stage { Material, Potential, Phase, Diffraction };

struct OutputFile {
  std::filesystem::path path;
  std::string hash; // FNV-1a 64, hex
  std::uintmax_t bytes = 0;
};

struct StageRecord {
  std::string name;
  double seconds = 0.0;
  std::string status; // ok, skipped, failed
};

struct Manifest {
  std::string config_hash;
  std::string constants_version;
  std::vector<StageRecord> stages;
  std::vector<OutputFile> outputs;
  std::vector<std::string> warnings;
  double C3 = 0.0;
  double C52 = 0.0;
  double R_i_CP = 0.0;
  double R_o_CP = 0.0;
  double excited_fraction = -1.0; // -1 when the beam speed is given directly
  std::string status = "ok";
  std::string error;

  std::string to_json(const std::string &config_text) const;
};

// Carries the stage name and the manifest written so far.
class PipelineError : public std::runtime_error {
public:
  PipelineError(const std::string &stage, const std::string &what, Manifest partial)
      : std::runtime_error(stage + ": " + what), stage_(stage), partial_(std::move(partial)) {}
  const std::string &stage() const noexcept { return stage_; }
  const Manifest &partial() const noexcept { return partial_; }

private:
  std::string stage_;
  Manifest partial_;
};

std::string fnv1a_hex(const std::string &bytes);
std::string fnv1a_file(const std::filesystem::path &path);

// Runs materials -> potential -> phase -> diffraction up to `last`, writing
// every artifact and manifest.json into config.out_dir.
Manifest run_pipeline(const RunConfig &config, Stage last = Stage::Diffraction);

} // namespace cpspot
