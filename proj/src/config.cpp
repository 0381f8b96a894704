#include "cpspot/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "cpspot/error.hpp"

namespace cpspot {

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double number(const std::string &text, const std::string &key) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw ConfigurationError("config: '" + key + "' expects a number, got '" + text + "'");
  return v;
}

int integer(const std::string &text, const std::string &key) {
  const double v = number(text, key);
  if (v != std::floor(v) || std::abs(v) > 2e9)
    throw ConfigurationError("config: '" + key + "' expects an integer, got '" + text + "'");
  return static_cast<int>(v);
}

bool flag(const std::string &text, const std::string &key) {
  const std::string t = trim(text);
  if (t == "yes" || t == "true" || t == "on" || t == "1")
    return true;
  if (t == "no" || t == "false" || t == "off" || t == "0")
    return false;
  throw ConfigurationError("config: '" + key + "' expects yes/no, got '" + text + "'");
}

std::vector<double> numbers(const std::string &text, std::size_t count, const std::string &key) {
  std::istringstream in(text);
  std::vector<double> out;
  std::string tok;
  while (in >> tok)
    out.push_back(number(tok, key));
  if (out.size() != count)
    throw ConfigurationError("config: '" + key + "' expects " + std::to_string(count) + " numbers");
  return out;
}

} // namespace

std::vector<double> parse_range(const std::string &text, double *lo, double *hi, int *n) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? a : text.find(':', a + 1);
  if (b == std::string::npos)
    throw ConfigurationError("range '" + text + "' is not lo:hi:n");
  const double l = number(text.substr(0, a), "range");
  const double h = number(text.substr(a + 1, b - a - 1), "range");
  const int c = integer(text.substr(b + 1), "range");
  if (c < 1 || (c > 1 && !(h > l)))
    throw ConfigurationError("range '" + text + "' needs n >= 1 and hi > lo");
  if (lo)
    *lo = l;
  if (hi)
    *hi = h;
  if (n)
    *n = c;
  std::vector<double> out(c);
  for (int i = 0; i < c; ++i)
    out[i] = c == 1 ? l : l + (h - l) * i / (c - 1);
  return out;
}

std::string apply_override(const std::string &text, const std::string &key, const std::string &value) {
  const auto dot = key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == key.size())
    throw ConfigurationError("override '" + key + "' is not section.key");
  const std::string section = key.substr(0, dot), name = key.substr(dot + 1);
  std::istringstream in(text);
  std::ostringstream out;
  std::string line, current;
  bool placed = value.empty();
  while (std::getline(in, line)) {
    std::string body = line;
    const auto hash = body.find('#');
    if (hash != std::string::npos)
      body.erase(hash);
    body = trim(body);
    if (!body.empty() && body.front() == '[' && body.back() == ']') {
      current = trim(body.substr(1, body.size() - 2));
      out << line << '\n';
      if (current == section && !placed) {
        out << name << " = " << value << '\n';
        placed = true;
      }
      continue;
    }
    const auto eq = body.find('=');
    if (current == section && eq != std::string::npos && trim(body.substr(0, eq)) == name)
      continue;
    out << line << '\n';
  }
  if (!placed)
    out << "\n[" << section << "]\n" << name << " = " << value << '\n';
  return out.str();
}

void RunConfig::set_b_range(double lo, double hi, int n) {
  std::ostringstream s;
  s << fmt(lo) << ':' << fmt(hi) << ':' << n;
  b_values = parse_range(s.str(), &b_lo, &b_hi, &b_count);
  b_is_range = true;
}

void RunConfig::validate() const {
  if (!(R >= 0.0))
    throw ConfigurationError("config: radius must be non-negative");
  if (!(g > 0.0))
    throw ConfigurationError("config: g must be positive");
  if (b_values.empty())
    throw ConfigurationError("config: no image distance given");
  for (double b : b_values)
    if (!(b > 0.0))
      throw ConfigurationError("config: image distances must be positive");
  if (temperature.has_value() == speed.has_value())
    throw ConfigurationError("config: give exactly one of beam temperature and beam speed");
  if (temperature && !(*temperature > 0.0))
    throw ConfigurationError("config: temperature must be positive");
  if (speed && !(*speed > 0.0))
    throw ConfigurationError("config: speed must be positive");
  if (!(mass > 0.0))
    throw ConfigurationError("config: mass must be positive");
  if (optical_data.empty())
    sphere.validate();
  else if (!std::filesystem::exists(optical_data))
    throw ConfigurationError("config: optical data file not found: " + optical_data.string());
  atom.validate();
  if (l_max < 1)
    throw ConfigurationError("config: l_max must be at least 1");
  if (!(stitch_tol > 0.0 && stitch_tol <= 1.0))
    throw ConfigurationError("config: stitch_tol must lie in (0, 1]");
  if (!(z_min > 0.0 && z_max > z_min) || potential_points < 2)
    throw ConfigurationError("config: potential grid needs 0 < z_min < z_max and >= 2 points");
  if (phase_model != "full" && phase_model != "power_law")
    throw ConfigurationError("config: phase_model must be full or power_law");
  if (annulus_rule != "trapezoid" && annulus_rule != "phase_linear" && annulus_rule != "gauss")
    throw ConfigurationError("config: annulus_rule must be trapezoid, phase_linear or gauss");
  if (!(source_diameter >= 0.0))
    throw ConfigurationError("config: source_diameter must be non-negative");
  if (N_theta < 3 || !(cp_step > 0.0) || pixels < 2)
    throw ConfigurationError("config: need n_theta >= 3, cp_step > 0, pixels >= 2");
  if (image_size < 1 || threads < 1)
    throw ConfigurationError("config: image_size and threads must be positive");
}

RunConfig parse_config(const std::string &text, const std::filesystem::path &base_dir) {
  RunConfig c;
  std::istringstream in(text);
  std::string line, section;
  bool resonances_seen = false, transitions_seen = false, beam_seen = false;
  std::map<std::string, int> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigurationError("config line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigurationError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const std::string full = section + "." + key;
    const bool repeatable = full == "sphere.resonance" || full == "atom.transition";
    if (!repeatable && seen[full]++)
      throw ConfigurationError("config: duplicate key " + full);

    if (full == "geometry.radius")
      c.R = number(val, full);
    else if (full == "geometry.g")
      c.g = number(val, full);
    else if (full == "geometry.b") {
      c.b_values = {number(val, full)};
      c.b_is_range = false;
    } else if (full == "geometry.b_range") {
      c.b_values = parse_range(val, &c.b_lo, &c.b_hi, &c.b_count);
      c.b_is_range = true;
    } else if (full == "beam.temperature" || full == "beam.speed") {
      if (!beam_seen) {
        c.temperature.reset();
        c.speed.reset();
        beam_seen = true;
      }
      (key == "temperature" ? c.temperature : c.speed) = number(val, full);
    } else if (full == "beam.mass")
      c.mass = number(val, full);
    else if (full == "sphere.resonance") {
      if (!resonances_seen) {
        c.sphere.resonances.clear();
        resonances_seen = true;
      }
      const auto v = numbers(val, 3, full);
      c.sphere.resonances.push_back({v[0], v[1], v[2]});
    } else if (full == "sphere.optical_data") {
      std::filesystem::path p(val);
      if (p.is_relative())
        p = base_dir / p;
      if (!std::filesystem::exists(p))
        throw ConfigurationError("config: optical data file not found: " + p.string());
      c.optical_data = std::filesystem::weakly_canonical(p);
    } else if (full == "atom.J0")
      c.atom.J0 = number(val, full);
    else if (full == "atom.transition") {
      if (!transitions_seen) {
        c.atom.transitions.clear();
        transitions_seen = true;
      }
      const auto v = numbers(val, 2, full);
      c.atom.transitions.push_back({v[0], v[1]});
    } else if (full == "potential.l_max")
      c.l_max = integer(val, full);
    else if (full == "potential.stitch_tol")
      c.stitch_tol = number(val, full);
    else if (full == "potential.z_min")
      c.z_min = number(val, full);
    else if (full == "potential.z_max")
      c.z_max = number(val, full);
    else if (full == "potential.points")
      c.potential_points = integer(val, full);
    else if (full == "potential.phase_model")
      c.phase_model = val;
    else if (full == "diffraction.cp")
      c.cp = flag(val, full);
    else if (full == "diffraction.source_diameter")
      c.source_diameter = number(val, full);
    else if (full == "diffraction.n_theta")
      c.N_theta = integer(val, full);
    else if (full == "diffraction.cp_step")
      c.cp_step = number(val, full);
    else if (full == "diffraction.pixels")
      c.pixels = integer(val, full);
    else if (full == "diffraction.annulus_rule")
      c.annulus_rule = val;
    else if (full == "diffraction.corridor")
      c.corridor = flag(val, full);
    else if (full == "output.directory") {
      std::filesystem::path p(val);
      c.out_dir = p.is_relative() ? base_dir / p : p;
      c.out_dir = c.out_dir.lexically_normal();
    } else if (full == "output.images")
      c.images = flag(val, full);
    else if (full == "output.image_size")
      c.image_size = integer(val, full);
    else if (full == "output.threads")
      c.threads = integer(val, full);
    else
      throw ConfigurationError("config: unknown key " + full);
  }
  if (seen["geometry.b"] && seen["geometry.b_range"])
    throw ConfigurationError("config: give either b or b_range, not both");
  c.validate();
  return c;
}

RunConfig read_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigurationError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path().empty() ? "." : path.parent_path());
}

std::string serialize_config(const RunConfig &c) {
  std::ostringstream o;
  o << "[geometry]\nradius = " << fmt(c.R) << "\ng = " << fmt(c.g) << '\n';
  if (c.b_is_range)
    o << "b_range = " << fmt(c.b_lo) << ':' << fmt(c.b_hi) << ':' << c.b_count << '\n';
  else
    o << "b = " << fmt(c.b_values.front()) << '\n';
  o << "\n[beam]\n";
  if (c.temperature)
    o << "temperature = " << fmt(*c.temperature) << '\n';
  if (c.speed)
    o << "speed = " << fmt(*c.speed) << '\n';
  o << "mass = " << fmt(c.mass) << "\n\n[sphere]\n";
  if (!c.optical_data.empty())
    o << "optical_data = " << c.optical_data.string() << '\n';
  for (const auto &r : c.sphere.resonances)
    o << "resonance = " << fmt(r.plasma) << ' ' << fmt(r.transverse) << ' ' << fmt(r.damping) << '\n';
  o << "\n[atom]\nJ0 = " << fmt(c.atom.J0) << '\n';
  for (const auto &t : c.atom.transitions)
    o << "transition = " << fmt(t.omega) << ' ' << fmt(t.dipole) << '\n';
  o << "\n[potential]\nl_max = " << c.l_max << "\nstitch_tol = " << fmt(c.stitch_tol)
    << "\nz_min = " << fmt(c.z_min) << "\nz_max = " << fmt(c.z_max)
    << "\npoints = " << c.potential_points << "\nphase_model = " << c.phase_model << '\n';
  o << "\n[diffraction]\ncp = " << (c.cp ? "yes" : "no")
    << "\nsource_diameter = " << fmt(c.source_diameter) << "\nn_theta = " << c.N_theta
    << "\ncp_step = " << fmt(c.cp_step) << "\npixels = " << c.pixels
    << "\nannulus_rule = " << c.annulus_rule << "\ncorridor = " << (c.corridor ? "yes" : "no") << '\n';
  o << "\n[output]\ndirectory = " << c.out_dir.string() << "\nimages = " << (c.images ? "yes" : "no")
    << "\nimage_size = " << c.image_size << "\nthreads = " << c.threads << '\n';
  return o.str();
}

} // namespace cpspot
