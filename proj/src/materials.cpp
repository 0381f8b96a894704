#include "cpspot/materials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "cpspot/constants.hpp"
#include "cpspot/quadrature.hpp"

namespace cpspot {

// ---------------------------------------------------------------------------
// Drude-Lorentz permittivity

DrudeLorentzModel DrudeLorentzModel::silica() {
  return {{{1.75e14, 1.32e14, 4.28e13}, {2.96e16, 2.72e16, 8.09e15}}};
}

void DrudeLorentzModel::validate() const {
  for (const auto &r : resonances) {
    for (double p : {r.plasma, r.transverse, r.damping})
      if (!(std::isfinite(p) && p > 0.0))
        throw ConfigurationError("DrudeLorentzModel: every resonance parameter must be positive");
  }
}

double permittivity(const DrudeLorentzModel &model, double xi) {
  if (!(xi >= 0.0))
    throw DomainError("permittivity: imaginary frequency must be non-negative");
  double eps = 1.0;
  for (const auto &r : model.resonances)
    eps += r.plasma * r.plasma / (r.transverse * r.transverse + r.damping * xi + xi * xi);
  return eps;
}

std::complex<double> permittivity_real_axis(const DrudeLorentzModel &model, double omega) {
  std::complex<double> eps = 1.0;
  for (const auto &r : model.resonances)
    eps += r.plasma * r.plasma /
           std::complex<double>(r.transverse * r.transverse - omega * omega, -r.damping * omega);
  return eps;
}

// ---------------------------------------------------------------------------
// Optical data and Kramers-Kronig

double OpticalDataTable::decades() const {
  if (rows.size() < 2)
    return 0.0;
  return std::log10(rows.back().omega / rows.front().omega);
}

void OpticalDataTable::validate() const {
  if (rows.empty())
    throw ConfigurationError("OpticalDataTable: table is empty");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto &r = rows[i];
    if (!(r.omega > 0.0) || !(r.n >= 0.0) || !(r.k >= 0.0))
      throw ConfigurationError("OpticalDataTable: row " + std::to_string(i) +
                               " needs omega > 0, n >= 0, k >= 0");
    if (i > 0 && !(r.omega > rows[i - 1].omega))
      throw ConfigurationError("OpticalDataTable: frequencies must be strictly increasing");
  }
}

OpticalDataTable OpticalDataTable::parse(const std::string &text) {
  OpticalDataTable table;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::vector<double> values;
    double v;
    while (fields >> v)
      values.push_back(v);
    if (!fields.eof())
      throw ConfigurationError("optical data line " + std::to_string(line_no) +
                               ": non-numeric field");
    if (values.empty())
      continue;
    if (values.size() != 3)
      throw ConfigurationError("optical data line " + std::to_string(line_no) +
                               ": expected 3 columns (omega, n, k)");
    table.rows.push_back({values[0], values[1], values[2]});
  }
  table.validate();
  return table;
}

OpticalDataTable OpticalDataTable::read(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigurationError("cannot open optical data file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

OpticalDataTable OpticalDataTable::from_model(const DrudeLorentzModel &model,
                                              std::span<const double> omegas) {
  OpticalDataTable table;
  table.rows.reserve(omegas.size());
  for (double w : omegas) {
    const auto nk = std::sqrt(permittivity_real_axis(model, w));
    table.rows.push_back({w, nk.real(), nk.imag()});
  }
  return table;
}

KramersKronigResult kramers_kronig_imag_axis(const OpticalDataTable &table, double xi) {
  if (!(xi > 0.0))
    throw DomainError("kramers_kronig_imag_axis: xi must be positive");
  table.validate();

  KramersKronigResult out;
  if (table.decades() < 4.0)
    out.warnings.push_back("optical table spans " + std::to_string(table.decades()) +
                           " decades (< 4); imaginary-axis permittivity may be biased");

  const auto im_eps = [](const OpticalSample &s) { return 2.0 * s.n * s.k; };
  const auto integrand = [&](const OpticalSample &s) {
    return s.omega * im_eps(s) / (s.omega * s.omega + xi * xi);
  };

  // origin to first row, Im eps rising linearly from zero
  const auto &first = table.rows.front();
  double sum = im_eps(first) / first.omega * (first.omega - xi * std::atan(first.omega / xi));

  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const auto &a = table.rows[i - 1];
    const auto &b = table.rows[i];
    sum += 0.5 * (b.omega - a.omega) * (integrand(a) + integrand(b));
  }

  // power-law tail Im eps = Im eps_N (w_N / w)^3
  const auto &last = table.rows.back();
  const double u = xi / last.omega;
  double g; // 1 - atan(u)/u
  if (u < 1e-3)
    g = u * u / 3.0 - std::pow(u, 4) / 5.0 + std::pow(u, 6) / 7.0;
  else
    g = 1.0 - std::atan(u) / u;
  sum += im_eps(last) * last.omega * last.omega / (xi * xi) * g;

  out.value = 1.0 + 2.0 / std::numbers::pi * sum;
  return out;
}

// ---------------------------------------------------------------------------
// Levenberg-Marquardt fit in log space

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

DrudeLorentzModel model_from_params(const Vec &p) {
  DrudeLorentzModel m;
  for (Eigen::Index i = 0; i + 2 < p.size(); i += 3)
    m.resonances.push_back({std::exp(p[i]), std::exp(p[i + 1]), std::exp(p[i + 2])});
  return m;
}

Vec params_from_model(const DrudeLorentzModel &m) {
  Vec p(3 * static_cast<Eigen::Index>(m.resonances.size()));
  for (std::size_t i = 0; i < m.resonances.size(); ++i) {
    const auto &r = m.resonances[i];
    p[3 * i] = std::log(r.plasma);
    p[3 * i + 1] = std::log(r.transverse);
    p[3 * i + 2] = std::log(r.damping);
  }
  return p;
}

void residual_and_jacobian(const Vec &p, std::span<const PermittivitySample> samples, Vec &res,
                           Mat *jac) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  res.resize(n);
  if (jac)
    jac->resize(n, p.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    const double xi = samples[j].xi;
    double eps = 1.0;
    for (Eigen::Index i = 0; i + 2 < p.size(); i += 3) {
      const double P2 = std::exp(2.0 * p[i]);
      const double T2 = std::exp(2.0 * p[i + 1]);
      const double G = std::exp(p[i + 2]);
      const double D = T2 + G * xi + xi * xi;
      eps += P2 / D;
      if (jac) {
        (*jac)(j, i) = 2.0 * P2 / D;
        (*jac)(j, i + 1) = -P2 * 2.0 * T2 / (D * D);
        (*jac)(j, i + 2) = -P2 * G * xi / (D * D);
      }
    }
    res[j] = std::log(eps) - std::log(samples[j].epsilon);
    if (jac)
      jac->row(j) /= eps;
  }
}

struct LmOutcome {
  Vec params;
  double cost = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

LmOutcome levenberg_marquardt(Vec p, std::span<const PermittivitySample> samples, int max_iter) {
  Vec res;
  Mat J;
  residual_and_jacobian(p, samples, res, &J);
  double cost = 0.5 * res.squaredNorm();
  double lambda = 1e-3;
  LmOutcome out;
  for (int it = 1; it <= max_iter; ++it) {
    out.iterations = it;
    const Mat JtJ = J.transpose() * J;
    const Vec g = J.transpose() * res;
    if (g.lpNorm<Eigen::Infinity>() < 1e-15 || cost < 1e-30) {
      out.converged = true;
      break;
    }
    bool improved = false;
    for (int tries = 0; tries < 30 && !improved; ++tries) {
      Mat A = JtJ;
      A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-12);
      const Vec step = A.ldlt().solve(-g);
      const Vec trial = p + step;
      Vec trial_res;
      residual_and_jacobian(trial, samples, trial_res, nullptr);
      const double trial_cost = 0.5 * trial_res.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        const double drop = (cost - trial_cost) / std::max(cost, 1e-300);
        p = trial;
        cost = trial_cost;
        lambda = std::max(lambda / 3.0, 1e-12);
        improved = true;
        residual_and_jacobian(p, samples, res, &J);
        if (step.lpNorm<Eigen::Infinity>() < 1e-12 || drop < 1e-14)
          out.converged = true;
      } else {
        lambda *= 4.0;
      }
    }
    if (!improved) {
      // no descent direction left at machine precision
      out.converged = true;
    }
    if (out.converged)
      break;
  }
  out.params = p;
  out.cost = cost;
  return out;
}

DrudeLorentzFit make_fit(const LmOutcome &lm, std::span<const PermittivitySample> samples) {
  DrudeLorentzFit fit;
  fit.model = model_from_params(lm.params);
  fit.residual_norm = std::sqrt(2.0 * lm.cost);
  fit.iterations = lm.iterations;

  Vec res;
  Mat J;
  residual_and_jacobian(lm.params, samples, res, &J);
  const auto dof = static_cast<double>(samples.size()) - static_cast<double>(lm.params.size());
  const double s2 = dof > 0 ? 2.0 * lm.cost / dof : std::numeric_limits<double>::quiet_NaN();
  const Mat cov = (J.transpose() * J).completeOrthogonalDecomposition().pseudoInverse() * s2;
  for (std::size_t i = 0; i < fit.model.resonances.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(3 * i);
    fit.relative_uncertainty.push_back(
        {std::sqrt(cov(k, k)), std::sqrt(cov(k + 1, k + 1)), std::sqrt(cov(k + 2, k + 2))});
  }
  return fit;
}

} // namespace

DrudeLorentzFit fit_drude_lorentz(std::span<const PermittivitySample> samples, int n_lines,
                                  const std::optional<DrudeLorentzModel> &initial) {
  if (n_lines < 1)
    throw ConfigurationError("fit_drude_lorentz: need at least one line");
  if (samples.size() < static_cast<std::size_t>(3 * n_lines))
    throw ConfigurationError("fit_drude_lorentz: " + std::to_string(samples.size()) +
                             " samples cannot determine " + std::to_string(3 * n_lines) +
                             " parameters");
  for (const auto &s : samples)
    if (!(s.xi >= 0.0) || !(s.epsilon > 1.0))
      throw DomainError("fit_drude_lorentz: samples need xi >= 0 and epsilon > 1");

  constexpr int kMaxIter = 500;

  if (initial) {
    if (static_cast<int>(initial->resonances.size()) != n_lines)
      throw ConfigurationError("fit_drude_lorentz: initial model has the wrong number of lines");
    initial->validate();
    const auto lm = levenberg_marquardt(params_from_model(*initial), samples, kMaxIter);
    auto fit = make_fit(lm, samples);
    if (!lm.converged)
      throw FitError("fit_drude_lorentz: no convergence within iteration cap", fit);
    return fit;
  }

  // Multistart: line positions drawn from a log grid over the sample range.
  double xi_lo = std::numeric_limits<double>::infinity(), xi_hi = 0.0, eps_max = 1.0;
  for (const auto &s : samples) {
    if (s.xi > 0.0)
      xi_lo = std::min(xi_lo, s.xi);
    xi_hi = std::max(xi_hi, s.xi);
    eps_max = std::max(eps_max, s.epsilon);
  }
  if (!(xi_hi > xi_lo))
    throw ConfigurationError("fit_drude_lorentz: samples must span a frequency range");
  constexpr int kGrid = 10;
  std::vector<double> grid(kGrid);
  for (int i = 0; i < kGrid; ++i)
    grid[i] = xi_lo * std::pow(xi_hi / xi_lo, (i + 0.5) / kGrid);

  LmOutcome best;
  std::vector<int> pick(n_lines);
  // enumerate strictly increasing index tuples
  std::function<void(int, int)> recurse = [&](int depth, int from) {
    if (depth == n_lines) {
      DrudeLorentzModel guess;
      for (int idx : pick) {
        const double T = grid[idx];
        guess.resonances.push_back({T * std::sqrt((eps_max - 1.0) / n_lines), T, 0.3 * T});
      }
      auto lm = levenberg_marquardt(params_from_model(guess), samples, 150);
      if (lm.cost < best.cost)
        best = std::move(lm);
      return;
    }
    for (int i = from; i < kGrid; ++i) {
      pick[depth] = i;
      recurse(depth + 1, i + 1);
    }
  };
  recurse(0, 0);

  auto polished = levenberg_marquardt(best.params, samples, kMaxIter);
  polished.iterations += best.iterations;
  auto fit = make_fit(polished, samples);
  if (!polished.converged)
    throw FitError("fit_drude_lorentz: no convergence within iteration cap", fit);
  return fit;
}

// ---------------------------------------------------------------------------
// Atomic polarizability

PolarizabilityModel PolarizabilityModel::indium() {
  PolarizabilityModel m;
  m.J0 = 0.5;
  const double omegas[] = {4.594, 6.200, 6.843, 7.360, 7.659, 7.886};
  const double dipoles[] = {16.092, 22.048, 4.587, 7.910, 2.518, 3.582};
  for (int k = 0; k < 6; ++k)
    m.transitions.push_back({omegas[k] * 1e15, dipoles[k] * 1e-30});
  return m;
}

void PolarizabilityModel::validate() const {
  if (!(J0 >= 0.0) || !std::isfinite(J0))
    throw ConfigurationError("PolarizabilityModel: J0 must be non-negative");
  for (const auto &t : transitions)
    if (!(t.omega > 0.0 && t.dipole > 0.0 && std::isfinite(t.omega) && std::isfinite(t.dipole)))
      throw ConfigurationError("PolarizabilityModel: transitions need omega > 0 and d > 0");
}

std::vector<std::string> PolarizabilityModel::warnings() const {
  if (transitions.empty())
    return {"atom has no transitions; polarizability is identically zero"};
  return {};
}

double PolarizabilityModel::dominant_frequency() const {
  if (transitions.empty())
    throw ConfigurationError("PolarizabilityModel: no transitions");
  const auto it = std::max_element(transitions.begin(), transitions.end(),
                                   [](const Transition &a, const Transition &b) {
                                     return a.dipole * a.dipole / a.omega <
                                            b.dipole * b.dipole / b.omega;
                                   });
  return it->omega;
}

double PolarizabilityModel::lowest_frequency() const {
  if (transitions.empty())
    throw ConfigurationError("PolarizabilityModel: no transitions");
  return std::min_element(transitions.begin(), transitions.end(),
                          [](const Transition &a, const Transition &b) { return a.omega < b.omega; })
      ->omega;
}

double polarizability(const PolarizabilityModel &model, double xi) {
  if (!(xi >= 0.0))
    throw DomainError("polarizability: imaginary frequency must be non-negative");
  double sum = 0.0;
  for (const auto &t : model.transitions)
    sum += t.omega * t.dipole * t.dipole / (t.omega * t.omega + xi * xi);
  return 2.0 / (3.0 * constants::hbar * (2.0 * model.J0 + 1.0)) * sum;
}

// ---------------------------------------------------------------------------
// Layered half-space

double effective_c3_layered(const DrudeLorentzModel &film, const DrudeLorentzModel &substrate,
                            const PolarizabilityModel &atom, double d, double z) {
  if (!(d >= 0.0))
    throw DomainError("effective_c3_layered: film thickness must be non-negative");
  if (!(z > 0.0))
    throw DomainError("effective_c3_layered: distance must be positive");
  if (atom.transitions.empty())
    return 0.0;

  const double ratio = d / z; // e^{-2qd} = e^{-u d/z} with u = 2 q z
  const auto xi_integrand = [&](double xi) {
    const double ef = permittivity(film, xi);
    const double es = permittivity(substrate, xi);
    const double r_vf = (ef - 1.0) / (ef + 1.0);
    const double r_fs = (es - ef) / (es + ef);
    const auto q_integrand = [&](double u) {
      const double damp = std::exp(-u * ratio);
      const double r_eff = (r_vf + r_fs * damp) / (1.0 + r_vf * r_fs * damp);
      return u * u * std::exp(-u) * r_eff;
    };
    const auto inner = integrate_semi_infinite(q_integrand, 2.0, 1e-10, 40, 2560);
    return polarizability(atom, xi) * inner.value;
  };
  const auto outer =
      integrate_semi_infinite(xi_integrand, atom.dominant_frequency(), 1e-8, 60, 1920);
  if (!outer.converged)
    throw ConvergenceError("effective_c3_layered: frequency quadrature did not converge",
                           outer.value);
  // U = -(hbar / 4 pi^2 eps0) int dxi alpha int dq q^2 e^{-2qz} r_eff
  //   = -(hbar / 32 pi^2 eps0 z^3) int dxi alpha int du u^2 e^{-u} r_eff
  return constants::hbar / (32.0 * constants::pi * constants::pi * constants::epsilon0) *
         outer.value;
}

} // namespace cpspot
