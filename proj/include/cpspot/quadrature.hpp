#pragma once

#include <cmath>
#include <vector>

namespace cpspot {

// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendre gauss_legendre(int n);

struct QuadratureResult {
  double value = 0.0;
  double relative_change = 0.0; // between the last two refinements
  int nodes = 0;
  bool converged = false;
};

// Integrates f over [0, inf) with the substitution x = scale * t / (1 - t)
// and a Gauss-Legendre rule in t that is doubled from n0 nodes until two
// successive estimates agree to rel_tol, or n_max is exceeded. Nodes are
// visited in ascending x.
template <class F>
QuadratureResult integrate_semi_infinite(F &&f, double scale, double rel_tol,
                                         int n0 = 60, int n_max = 1920) {
  QuadratureResult out;
  double previous = 0.0;
  bool have_previous = false;
  for (int n = n0; n <= n_max; n *= 2) {
    const GaussLegendre rule = gauss_legendre(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = 0.5 * (rule.nodes[i] + 1.0);
      const double one_minus = 1.0 - t;
      const double x = scale * t / one_minus;
      const double jac = scale / (one_minus * one_minus);
      sum += 0.5 * rule.weights[i] * jac * f(x);
    }
    out.value = sum;
    out.nodes = n;
    if (have_previous) {
      const double denom = std::max(std::abs(sum), 1e-300);
      out.relative_change = std::abs(sum - previous) / denom;
      if (out.relative_change < rel_tol || sum == previous) {
        out.converged = true;
        return out;
      }
    }
    previous = sum;
    have_previous = true;
  }
  return out;
}

} // namespace cpspot
