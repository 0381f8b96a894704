#include "cpspot/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cpspot/error.hpp"

namespace cpspot {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// e^x as mantissa/exponent, splitting x*log2(e) in extended precision.
ScaledReal scaled_exp(double x) {
  const long double t = static_cast<long double>(x) * std::numbers::log2e_v<long double>;
  const long double n = std::floor(t);
  const double frac = static_cast<double>(t - n);
  return ScaledReal{std::exp2(frac), static_cast<int>(n)}.normalized();
}

ScaledReal scaled_from_log(double ln_value, double sign) {
  const double e = std::floor(ln_value / kLn2);
  return ScaledReal{sign * std::exp(ln_value - e * kLn2), static_cast<int>(e)}.normalized();
}

void check_argument(int l_max, double x) {
  if (!std::isfinite(x) || x <= 0.0)
    throw DomainError("modified_sph_bessel: argument must be positive and finite, got " +
                      std::to_string(x));
  if (l_max < 0 || l_max > kBesselOrderCap)
    throw ConfigurationError("modified_sph_bessel: l_max " + std::to_string(l_max) +
                             " outside [0, " + std::to_string(kBesselOrderCap) + "]");
}

} // namespace

ScaledReal ScaledReal::normalized() const {
  if (mantissa == 0.0 || !std::isfinite(mantissa))
    return {mantissa, 0};
  int e = 0;
  const double m = std::frexp(mantissa, &e);
  return {m, exponent + e};
}

ScaledReal operator*(ScaledReal a, ScaledReal b) {
  return ScaledReal{a.mantissa * b.mantissa, a.exponent + b.exponent}.normalized();
}

ScaledReal operator/(ScaledReal a, ScaledReal b) {
  return ScaledReal{a.mantissa / b.mantissa, a.exponent - b.exponent}.normalized();
}

ScaledReal ScaledBesselRow::hankel_square(int l) const {
  const ScaledReal k = third(l);
  ScaledReal sq = k * k;
  if (l % 2 != 0)
    sq.mantissa = -sq.mantissa;
  return sq;
}

ScaledBesselRow modified_sph_bessel(int l_max, double x) {
  check_argument(l_max, x);

  ScaledBesselRow row;
  row.l_max = l_max;
  row.x = x;
  const auto n = static_cast<std::size_t>(l_max) + 1;
  row.first_kind.resize(n);
  row.first_exponent.resize(n);
  row.ric_first.resize(n);
  row.third_kind.resize(n);
  row.third_exponent.resize(n);
  row.ric_third.resize(n);

  // First kind: Miller-type downward recurrence on the ratios
  // ratio[l] = i_l / i_{l-1}, normalised through i_0 = sinh(x)/x.
  const int start = l_max + static_cast<int>(std::ceil(10.0 + x));
  std::vector<double> ratio(static_cast<std::size_t>(l_max) + 2, 0.0);
  double r = 0.0;
  for (int l = start; l >= 1; --l) {
    r = 1.0 / ((2.0 * l + 1.0) / x + r);
    if (l <= l_max + 1)
      ratio[l] = r;
  }

  // i_0 = e^x (1 - e^{-2x}) / (2x)
  ScaledReal i_l = scaled_exp(x);
  i_l.mantissa *= -std::expm1(-2.0 * x) / (2.0 * x);
  i_l = i_l.normalized();
  for (int l = 0; l <= l_max; ++l) {
    if (l > 0)
      i_l = ScaledReal{i_l.mantissa * ratio[l], i_l.exponent}.normalized();
    row.first_kind[l] = i_l.mantissa;
    row.first_exponent[l] = i_l.exponent;
    // [x i_l]' = x i_{l+1} + (l+1) i_l
    row.ric_first[l] = i_l.mantissa * (x * ratio[l + 1] + l + 1.0);
  }

  // Third kind: upward recurrence (dominant direction) on the ratios
  // s_l = k_l / k_{l-1}, starting from k_0 = e^{-x}/x.
  ScaledReal k_l = scaled_exp(-x);
  k_l.mantissa /= x;
  k_l = k_l.normalized();
  row.third_kind[0] = k_l.mantissa;
  row.third_exponent[0] = k_l.exponent;
  row.ric_third[0] = -x * k_l.mantissa; // [x k_0]' = -e^{-x}
  double s = 0.0;
  for (int l = 1; l <= l_max; ++l) {
    s = (l == 1) ? 1.0 + 1.0 / x : 1.0 / s + (2.0 * l - 1.0) / x;
    k_l = ScaledReal{k_l.mantissa * s, k_l.exponent}.normalized();
    row.third_kind[l] = k_l.mantissa;
    row.third_exponent[l] = k_l.exponent;
    // [x k_l]' = -x k_{l-1} - l k_l
    row.ric_third[l] = -k_l.mantissa * (x / s + l);
  }
  return row;
}

double sph_bessel_j_imag(int l, double x) {
  return modified_sph_bessel(l, x).first(l).value();
}

double sph_hankel1_imag(int l, double x) {
  return -modified_sph_bessel(l, x).third(l).value();
}

// ---------------------------------------------------------------------------
// Associated Legendre functions

double LegendreRow::norm_inverse(int m) const {
  return std::exp(0.5 * (std::lgamma(l + m + 1.0) - std::lgamma(l - m + 1.0)));
}

double LegendreRow::value(int m) const { return normalized[m] * norm_inverse(m); }

double LegendreRow::m_over_sin(int m) const {
  return normalized_m_over_sin[m] * norm_inverse(m);
}

double LegendreRow::derivative(int m) const {
  return normalized_dtheta[m] * norm_inverse(m);
}

LegendreRow assoc_legendre_row(int l, double theta) {
  if (!(theta >= 0.0 && theta <= std::numbers::pi))
    throw DomainError("assoc_legendre_row: theta must lie in [0, pi]");
  if (l < 0 || l > kLegendreDegreeCap)
    throw ConfigurationError("assoc_legendre_row: degree outside supported range");

  LegendreRow row;
  row.l = l;
  row.theta = theta;
  const auto n = static_cast<std::size_t>(l) + 1;
  row.normalized.assign(n, 0.0);
  row.normalized_m_over_sin.assign(n, 0.0);
  row.normalized_dtheta.assign(n, 0.0);

  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const double log_st = std::log(st); // -inf at the poles

  double log_prefactor = 0.0; // log sqrt(prod (2k-1)/(2k))
  for (int m = 0; m <= l; ++m) {
    if (m > 0)
      log_prefactor += 0.5 * std::log((2.0 * m - 1.0) / (2.0 * m));
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;

    // Upward recurrence in degree from a unit seed at degree m, tracked as a
    // scaled quantity so that tiny seeds near the poles do not underflow.
    double prev = 0.0, cur = 1.0;
    int shift = 0;
    for (int k = m + 1; k <= l; ++k) {
      double next;
      if (k == m + 1)
        next = ct * std::sqrt(2.0 * m + 1.0) * cur;
      else
        next = ((2.0 * k - 1.0) * ct * cur -
                std::sqrt((k - 1.0 - m) * (k - 1.0 + m)) * prev) /
               std::sqrt((k - static_cast<double>(m)) * (k + static_cast<double>(m)));
      prev = cur;
      cur = next;
      if (std::abs(cur) > 0x1p500) {
        cur = std::ldexp(cur, -500);
        prev = std::ldexp(prev, -500);
        shift += 500;
      }
    }
    const ScaledReal unit{cur, shift};

    // N_mm P_m^m = (-1)^m sqrt(prod) sin^m
    if (m == 0) {
      row.normalized[0] = unit.value();
    } else if (st > 0.0) {
      row.normalized[m] = (scaled_from_log(log_prefactor + m * log_st, sign) * unit).value();
      row.normalized_m_over_sin[m] =
          (scaled_from_log(log_prefactor + (m - 1) * log_st + std::log(double(m)), sign) * unit)
              .value();
    } else if (m == 1) {
      // sin^0 = 1 at the poles
      row.normalized_m_over_sin[m] =
          (scaled_from_log(log_prefactor, sign) * unit).value();
    }
  }

  // dP_l^m/dtheta = 1/2 [P_l^{m+1} - (l+m)(l-m+1) P_l^{m-1}], normalised form.
  for (int m = 0; m <= l; ++m) {
    const double up = (m + 1 <= l) ? row.normalized[m + 1] : 0.0;
    // normalised P_l^{-1} = -normalised P_l^1
    double down = 0.0;
    if (m > 0)
      down = row.normalized[m - 1];
    else if (l >= 1)
      down = -row.normalized[1];
    const double c_up = std::sqrt((l - static_cast<double>(m)) * (l + m + 1.0));
    const double c_down = std::sqrt((l + static_cast<double>(m)) * (l - m + 1.0));
    row.normalized_dtheta[m] = 0.5 * (c_up * up - c_down * down);
  }
  return row;
}

} // namespace cpspot
