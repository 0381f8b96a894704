#pragma once

#include <cmath>
#include <vector>

// Special functions on the imaginary frequency axis.
//
// For z = i x (x > 0) the spherical Bessel and Hankel functions reduce to real
// functions up to a power of i:
//
//   j_l(ix)       = i^l    i_l(x),   i_l(x) = sqrt(pi/2x) I_{l+1/2}(x)
//   h_l^(1)(ix)   = -(-i)^l k_l(x),  k_l(x) = sqrt(2/pi x) K_{l+1/2}(x)
//
// with k_0(x) = e^{-x}/x. The Riccati derivatives transform the same way:
// [z j_l(z)]' = i^l [x i_l]'(x) and [z h_l(z)]' = -(-i)^l [x k_l]'(x).
namespace cpspot {

inline constexpr int kBesselOrderCap = 10000;
inline constexpr int kLegendreDegreeCap = 10000;

// value = mantissa * 2^exponent
struct ScaledReal {
  double mantissa = 0.0;
  int exponent = 0;

  double value() const { return std::ldexp(mantissa, exponent); }
  // natural log of |value|
  double log_abs() const {
    return std::log(std::abs(mantissa)) + exponent * 0.69314718055994530942;
  }
  ScaledReal normalized() const;
};

ScaledReal operator*(ScaledReal a, ScaledReal b);
ScaledReal operator/(ScaledReal a, ScaledReal b);

// All orders 0..l_max of i_l(x), k_l(x) and their Riccati derivatives
// d/dx[x f(x)], stored as mantissa/exponent pairs. Each order carries its own
// binary exponent; a Riccati derivative shares the exponent of its function.
struct ScaledBesselRow {
  int l_max = 0;
  double x = 0.0;

  std::vector<double> first_kind; // i_l(x) = i^{-l} j_l(ix)
  std::vector<int> first_exponent;
  std::vector<double> ric_first;  // [x i_l(x)]'

  std::vector<double> third_kind; // k_l(x) = -i^{l} h_l^(1)(ix)
  std::vector<int> third_exponent;
  std::vector<double> ric_third;  // [x k_l(x)]'

  ScaledReal first(int l) const { return {first_kind[l], first_exponent[l]}; }
  ScaledReal third(int l) const { return {third_kind[l], third_exponent[l]}; }

  // [x f]' / f, free of scaling
  double first_log_derivative(int l) const { return ric_first[l] / first_kind[l]; }
  double third_log_derivative(int l) const { return ric_third[l] / third_kind[l]; }

  // [h_l^(1)(ix)]^2 = (-1)^l k_l(x)^2, returned with its sign.
  ScaledReal hankel_square(int l) const;
};

// Throws DomainError for x <= 0 or non-finite x, ConfigurationError for
// l_max outside [0, kBesselOrderCap].
ScaledBesselRow modified_sph_bessel(int l_max, double x);

// Unscaled convenience values (may over/underflow for extreme arguments).
// j_l(ix) = i^l * sph_bessel_j_imag(l, x)
double sph_bessel_j_imag(int l, double x);
// h_l^(1)(ix) = (-i)^l * sph_hankel1_imag(l, x); equals -e^{-x}/x at l = 0
double sph_hankel1_imag(int l, double x);

// Associated Legendre functions P_l^m(cos theta), m = 0..l, with the
// Condon-Shortley phase (P_1^1 = -sin theta). Values are stored normalised by
// sqrt((l-m)!/(l+m)!), which keeps every entry bounded by one for any degree.
struct LegendreRow {
  int l = 0;
  double theta = 0.0;

  std::vector<double> normalized;          // N_lm P_l^m
  std::vector<double> normalized_m_over_sin; // N_lm m P_l^m / sin(theta), finite limit at the poles
  std::vector<double> normalized_dtheta;   // N_lm dP_l^m/dtheta

  // Unnormalised accessors; overflow to inf once (l+m)! exceeds the double range.
  double value(int m) const;
  double m_over_sin(int m) const;
  double derivative(int m) const;
  // sqrt((l+m)!/(l-m)!)
  double norm_inverse(int m) const;
};

// Throws DomainError for theta outside [0, pi], ConfigurationError for
// l outside [0, kLegendreDegreeCap].
LegendreRow assoc_legendre_row(int l, double theta);

} // namespace cpspot
