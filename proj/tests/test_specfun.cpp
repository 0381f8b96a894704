#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "cpspot/error.hpp"
#include "cpspot/specfun.hpp"
#include "reference_value.hpp"

using namespace cpspot;

namespace {

struct BesselRef {
  int l;
  double x;
  const char *first, *third, *ric_first, *ric_third;
};

const BesselRef kBesselRef[] = {
#include "data/bessel_reference.inc"
};

struct LegendreRef {
  int l, m;
  double theta;
  const char *value, *dtheta;
};

const LegendreRef kLegendreRef[] = {
#include "data/legendre_reference.inc"
};

// relative difference of two signed values given as (sign, log|.|)
double rel_diff(double sign_a, double log_a, double sign_b, double log_b) {
  if (sign_a != sign_b)
    return 2.0;
  return std::abs(std::expm1(log_a - log_b));
}

} // namespace

TEST_CASE("closed forms at order zero") {
  const auto row = modified_sph_bessel(0, 1.0);
  CHECK(row.first(0).value() == doctest::Approx(std::sinh(1.0)).epsilon(1e-15));
  CHECK(sph_bessel_j_imag(0, 1.0) == doctest::Approx(1.17520119364380).epsilon(1e-13));
  CHECK(sph_hankel1_imag(0, 1.0) == doctest::Approx(-std::exp(-1.0)).epsilon(1e-15));
  CHECK(sph_hankel1_imag(0, 1.0) == doctest::Approx(-0.36787944117144).epsilon(1e-13));
}

TEST_CASE("complex closed forms at l = 1 through the phase convention") {
  const double x = 0.7;
  const std::complex<double> z{0.0, x};
  const std::complex<double> I{0.0, 1.0};
  const auto j1 = std::sin(z) / (z * z) - std::cos(z) / z;
  const auto h1 = -std::exp(I * z) / z * (1.0 + I / z);
  CHECK(std::abs(j1 - I * sph_bessel_j_imag(1, x)) < 1e-14);
  CHECK(std::abs(h1 - (-I) * sph_hankel1_imag(1, x)) < 1e-14);
}

TEST_CASE("all orders match the arbitrary-precision oracle") {
  // Grouped by argument so each row is computed once at the largest order.
  double worst = 0.0;
  for (const auto &ref : kBesselRef) {
    const auto row = modified_sph_bessel(1000, ref.x);
    const auto fi = ReferenceValue::parse(ref.first);
    const auto fk = ReferenceValue::parse(ref.third);
    const auto di = ReferenceValue::parse(ref.ric_first);
    const auto dk = ReferenceValue::parse(ref.ric_third);

    const ScaledReal i = row.first(ref.l);
    const ScaledReal k = row.third(ref.l);
    const ScaledReal ri{row.ric_first[ref.l], row.first_exponent[ref.l]};
    const ScaledReal rk{row.ric_third[ref.l], row.third_exponent[ref.l]};

    const double e1 = rel_diff(1.0, i.log_abs(), fi.sign, fi.log_abs);
    const double e2 = rel_diff(1.0, k.log_abs(), fk.sign, fk.log_abs);
    const double e3 = rel_diff(ri.mantissa > 0 ? 1.0 : -1.0, ri.log_abs(), di.sign, di.log_abs);
    const double e4 = rel_diff(rk.mantissa > 0 ? 1.0 : -1.0, rk.log_abs(), dk.sign, dk.log_abs);
    INFO("l=" << ref.l << " x=" << ref.x << " errs " << e1 << " " << e2 << " " << e3 << " "
              << e4);
    CHECK(e1 < 1e-10);
    CHECK(e2 < 1e-10);
    CHECK(e3 < 1e-8); // oracle derivative is numerical
    CHECK(e4 < 1e-8);
    worst = std::max({worst, e1, e2});
  }
  MESSAGE("worst function error vs oracle: " << worst);
}

TEST_CASE("l_max = 800 at x = 50 against the oracle to 1e-8") {
  const auto row = modified_sph_bessel(800, 50.0);
  for (const auto &ref : kBesselRef) {
    if (ref.x != 50.0 || ref.l > 800)
      continue;
    const auto fi = ReferenceValue::parse(ref.first);
    const auto fk = ReferenceValue::parse(ref.third);
    CHECK(rel_diff(1.0, row.first(ref.l).log_abs(), fi.sign, fi.log_abs) < 1e-8);
    CHECK(rel_diff(1.0, row.third(ref.l).log_abs(), fk.sign, fk.log_abs) < 1e-8);
  }
}

TEST_CASE("mantissas stay finite and nonzero across the supported range") {
  for (double x : {1e-6, 1e-3, 1.0, 1e2, 1e4}) {
    const auto row = modified_sph_bessel(1000, x);
    for (int l = 0; l <= 1000; ++l) {
      REQUIRE(std::isfinite(row.first_kind[l]));
      REQUIRE(std::isfinite(row.third_kind[l]));
      REQUIRE(row.first_kind[l] != 0.0);
      REQUIRE(row.third_kind[l] != 0.0);
      REQUIRE(std::isfinite(row.ric_first[l]));
      REQUIRE(std::isfinite(row.ric_third[l]));
    }
  }
}

TEST_CASE("Wronskian property over random orders and arguments") {
  // j_l h_l' - j_l' h_l = i / z^2 at z = ix reduces to
  // i_l [x k_l]' - [x i_l]' k_l = -1/x.
  std::mt19937_64 gen(20240917);
  std::uniform_int_distribution<int> order(0, 1000);
  std::uniform_real_distribution<double> log_x(std::log(1e-6), std::log(1e4));
  for (int trial = 0; trial < 300; ++trial) {
    const int l = order(gen);
    const double x = std::exp(log_x(gen));
    const auto row = modified_sph_bessel(l, x);
    const double di = row.first_log_derivative(l);
    const double dk = row.third_log_derivative(l);
    // i k (dk - di) = -1/x, evaluated in logs
    const ScaledReal ik = row.first(l) * row.third(l);
    const double lhs_log = ik.log_abs() + std::log(di - dk);
    INFO("l=" << l << " x=" << x);
    CHECK(std::abs(std::expm1(lhs_log + std::log(x))) < 1e-10);
  }
}

TEST_CASE("both recurrence directions agree with direct forms at moderate orders") {
  // Downward (first kind) against the convergent power series, upward (third
  // kind) against the terminating sum; all terms positive in both.
  auto series_i = [](int l, double x) {
    double lead = 1.0;
    for (int j = 1; j <= l; ++j)
      lead *= x / (2.0 * j + 1.0);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= 0.5 * x * x / (k * (2.0 * l + 2.0 * k + 1.0));
      sum += term;
      if (term < 1e-18 * sum)
        break;
    }
    return lead * sum;
  };
  auto finite_k = [](int l, double x) {
    double sum = 0.0, coeff = 1.0; // (l+j)!/(j!(l-j)!) / (2x)^j
    for (int j = 0; j <= l; ++j) {
      if (j > 0)
        coeff *= (l + j) * (l - j + 1.0) / (j * 2.0 * x);
      sum += coeff;
    }
    return std::exp(-x) / x * sum;
  };
  for (double x : {0.1, 0.5, 1.0, 3.0, 10.0}) {
    const auto row = modified_sph_bessel(20, x);
    for (int l = 0; l <= 20; ++l) {
      INFO("l=" << l << " x=" << x);
      CHECK(row.first(l).value() == doctest::Approx(series_i(l, x)).epsilon(1e-12));
      CHECK(row.third(l).value() == doctest::Approx(finite_k(l, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("Hankel squares carry the alternating sign") {
  const double x = 2.0;
  const auto row = modified_sph_bessel(6, x);
  for (int l = 0; l <= 6; ++l) {
    const double h = sph_hankel1_imag(l, x);
    // [h_l(ix)]^2 = ((-i)^l h)^2 = (-1)^l h^2
    const double expected = ((l % 2) ? -1.0 : 1.0) * h * h;
    CHECK(row.hankel_square(l).value() == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("Bessel domain and configuration errors") {
  CHECK_THROWS_AS(modified_sph_bessel(5, 0.0), DomainError);
  CHECK_THROWS_AS(modified_sph_bessel(5, -1.0), DomainError);
  CHECK_THROWS_AS(modified_sph_bessel(5, std::nan("")), DomainError);
  CHECK_THROWS_AS(modified_sph_bessel(kBesselOrderCap + 1, 1.0), ConfigurationError);
}

TEST_CASE("Legendre closed forms and pole limits") {
  CHECK(assoc_legendre_row(2, std::numbers::pi / 2).value(0) == doctest::Approx(-0.5));
  const auto pole = assoc_legendre_row(1, 0.0);
  CHECK(pole.value(0) == doctest::Approx(1.0));
  CHECK(pole.m_over_sin(1) == doctest::Approx(-1.0));
  const auto south = assoc_legendre_row(3, std::numbers::pi);
  CHECK(south.value(0) == doctest::Approx(-1.0));
  for (int l : {0, 4, 17, 300})
    CHECK(assoc_legendre_row(l, 0.0).value(0) == doctest::Approx(1.0));
  // m P/sin near the pole approaches the pole limit continuously
  const auto near = assoc_legendre_row(1, 1e-8);
  CHECK(near.m_over_sin(1) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(assoc_legendre_row(3, -0.1), DomainError);
  CHECK_THROWS_AS(assoc_legendre_row(3, 3.2), DomainError);
}

TEST_CASE("Legendre rows match the arbitrary-precision oracle") {
  for (const auto &ref : kLegendreRef) {
    const auto row = assoc_legendre_row(ref.l, ref.theta);
    const auto v = ReferenceValue::parse(ref.value);
    const auto d = ReferenceValue::parse(ref.dtheta);
    INFO("l=" << ref.l << " m=" << ref.m << " theta=" << ref.theta);
    const double got = row.value(ref.m);
    if (std::isfinite(got) && std::abs(got) > 1e-280) {
      CHECK(rel_diff(got > 0 ? 1.0 : -1.0, std::log(std::abs(got)), v.sign, v.log_abs) < 1e-10);
    }
    // derivative compared relative to the row scale (derivative may vanish)
    const double dscale = std::max(std::abs(d.value()), std::abs(v.value()) * ref.l);
    if (std::isfinite(dscale) && dscale > 1e-280)
      CHECK(std::abs(row.derivative(ref.m) - d.value()) / dscale < 1e-9);
  }
}

TEST_CASE("normalised Legendre sums reproduce the addition theorem") {
  for (int l : {1, 5, 30, 400, 1000}) {
    for (double theta : {0.0, 0.3, 1.0, 2.0, std::numbers::pi}) {
      const auto row = assoc_legendre_row(l, theta);
      double s0 = 0.0, s1 = 0.0;
      for (int m = 0; m <= l; ++m) {
        const double w = m == 0 ? 1.0 : 2.0;
        s0 += w * row.normalized[m] * row.normalized[m];
        s1 += w * (row.normalized_m_over_sin[m] * row.normalized_m_over_sin[m] +
                   row.normalized_dtheta[m] * row.normalized_dtheta[m]);
      }
      INFO("l=" << l << " theta=" << theta);
      CHECK(s0 == doctest::Approx(1.0).epsilon(1e-11));
      CHECK(s1 == doctest::Approx(l * (l + 1.0)).epsilon(1e-11));
    }
  }
}
