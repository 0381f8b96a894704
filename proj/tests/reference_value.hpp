#pragma once

#include <cmath>
#include <string>
#include <string_view>

// Decimal strings from the arbitrary-precision oracles can exceed the double
// exponent range; compare them through natural logarithms instead.
struct ReferenceValue {
  double sign = 1.0;
  double log_abs = 0.0;

  static ReferenceValue parse(std::string_view text) {
    ReferenceValue out;
    std::string s(text);
    const auto e = s.find_first_of("eE");
    double mant = std::stod(s.substr(0, e));
    long exp10 = (e == std::string::npos) ? 0 : std::stol(s.substr(e + 1));
    out.sign = mant < 0 ? -1.0 : 1.0;
    out.log_abs = std::log(std::abs(mant)) + exp10 * std::log(10.0);
    return out;
  }

  double value() const { return sign * std::exp(log_abs); }
};
