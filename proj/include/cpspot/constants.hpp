#pragma once

#include <numbers>
#include <string_view>

// CODATA 2018 values, SI units throughout.
namespace cpspot::constants {

inline constexpr std::string_view version = "CODATA-2018";

inline constexpr double hbar = 1.054571817e-34;         // J s
inline constexpr double planck = 6.62607015e-34;        // J s
inline constexpr double speed_of_light = 299792458.0;   // m/s
inline constexpr double epsilon0 = 8.8541878128e-12;    // F/m
inline constexpr double mu0 = 1.25663706212e-6;         // N/A^2
inline constexpr double boltzmann = 1.380649e-23;       // J/K
inline constexpr double atomic_mass = 1.66053906660e-27; // kg

inline constexpr double pi = std::numbers::pi;

} // namespace cpspot::constants
