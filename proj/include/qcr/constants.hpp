#pragma once

#include <numbers>

/// SI constants (2019 exact definitions) and unit helpers.
namespace qcr::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double planck = 6.62607015e-34;          // J s
inline constexpr double hbar = planck / (2.0 * pi);       // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double boltzmann = 1.380649e-23;         // J/K
inline constexpr double von_klitzing = planck / (elementary_charge * elementary_charge);  // Ohm

}  // namespace qcr::constants

namespace qcr::units {

inline constexpr double micro_eV = 1e-6 * constants::elementary_charge;
inline constexpr double micro_volt = 1e-6;
inline constexpr double milli_kelvin = 1e-3;
inline constexpr double nano_ampere = 1e-9;
inline constexpr double kilo_ohm = 1e3;
inline constexpr double femto_farad = 1e-15;
inline constexpr double nano_second = 1e-9;

/// Angular frequency for an ordinary frequency given in GHz.
constexpr double angular_from_GHz(double f_GHz) { return 2.0 * constants::pi * f_GHz * 1e9; }
constexpr double angular_from_MHz(double f_MHz) { return 2.0 * constants::pi * f_MHz * 1e6; }
constexpr double GHz_from_angular(double omega) { return omega / (2.0 * constants::pi) / 1e9; }
constexpr double MHz_from_angular(double omega) { return omega / (2.0 * constants::pi) / 1e6; }

}  // namespace qcr::units
