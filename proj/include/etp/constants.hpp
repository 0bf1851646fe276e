#pragma once

// CODATA 2018 exact / recommended values, SI units.
namespace etp::constants {

inline constexpr double elementary_charge = 1.602176634e-19;   // C
inline constexpr double electron_mass = 9.1093837015e-31;      // kg
inline constexpr double hbar = 1.054571817e-34;                // J s
inline constexpr double speed_of_light = 299792458.0;          // m/s
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m

// m_e c^2 expressed in eV.
inline constexpr double electron_rest_energy_ev = 510998.95;    // m_e c^2 in eV

inline constexpr double pi = 3.14159265358979323846;

}  // namespace etp::constants
