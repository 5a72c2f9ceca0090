#pragma once

namespace jtwpa {

// CODATA values, compiled in. Not configurable: every derived quantity in the
// toolkit (inductances, photon energies, critical currents) must agree across
// modules, so there is a single source of truth.
struct PhysicalConstants {
    static constexpr double flux_quantum   = 2.067833848e-15;  // Wb
    static constexpr double reduced_planck = 1.054571817e-34;  // J s
    static constexpr double electron_charge = 1.602176634e-19; // C
    static constexpr double boltzmann      = 1.380649e-23;     // J/K
};

constexpr double pi = 3.14159265358979323846;

inline constexpr const char* toolkit_name = "jtwpa";
inline constexpr const char* toolkit_version = "0.1.0";

} // namespace jtwpa
