#pragma once

namespace ercav {

/// Fundamental constants, CODATA 2018, SI base units, 9 significant figures.
/// Immutable; every operation that needs them takes a (defaulted) reference so
/// consistency checks can inject perturbed values.
struct PhysConstants {
    double c = 299792458.0;       // speed of light in vacuum, m/s
    double e = 1.60217663e-19;    // elementary charge, C
    double m_e = 9.10938370e-31;  // electron mass, kg
    double eps0 = 8.85418781e-12; // vacuum permittivity, F/m
};

inline constexpr PhysConstants kCodata2018{};

// Host-crystal reference data for default ion densities. The yttrium site
// density of Y2SiO5 (1.87e22 cm^-3) times the nominal dopant fraction gives
// the active ion density; both are exposed as plain config values because the
// substitution fraction per crystallographic site is sample-dependent.
inline constexpr double kYsoYttriumSiteDensity = 1.87e28; // 1/m^3
inline constexpr double kDefaultDopantFraction = 2.0e-4;  // 0.02 %

inline constexpr double default_ion_density() {
    return kYsoYttriumSiteDensity * kDefaultDopantFraction;
}

}  // namespace ercav
