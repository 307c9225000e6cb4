#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ercav/constants.hpp"

namespace ercav {

enum class DipoleAxis { d1, d2, b };

/// Bulk parameters of the target optical transition.
struct TransitionParams {
    double lambda0;    // vacuum wavelength, m
    double tau_bulk;   // measured excited-state lifetime, s
    double alpha_max;  // peak absorption coefficient, 1/m
    double fwhm_abs;   // absorption FWHM, Hz
    double inhom_fwhm; // inhomogeneous FWHM, Hz
    double n;          // refractive index
    double density;    // active ion number density, 1/m^3
    DipoleAxis dipole_axis_label = DipoleAxis::d1;

    void validate() const {
        if (!(lambda0 >= 1e-6) || !(lambda0 <= 2e-6))
            throw std::domain_error("wavelength outside the toolkit's 1-2 um validity domain");
        if (!(tau_bulk > 0) || !(alpha_max > 0) || !(fwhm_abs > 0) || !(inhom_fwhm > 0) ||
            !(n >= 1) || !(density > 0))
            throw std::domain_error("all transition parameters must be positive");
    }
};

/// The 1536 nm transition with literature bulk values and the default ion
/// density (0.02 % substitution of the documented Y site density).
inline TransitionParams er1536() {
    TransitionParams p{};
    p.lambda0 = 1536e-9;
    p.tau_bulk = 11.4e-3;
    p.alpha_max = 2450.0; // 24.5 1/cm, field along D1
    p.fwhm_abs = 510e6;
    p.inhom_fwhm = 500e6;
    p.n = 1.785;
    p.density = default_ion_density();
    p.dipole_axis_label = DipoleAxis::d1;
    return p;
}

/// Medium correction conventions for the emission rate. Each convention is a
/// single multiplier applied to the vacuum-rate formula; the same multiplier
/// divides the integrated absorption when extracting an oscillator strength,
/// which makes the absorption -> oscillator strength -> emission rate chain
/// convention-independent by construction.
enum class LocalFieldConvention {
    none,           // 1
    index_only,     // n
    index_lorentz,  // n (n^2 + 2)/3
    virtual_cavity, // n ((n^2 + 2)/3)^2
};

inline constexpr LocalFieldConvention kDefaultConvention = LocalFieldConvention::index_lorentz;

struct RadRateConvention {
    LocalFieldConvention id;
    std::string_view name;

    double correction(double n) const {
        const double lorentz = (n * n + 2.0) / 3.0;
        switch (id) {
        case LocalFieldConvention::none:
            return 1.0;
        case LocalFieldConvention::index_only:
            return n;
        case LocalFieldConvention::index_lorentz:
            return n * lorentz;
        case LocalFieldConvention::virtual_cavity:
            return n * lorentz * lorentz;
        }
        throw std::domain_error("unknown local-field convention");
    }
};

inline RadRateConvention convention(LocalFieldConvention c = kDefaultConvention) {
    switch (c) {
    case LocalFieldConvention::none:
        return {c, "none"};
    case LocalFieldConvention::index_only:
        return {c, "index-only"};
    case LocalFieldConvention::index_lorentz:
        return {c, "index-lorentz"};
    case LocalFieldConvention::virtual_cavity:
        return {c, "virtual-cavity"};
    }
    throw std::domain_error("unknown local-field convention");
}

inline RadRateConvention convention_by_name(std::string_view name) {
    for (auto c : {LocalFieldConvention::none, LocalFieldConvention::index_only,
                   LocalFieldConvention::index_lorentz, LocalFieldConvention::virtual_cavity})
        if (convention(c).name == name)
            return convention(c);
    throw std::domain_error("unknown local-field convention '" + std::string(name) + "'");
}

/// Oscillator strength from a Lorentzian absorption line:
///   f = (4 eps0 m_e c n / e^2) (1/N) * integral(alpha dnu) / L(n)
/// with integral(alpha dnu) = (pi/2) alpha_max fwhm and L(n) the correction of
/// the selected convention.
inline double oscillator_strength(double alpha_max, double fwhm, double density, double n,
                                  const RadRateConvention& conv = convention(),
                                  const PhysConstants& k = kCodata2018) {
    if (!(alpha_max > 0) || !(fwhm > 0) || !(density > 0) || !(n >= 1))
        throw std::domain_error("absorption inputs must be positive (and n >= 1)");
    const double integral = std::numbers::pi / 2.0 * alpha_max * fwhm;
    return (4.0 * k.eps0 * k.m_e * k.c * n / (k.e * k.e)) * integral /
           (density * conv.correction(n));
}

/// Spontaneous emission rate of the transition:
///   Gamma = (2 pi e^2 f / (eps0 m_e c lambda0^2)) * L(n).
inline double radiative_rate(double f, double lambda0, double n,
                             const RadRateConvention& conv = convention(),
                             const PhysConstants& k = kCodata2018) {
    if (!(f > 0))
        throw std::domain_error("oscillator strength must be positive");
    if (!(lambda0 > 0) || !(n >= 1))
        throw std::domain_error("wavelength must be positive and n >= 1");
    const double vacuum =
        2.0 * std::numbers::pi * k.e * k.e * f / (k.eps0 * k.m_e * k.c * lambda0 * lambda0);
    return vacuum * conv.correction(n);
}

/// Fraction of the total excited-state decay that proceeds through the given
/// radiative path.
inline double branching_ratio(double gamma_rad, double tau_total) {
    if (!(gamma_rad > 0) || !(tau_total > 0))
        throw std::domain_error("rate and lifetime must be positive");
    const double beta = gamma_rad * tau_total;
    if (beta > 1.0 + 1e-9)
        throw std::domain_error("radiative rate exceeds the total decay rate (beta > 1)");
    return beta;
}

/// Lifetime with the cavity-coupled decay path enhanced by F_eff; only that
/// path (weight beta) is sped up.
inline double purcell_lifetime(double tau_bulk, double f_eff, double beta) {
    if (!(tau_bulk > 0))
        throw std::domain_error("bulk lifetime must be positive");
    if (!(f_eff >= 0))
        throw std::domain_error("enhancement must be nonnegative");
    if (!(beta > 0) || !(beta <= 1))
        throw std::domain_error("branching ratio must lie in (0, 1]");
    return tau_bulk / (1.0 + beta * f_eff);
}

/// Exact inverse of purcell_lifetime.
inline double effective_purcell_from_lifetimes(double tau_ref, double tau_cav, double beta) {
    if (!(tau_ref > 0) || !(tau_cav > 0))
        throw std::domain_error("lifetimes must be positive");
    if (tau_cav > tau_ref)
        throw std::domain_error("cavity lifetime exceeds the reference lifetime");
    if (!(beta > 0) || !(beta <= 1))
        throw std::domain_error("branching ratio must lie in (0, 1]");
    return (tau_ref / tau_cav - 1.0) / beta;
}

/// Absorbed fraction over a propagation length, with an optional transverse
/// confinement (mode overlap) factor scaling the bulk absorption coefficient.
inline double beer_lambert(double alpha, double length, double confinement = 1.0) {
    if (!(alpha > 0) || !(length > 0))
        throw std::domain_error("absorption coefficient and length must be positive");
    if (!(confinement > 0) || !(confinement <= 1))
        throw std::domain_error("confinement must lie in (0, 1]");
    return -std::expm1(-confinement * alpha * length);
}

/// Confinement factor that reproduces a given absorbed fraction.
inline double confinement_for_attenuation(double alpha, double length, double absorbed) {
    if (!(alpha > 0) || !(length > 0))
        throw std::domain_error("absorption coefficient and length must be positive");
    if (!(absorbed >= 0) || !(absorbed < 1))
        throw std::domain_error("absorbed fraction must lie in [0, 1)");
    return -std::log1p(-absorbed) / (alpha * length);
}

/// Transmission dip of a resonant ensemble: dip = 1 - 1/(1+C)^2.
inline double cooperativity_to_dip(double cooperativity) {
    if (!(cooperativity >= 0))
        throw std::domain_error("cooperativity must be nonnegative");
    const double denom = (1.0 + cooperativity) * (1.0 + cooperativity);
    return 1.0 - 1.0 / denom;
}

inline double dip_to_cooperativity(double dip) {
    if (!(dip >= 0) || !(dip < 1))
        throw std::domain_error("dip must lie in [0, 1)");
    return 1.0 / std::sqrt(1.0 - dip) - 1.0;
}

/// Homogeneous two-level saturation of the ensemble absorption, s = I/I_sat.
inline double saturated_cooperativity(double c0, double s) {
    if (!(c0 >= 0) || !(s >= 0))
        throw std::domain_error("cooperativity and saturation must be nonnegative");
    return c0 / (1.0 + s);
}

}  // namespace ercav
