#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "ercav/core.hpp"
#include "ercav/field_grid.hpp"

namespace ercav {

/// A single cavity resonance. The mode volume is stored in Purcell units of
/// (lambda0/n)^3, with n the refractive index at the field maximum.
struct CavityMode {
    double lambda0; // resonance wavelength, m
    double q;       // quality factor
    double v_norm;  // mode volume in (lambda0/n)^3
    double n;       // refractive index at the field maximum

    void validate() const {
        if (!(lambda0 > 0))
            throw std::domain_error("resonance wavelength must be positive");
        if (!(q > 0))
            throw std::domain_error("quality factor must be positive");
        if (!(v_norm > 0))
            throw std::domain_error("normalized mode volume must be positive");
        if (!(n >= 1.0))
            throw std::domain_error("refractive index must be >= 1");
    }

    OpticalFrequency frequency(const PhysConstants& k = kCodata2018) const {
        return freq_from_wavelength(lambda0, k);
    }

    /// FWHM linewidth kappa = nu / Q, Hz.
    double linewidth(const PhysConstants& k = kCodata2018) const {
        return linewidth_from_q(frequency(k), q);
    }

    double physical_volume() const {
        const double unit = lambda0 / n;
        return v_norm * unit * unit * unit;
    }
};

/// Spontaneous-emission enhancement for an emitter in the mode:
/// (3 / 4 pi^2) (Q / V_norm) * overlap, where overlap = |E_ion . d|^2/|E_max|^2
/// carries both position and dipole orientation.
inline double purcell_factor(const CavityMode& mode, double overlap) {
    mode.validate();
    if (!(overlap >= 0.0) || !(overlap <= 1.0))
        throw std::domain_error("dipole-field overlap must lie in [0, 1]");
    constexpr double prefactor = 3.0 / (4.0 * std::numbers::pi * std::numbers::pi);
    return prefactor * (mode.q / mode.v_norm) * overlap;
}

struct ModeVolume {
    double v_physical; // m^3
    double v_norm;     // in (lambda0 / n_at_max)^3
    double n_at_max;   // sqrt(eps) at the maximizing cell
    std::size_t max_cell;
};

/// Mode volume as integral of eps|E|^2 over the grid divided by its maximum
/// (midpoint rule per cell). Scale-invariant in E.
inline ModeVolume mode_volume(const FieldGrid& grid, double lambda0) {
    grid.validate();
    if (!(lambda0 > 0))
        throw std::domain_error("wavelength must be positive");
    double sum = 0.0;
    double max_density = 0.0;
    std::size_t max_cell = 0;
    const std::size_t n = grid.cell_count();
    for (std::size_t i = 0; i < n; ++i) {
        const double u = grid.energy_density(i);
        sum += u;
        if (u > max_density) {
            max_density = u;
            max_cell = i;
        }
    }
    ModeVolume result{};
    result.v_physical = sum * grid.cell_volume() / max_density;
    result.n_at_max = std::sqrt(grid.eps[max_cell]);
    const double unit = lambda0 / result.n_at_max;
    result.v_norm = result.v_physical / (unit * unit * unit);
    result.max_cell = max_cell;
    return result;
}

/// Gas-deposition tuning: resonance shift linear in the deposited layer
/// thickness, Q held constant (first-order model).
struct TuningState {
    double deposited_thickness = 0.0; // equivalent uniform layer, m
    double sensitivity = 0.0;         // resonance shift per thickness, Hz/m (< 0 red-shifts)

    void validate() const {
        if (!(deposited_thickness >= 0.0))
            throw std::domain_error("deposited thickness must be nonnegative");
    }
};

inline CavityMode tuned_resonance(const CavityMode& mode, const TuningState& state,
                                  const PhysConstants& k = kCodata2018) {
    mode.validate();
    state.validate();
    const double nu = mode.frequency(k).hz + state.sensitivity * state.deposited_thickness;
    if (!(nu > 0))
        throw std::domain_error("tuning shifted the resonance to a nonpositive frequency");
    CavityMode shifted = mode;
    shifted.lambda0 = k.c / nu;
    return shifted;
}

/// Effective homogeneous ensemble line coupled to the cavity; inhomogeneous
/// broadening is folded into gamma_a while it stays far below the cavity
/// linewidth.
struct EnsembleLine {
    double nu_a;          // line center, Hz
    double gamma_a;       // FWHM, Hz
    double cooperativity; // C >= 0

    void validate() const {
        if (!(nu_a > 0))
            throw std::domain_error("ensemble line frequency must be positive");
        if (!(gamma_a > 0))
            throw std::domain_error("ensemble linewidth must be positive");
        if (!(cooperativity >= 0))
            throw std::domain_error("cooperativity must be nonnegative");
    }
};

/// Relative power transmission of a two-sided, symmetrically coupled cavity,
/// optionally dressed by an ensemble line:
///   t(nu) = (kappa/2) / (i(nu - nu_c) + kappa/2 + Sigma(nu))
///   Sigma(nu) = (C kappa/2)(gamma_a/2) / (i(nu - nu_a) + gamma_a/2)
/// normalized so the bare cavity transmits 1 on resonance. With the line on
/// resonance the peak drops to 1/(1+C)^2.
inline double cavity_transmission(OpticalFrequency nu, const CavityMode& mode,
                                  const std::optional<EnsembleLine>& line = std::nullopt,
                                  const PhysConstants& k = kCodata2018) {
    mode.validate();
    const double kappa = mode.linewidth(k);
    const double nu_c = mode.frequency(k).hz;
    const std::complex<double> i(0.0, 1.0);
    std::complex<double> denom = i * (nu.hz - nu_c) + kappa / 2.0;
    if (line) {
        line->validate();
        const std::complex<double> sigma = (line->cooperativity * kappa / 2.0) *
                                           (line->gamma_a / 2.0) /
                                           (i * (nu.hz - line->nu_a) + line->gamma_a / 2.0);
        denom += sigma;
    }
    const std::complex<double> t = (kappa / 2.0) / denom;
    return std::norm(t);
}

}  // namespace ercav
