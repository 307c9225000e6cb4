#pragma once

#include <stdexcept>

#include "ercav/constants.hpp"

namespace ercav {

/// Optical frequency in Hz, positive by construction.
struct OpticalFrequency {
    double hz;

    explicit OpticalFrequency(double value_hz) : hz(value_hz) {
        if (!(hz > 0.0))
            throw std::domain_error("optical frequency must be positive");
    }
};

inline OpticalFrequency freq_from_wavelength(double lambda0_m,
                                             const PhysConstants& k = kCodata2018) {
    if (!(lambda0_m > 0.0))
        throw std::domain_error("wavelength must be positive");
    return OpticalFrequency{k.c / lambda0_m};
}

inline double wavelength_from_frequency(OpticalFrequency nu,
                                        const PhysConstants& k = kCodata2018) {
    return k.c / nu.hz;
}

/// FWHM linewidth of a resonance at nu0 with quality factor q.
inline double linewidth_from_q(OpticalFrequency nu0, double q) {
    if (!(q > 0.0))
        throw std::domain_error("quality factor must be positive");
    return nu0.hz / q;
}

}  // namespace ercav
