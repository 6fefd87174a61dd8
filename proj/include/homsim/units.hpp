#ifndef HOMSIM_UNITS_HPP
#define HOMSIM_UNITS_HPP

#include <cmath>
#include <stdexcept>

namespace homsim {

inline constexpr double speed_of_light = 2.99792458e8; // m/s
inline constexpr double pi = 3.14159265358979323846;

inline constexpr double fs = 1e-15;
inline constexpr double nm = 1e-9;

// Small-detuning linearization about a carrier wavelength:
// |dω/dλ| = 2πc/λ².  The sign convention (whether a positive nm offset
// maps to a positive angular detuning) is configurable; default maps
// positive nm to positive rad/s, matching how line positions are quoted
// in sample definitions.
inline double nm_to_angular_detuning(double delta_nm, double center_wavelength_nm,
                                     double sign_convention = +1.0) {
    if (center_wavelength_nm <= 0.0)
        throw std::invalid_argument("nm_to_angular_detuning: center wavelength must be positive");
    const double lambda0 = center_wavelength_nm * nm;
    return sign_convention * 2.0 * pi * speed_of_light * (delta_nm * nm) / (lambda0 * lambda0);
}

inline double angular_detuning_to_nm(double detuning, double center_wavelength_nm,
                                     double sign_convention = +1.0) {
    if (center_wavelength_nm <= 0.0)
        throw std::invalid_argument("angular_detuning_to_nm: center wavelength must be positive");
    const double lambda0 = center_wavelength_nm * nm;
    return sign_convention * detuning * lambda0 * lambda0 / (2.0 * pi * speed_of_light) / nm;
}

// Spectral width conversion nm -> Hz (not angular) at a carrier wavelength.
inline double nm_width_to_hz(double width_nm, double center_wavelength_nm) {
    const double lambda0 = center_wavelength_nm * nm;
    return speed_of_light * (width_nm * nm) / (lambda0 * lambda0);
}

} // namespace homsim

#endif
