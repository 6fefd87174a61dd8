#ifndef HOMSIM_SPECTRAL_FIELD_HPP
#define HOMSIM_SPECTRAL_FIELD_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "homsim/fft.hpp"
#include "homsim/grid.hpp"
#include "homsim/units.hpp"

namespace homsim {

// Bandpass filter intensity profile: trapezoid in wavelength, clamped below
// at magnitude_floor (relative to the unit peak).
struct FilterSpec {
    double center_wavelength_nm = 815.0;
    double top_width_nm = 15.5;
    double slope_width_nm = 3.3;
    double magnitude_floor = 1e-6;

    void validate() const {
        if (top_width_nm <= 0.0 || slope_width_nm <= 0.0)
            throw std::invalid_argument("FilterSpec: widths must be positive");
        if (!(magnitude_floor > 0.0 && magnitude_floor < 1.0))
            throw std::invalid_argument("FilterSpec: magnitude_floor must be in (0,1)");
    }
};

// Phase-matching envelope sinc(nu^2 * s). The argument scale s (units s^2)
// is either given explicitly or calibrated from the measured SPDC intensity
// FWHM in nm.
struct PhaseMatchSpec {
    double intensity_fwhm_nm = 0.0; // set one of the two
    double argument_scale = 0.0;    // s in sinc(nu^2 s)

    void validate() const {
        const bool has_fwhm = intensity_fwhm_nm > 0.0;
        const bool has_scale = argument_scale > 0.0;
        if (has_fwhm == has_scale)
            throw std::invalid_argument(
                "PhaseMatchSpec: set exactly one of intensity_fwhm_nm, argument_scale");
    }
};

inline double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

// |Phi(nu)|^2 at a single detuning, relative to the grid's carrier.
inline double trapezoid_intensity_at(const FilterSpec& filter, double grid_center_nm,
                                     double detuning) {
    // filter center expressed as an angular detuning from the grid carrier
    const double filter_center =
        nm_to_angular_detuning(filter.center_wavelength_nm - grid_center_nm, grid_center_nm);
    const double half_top =
        0.5 * nm_to_angular_detuning(filter.top_width_nm, grid_center_nm);
    const double slope = nm_to_angular_detuning(filter.slope_width_nm, grid_center_nm);

    const double x = std::abs(detuning - filter_center);
    double v;
    if (x <= half_top)
        v = 1.0;
    else if (x <= half_top + slope)
        v = 1.0 - (x - half_top) / slope;
    else
        v = 0.0;
    return std::max(v, filter.magnitude_floor);
}

inline std::vector<double> trapezoid_intensity(const FilterSpec& filter,
                                               const SpectralGrid& grid) {
    filter.validate();
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        out[i] = trapezoid_intensity_at(filter, grid.center_wavelength_nm(), grid[i]);
    return out;
}

// Minimum-phase reconstruction: M(nu) -> M(nu) exp(i phi(nu)) with
// phi = -(1/pi) P.V. integral ln M(nu') / (nu' - nu) dnu',
// the Kramers-Kronig pair of the log-magnitude, computed by FFT with
// >= 4x zero-padding.
inline ComplexSpectrum minimum_phase(const std::vector<double>& magnitude,
                                     const SpectralGrid& grid) {
    if (magnitude.size() != grid.size())
        throw std::invalid_argument("minimum_phase: length mismatch with grid");
    std::vector<double> log_mag(magnitude.size());
    for (std::size_t i = 0; i < magnitude.size(); ++i) {
        if (!(magnitude[i] > 0.0))
            throw std::invalid_argument("minimum_phase: magnitude must be positive everywhere");
        log_mag[i] = std::log(magnitude[i]);
    }
    const std::vector<double> phase = hilbert_transform(log_mag, 4);
    std::vector<std::complex<double>> values(magnitude.size());
    for (std::size_t i = 0; i < magnitude.size(); ++i)
        values[i] = std::polar(magnitude[i], -phase[i]);
    return ComplexSpectrum(grid, std::move(values));
}

namespace detail {
// x > 0 where sinc(x)^2 = 1/2, by bisection.
inline double sinc_half_intensity_root() {
    double lo = 0.0, hi = pi;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double s = sinc(mid);
        if (s * s > 0.5) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}
} // namespace detail

// Resolve the sinc argument scale s (s^2 units) from the spec, calibrating
// from the intensity FWHM when needed: sinc(nu_half^2 s)^2 = 1/2 at
// nu_half = half the FWHM in angular frequency.
inline double phase_matching_scale(const PhaseMatchSpec& pm, double center_wavelength_nm) {
    pm.validate();
    if (pm.argument_scale > 0.0) return pm.argument_scale;
    const double fwhm = nm_to_angular_detuning(pm.intensity_fwhm_nm, center_wavelength_nm);
    const double nu_half = 0.5 * fwhm;
    if (!(nu_half > 0.0))
        throw std::runtime_error("phase_matching_scale: calibration failed to bracket a root");
    const double x_half = detail::sinc_half_intensity_root();
    return x_half / (nu_half * nu_half);
}

inline std::vector<double> phase_matching_amplitude(const PhaseMatchSpec& pm,
                                                    const SpectralGrid& grid) {
    const double s = phase_matching_scale(pm, grid.center_wavelength_nm());
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        out[i] = sinc(grid[i] * grid[i] * s);
    return out;
}

// F(nu) = F_bp(nu) * Phi(nu), normalized so integral |F|^2 dnu = 1.
inline ComplexSpectrum biphoton_amplitude(const PhaseMatchSpec& pm, const FilterSpec& filter,
                                          const SpectralGrid& grid) {
    const std::vector<double> bp = phase_matching_amplitude(pm, grid);
    std::vector<double> mag = trapezoid_intensity(filter, grid);
    for (auto& m : mag) m = std::sqrt(m);
    ComplexSpectrum phi = minimum_phase(mag, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) phi.values[i] *= bp[i];

    const double norm = trapezoid_integral(grid, [&](std::size_t i) {
        return std::norm(phi.values[i]);
    });
    if (!(norm > 0.0))
        throw std::runtime_error("biphoton_amplitude: field has zero power on the grid");
    const double scale = 1.0 / std::sqrt(norm);
    for (auto& v : phi.values) v *= scale;
    return phi;
}

// Default grid for a given filter: half-span 4x the filter half-bandwidth.
inline SpectralGrid default_grid(const FilterSpec& filter, double center_wavelength_nm,
                                 std::size_t n_points = 16384) {
    const double half_bw =
        0.5 * nm_to_angular_detuning(filter.top_width_nm + 2.0 * filter.slope_width_nm,
                                     center_wavelength_nm);
    return build_grid(center_wavelength_nm, 4.0 * half_bw, n_points);
}

} // namespace homsim

#endif
