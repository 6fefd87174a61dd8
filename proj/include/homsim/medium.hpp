#ifndef HOMSIM_MEDIUM_HPP
#define HOMSIM_MEDIUM_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <variant>
#include <vector>

#include "homsim/grid.hpp"
#include "homsim/units.hpp"

namespace homsim {

// Resonant Lorentzian line: detuning of the resonance from the biphoton
// center (quoted in nm), optical thickness alpha*L, and coherence time T2.
struct LorentzLine {
    double detuning_nm = 0.0;
    double optical_thickness = 0.0; // alpha * L
    double t2 = 0.0;                // seconds

    void validate() const {
        if (optical_thickness < 0.0)
            throw std::invalid_argument("LorentzLine: optical thickness must be >= 0");
        if (!(t2 > 0.0))
            throw std::invalid_argument("LorentzLine: T2 must be positive");
    }
};

struct IdentityMedium {};

struct LorentzianMedium {
    std::vector<LorentzLine> lines;
    double detuning_sign = +1.0; // positive nm offset -> positive angular detuning
};

// Complex H sampled on wavelengths (nm); linearly interpolated, never
// extrapolated.
struct TabulatedMedium {
    std::vector<double> wavelengths_nm; // ascending
    std::vector<std::complex<double>> values;
};

using Medium = std::variant<IdentityMedium, LorentzianMedium, TabulatedMedium>;

// H(omega_0 + nu) at one detuning for a set of Lorentzian lines:
// exp[-i sum_k b_k / (nu - Omega_k + i/T2_k)], b_k = alphaL_k / (2 T2_k).
inline std::complex<double> lorentzian_transfer_at(const LorentzianMedium& m,
                                                   double center_wavelength_nm, double nu) {
    std::complex<double> arg(0.0, 0.0);
    for (const auto& line : m.lines) {
        const double omega =
            nm_to_angular_detuning(line.detuning_nm, center_wavelength_nm, m.detuning_sign);
        const double b = line.optical_thickness / (2.0 * line.t2);
        arg += b / std::complex<double>(nu - omega, 1.0 / line.t2);
    }
    return std::exp(std::complex<double>(0.0, -1.0) * arg);
}

inline ComplexSpectrum transfer_function(const Medium& medium, const SpectralGrid& grid) {
    std::vector<std::complex<double>> values(grid.size());
    if (std::holds_alternative<IdentityMedium>(medium)) {
        std::fill(values.begin(), values.end(), std::complex<double>(1.0, 0.0));
    } else if (const auto* lm = std::get_if<LorentzianMedium>(&medium)) {
        if (lm->lines.empty())
            throw std::invalid_argument("transfer_function: empty line list");
        for (const auto& line : lm->lines) line.validate();
        for (std::size_t i = 0; i < grid.size(); ++i)
            values[i] = lorentzian_transfer_at(*lm, grid.center_wavelength_nm(), grid[i]);
    } else {
        const auto& tab = std::get<TabulatedMedium>(medium);
        if (tab.wavelengths_nm.size() != tab.values.size() || tab.wavelengths_nm.size() < 2)
            throw std::invalid_argument("transfer_function: bad tabulated medium");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double wl = grid.wavelength_at(i);
            if (wl < tab.wavelengths_nm.front() || wl > tab.wavelengths_nm.back())
                throw std::domain_error("transfer_function: tabulated medium does not cover grid");
            const auto it = std::upper_bound(tab.wavelengths_nm.begin(),
                                             tab.wavelengths_nm.end(), wl);
            const std::size_t hi = std::min<std::size_t>(
                static_cast<std::size_t>(it - tab.wavelengths_nm.begin()),
                tab.wavelengths_nm.size() - 1);
            const std::size_t lo = hi == 0 ? 0 : hi - 1;
            const double w0 = tab.wavelengths_nm[lo], w1 = tab.wavelengths_nm[hi];
            const double t = w1 == w0 ? 0.0 : (wl - w0) / (w1 - w0);
            values[i] = tab.values[lo] * (1.0 - t) + tab.values[hi] * t;
        }
    }
    return ComplexSpectrum(grid, std::move(values));
}

inline std::vector<double> intensity_transmission(const Medium& medium,
                                                  const SpectralGrid& grid) {
    const ComplexSpectrum h = transfer_function(medium, grid);
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = std::norm(h.values[i]);
    return out;
}

// Thin-sample relation T2 = 1 / (pi * FWHM), FWHM in Hz.
inline double thin_sample_t2_from_fwhm(double fwhm_hz) {
    if (!(fwhm_hz > 0.0))
        throw std::invalid_argument("thin_sample_t2_from_fwhm: FWHM must be positive");
    return 1.0 / (pi * fwhm_hz);
}

} // namespace homsim

#endif
