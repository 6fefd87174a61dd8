#ifndef HOMSIM_SPECTRA_HPP
#define HOMSIM_SPECTRA_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "homsim/fitting.hpp"
#include "homsim/medium.hpp"
#include "homsim/units.hpp"

namespace homsim {

struct TransmissionSpectrum {
    std::vector<double> wavelengths_nm; // strictly increasing
    std::vector<double> transmission;

    void validate() const {
        if (wavelengths_nm.size() != transmission.size())
            throw std::invalid_argument("TransmissionSpectrum: length mismatch");
        for (std::size_t i = 1; i < wavelengths_nm.size(); ++i)
            if (!(wavelengths_nm[i] > wavelengths_nm[i - 1]))
                throw std::invalid_argument(
                    "TransmissionSpectrum: wavelengths must be strictly increasing");
    }
};

struct LineEstimate {
    double detuning_nm = 0.0;
    double alpha_l = 0.0;
    double fwhm_nm = 0.0;
    double t2_thin_estimate = 0.0; // seconds
    bool fit_ok = true;
};

// Temporal resolution / thin-sample coherence time from a spectral width:
// 1 / (pi * dnu), dnu = c * dlambda / lambda0^2.
inline double resolution_estimate(double spectrum_fwhm_nm, double center_wavelength_nm) {
    if (!(spectrum_fwhm_nm > 0.0) || !(center_wavelength_nm > 0.0))
        throw std::invalid_argument("resolution_estimate: inputs must be positive");
    return thin_sample_t2_from_fwhm(nm_width_to_hz(spectrum_fwhm_nm, center_wavelength_nm));
}

namespace detail {
inline double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t hi =
        std::min<std::size_t>(static_cast<std::size_t>(it - xs.begin()), xs.size() - 1);
    const std::size_t lo = hi == 0 ? 0 : hi - 1;
    if (xs[hi] == xs[lo]) return ys[lo];
    const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] * (1.0 - t) + ys[hi] * t;
}
} // namespace detail

// Divide the raw spectrum by the filter transmission where the filter is
// above floor; points below floor are dropped.
inline TransmissionSpectrum normalize_to_filter(const TransmissionSpectrum& raw,
                                                const TransmissionSpectrum& filter_intensity,
                                                double floor = 1e-3) {
    raw.validate();
    filter_intensity.validate();
    TransmissionSpectrum out;
    for (std::size_t i = 0; i < raw.wavelengths_nm.size(); ++i) {
        const double wl = raw.wavelengths_nm[i];
        if (wl < filter_intensity.wavelengths_nm.front() ||
            wl > filter_intensity.wavelengths_nm.back())
            continue;
        const double f = detail::interp(filter_intensity.wavelengths_nm,
                                        filter_intensity.transmission, wl);
        if (f <= floor) continue;
        out.wavelengths_nm.push_back(wl);
        out.transmission.push_back(raw.transmission[i] / f);
    }
    if (out.wavelengths_nm.empty())
        throw std::domain_error("normalize_to_filter: no overlap above filter floor");
    return out;
}

// FWHM of a transmission dip: width at half depth between the minimum and
// the off-resonance baseline (taken as 1). Linear interpolation at the
// crossings.
inline double transmission_dip_fwhm_nm(const TransmissionSpectrum& spectrum) {
    spectrum.validate();
    const auto& wl = spectrum.wavelengths_nm;
    const auto& t = spectrum.transmission;
    const std::size_t imin =
        static_cast<std::size_t>(std::min_element(t.begin(), t.end()) - t.begin());
    const double half = 0.5 * (1.0 + t[imin]);
    double left = wl.front(), right = wl.back();
    for (std::size_t i = imin; i-- > 0;) {
        if (t[i] >= half) {
            const double f = (half - t[i + 1]) / (t[i] - t[i + 1]);
            left = wl[i + 1] + f * (wl[i] - wl[i + 1]);
            break;
        }
    }
    for (std::size_t i = imin + 1; i < t.size(); ++i) {
        if (t[i] >= half) {
            const double f = (half - t[i - 1]) / (t[i] - t[i - 1]);
            right = wl[i - 1] + f * (wl[i] - wl[i - 1]);
            break;
        }
    }
    return right - left;
}

// Extract Lorentzian lines from a normalized transmission spectrum by
// fitting the optical depth -ln T as a sum of Lorentzians.
inline std::vector<LineEstimate> extract_lines(const TransmissionSpectrum& spectrum,
                                               double center_wavelength_nm,
                                               std::size_t max_lines,
                                               double detuning_sign = +1.0,
                                               double transmission_floor = 1e-4,
                                               double prominence = 0.2) {
    spectrum.validate();
    if (max_lines < 1)
        throw std::invalid_argument("extract_lines: max_lines must be >= 1");

    const std::size_t n = spectrum.wavelengths_nm.size();
    std::vector<double> nu(n), depth(n);
    for (std::size_t i = 0; i < n; ++i) {
        nu[i] = nm_to_angular_detuning(spectrum.wavelengths_nm[i] - center_wavelength_nm,
                                       center_wavelength_nm, detuning_sign);
        depth[i] = -std::log(std::max(spectrum.transmission[i], transmission_floor));
    }

    // seed candidate lines from local maxima of the depth
    struct Seed {
        double nu, depth, half_width;
    };
    std::vector<Seed> seeds;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (depth[i] >= prominence && depth[i] >= depth[i - 1] && depth[i] > depth[i + 1]) {
            // crude half width: walk out to half depth
            const double half = 0.5 * depth[i];
            std::size_t l = i, r = i;
            while (l > 0 && depth[l] > half) --l;
            while (r + 1 < n && depth[r] > half) ++r;
            seeds.push_back({nu[i], depth[i], 0.5 * std::abs(nu[r] - nu[l])});
        }
    }
    std::sort(seeds.begin(), seeds.end(),
              [](const Seed& a, const Seed& b) { return a.depth > b.depth; });
    if (seeds.size() > max_lines) seeds.resize(max_lines);
    if (seeds.empty()) return {};
    std::sort(seeds.begin(), seeds.end(),
              [](const Seed& a, const Seed& b) { return a.nu < b.nu; });

    // depth model: sum_k alpha_k * g_k^2 / ((nu - nu_k)^2 + g_k^2), g = 1/T2
    const std::size_t k = seeds.size();
    auto model_depth = [&](const std::vector<double>& pars, double x) {
        double d = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double c = pars[3 * j], a = pars[3 * j + 1], g = pars[3 * j + 2];
            d += a * g * g / ((x - c) * (x - c) + g * g);
        }
        return d;
    };
    auto fn = [&](const std::vector<double>& pars) {
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) r[i] = depth[i] - model_depth(pars, nu[i]);
        return r;
    };

    std::vector<double> x0, lo, hi;
    const double span = nu.back() - nu.front();
    for (const auto& s : seeds) {
        x0.insert(x0.end(), {s.nu, s.depth, std::max(s.half_width, 1e-4 * span)});
        lo.insert(lo.end(), {nu.front(), 0.0, 1e-6 * span});
        hi.insert(hi.end(), {nu.back(), 100.0, span});
    }
    LMOptions opts;
    const LMOutcome lm = levenberg_marquardt(fn, x0, lo, hi, opts);

    std::vector<LineEstimate> out;
    for (std::size_t j = 0; j < k; ++j) {
        LineEstimate e;
        const double c = lm.x[3 * j], a = lm.x[3 * j + 1], g = lm.x[3 * j + 2];
        e.detuning_nm = angular_detuning_to_nm(c, center_wavelength_nm, detuning_sign);
        e.alpha_l = a;
        const double fwhm_rad = 2.0 * g;
        e.fwhm_nm = std::abs(angular_detuning_to_nm(fwhm_rad, center_wavelength_nm));
        e.t2_thin_estimate = thin_sample_t2_from_fwhm(fwhm_rad / (2.0 * pi));
        e.fit_ok = lm.converged;
        out.push_back(e);
    }
    std::sort(out.begin(), out.end(), [](const LineEstimate& a, const LineEstimate& b) {
        return a.detuning_nm < b.detuning_nm;
    });
    return out;
}

} // namespace homsim

#endif
