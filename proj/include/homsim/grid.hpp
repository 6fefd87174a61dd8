#ifndef HOMSIM_GRID_HPP
#define HOMSIM_GRID_HPP

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "homsim/units.hpp"

namespace homsim {

// Uniform grid of angular-frequency detunings about a carrier wavelength.
// Symmetric about zero: nu[i] = -nu[n-1-i] exactly for even n.
class SpectralGrid {
public:
    SpectralGrid(double center_wavelength_nm, double half_span, std::size_t n_points)
        : center_wavelength_nm_(center_wavelength_nm) {
        if (half_span <= 0.0)
            throw std::invalid_argument("SpectralGrid: half_span must be positive");
        if (n_points < 2)
            throw std::invalid_argument("SpectralGrid: need at least 2 points");
        if (center_wavelength_nm <= 0.0)
            throw std::invalid_argument("SpectralGrid: center wavelength must be positive");
        detunings_.resize(n_points);
        spacing_ = 2.0 * half_span / static_cast<double>(n_points - 1);
        for (std::size_t i = 0; i < n_points; ++i)
            detunings_[i] = -half_span + spacing_ * static_cast<double>(i);
        // enforce exact mirror symmetry against rounding
        for (std::size_t i = 0; i < n_points / 2; ++i)
            detunings_[n_points - 1 - i] = -detunings_[i];
    }

    double center_wavelength_nm() const { return center_wavelength_nm_; }
    double center_angular_frequency() const {
        return 2.0 * pi * speed_of_light / (center_wavelength_nm_ * nm);
    }
    double spacing() const { return spacing_; }
    std::size_t size() const { return detunings_.size(); }
    double operator[](std::size_t i) const { return detunings_[i]; }
    const std::vector<double>& detunings() const { return detunings_; }
    double half_span() const { return -detunings_.front(); }

    // index of the point at -nu[i]
    std::size_t mirror_index(std::size_t i) const { return detunings_.size() - 1 - i; }

    bool same_as(const SpectralGrid& other) const {
        return detunings_.size() == other.detunings_.size() &&
               center_wavelength_nm_ == other.center_wavelength_nm_ &&
               detunings_.front() == other.detunings_.front() &&
               detunings_.back() == other.detunings_.back();
    }

    // wavelength (nm) of grid point i under the linearized detuning map
    double wavelength_at(std::size_t i, double sign_convention = +1.0) const {
        return center_wavelength_nm_ +
               angular_detuning_to_nm(detunings_[i], center_wavelength_nm_, sign_convention);
    }

private:
    double center_wavelength_nm_;
    double spacing_;
    std::vector<double> detunings_;
};

inline SpectralGrid build_grid(double center_wavelength_nm, double half_span,
                               std::size_t n_points) {
    if (n_points % 2 != 0)
        throw std::invalid_argument("build_grid: n_points must be even");
    return SpectralGrid(center_wavelength_nm, half_span, n_points);
}

struct ComplexSpectrum {
    const SpectralGrid* grid = nullptr;
    std::vector<std::complex<double>> values;

    ComplexSpectrum() = default;
    ComplexSpectrum(const SpectralGrid& g, std::vector<std::complex<double>> v)
        : grid(&g), values(std::move(v)) {
        if (values.size() != g.size())
            throw std::invalid_argument("ComplexSpectrum: length mismatch with grid");
    }
};

// Composite trapezoid rule over the grid.
template <typename F>
double trapezoid_integral(const SpectralGrid& grid, F&& f) {
    const std::size_t n = grid.size();
    double sum = 0.5 * (f(0) + f(n - 1));
    for (std::size_t i = 1; i + 1 < n; ++i) sum += f(i);
    return sum * grid.spacing();
}

} // namespace homsim

#endif
