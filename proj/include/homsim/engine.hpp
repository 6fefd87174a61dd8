#ifndef HOMSIM_ENGINE_HPP
#define HOMSIM_ENGINE_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "homsim/grid.hpp"
#include "homsim/medium.hpp"

namespace homsim {

enum class Normalization { raw, baseline_one };

struct DipTrace {
    std::vector<double> delays; // seconds, strictly increasing
    std::vector<double> rates;
    Normalization normalization = Normalization::baseline_one;
};

struct CountTrace {
    std::vector<double> delays; // seconds
    std::vector<std::int64_t> counts;
    double acquisition_time_per_point = 1.0; // seconds
};

struct EngineConfig {
    double visibility = 1.0;
    double tau_offset = 0.0;
    Normalization normalization = Normalization::baseline_one;

    void validate() const {
        if (visibility < 0.0 || visibility > 1.0)
            throw std::invalid_argument("EngineConfig: visibility must lie in [0,1]");
    }
};

// P_c(tau) = (1/4) integral dnu [ |F H(w0-nu)|^2 + |F H(w0+nu)|^2
//            - 2 V Re{ |F|^2 H*(w0-nu) H(w0+nu) e^{-2 i nu (tau - tau0)} } ]
inline double coincidence_rate(const ComplexSpectrum& field, const ComplexSpectrum& transfer,
                               double tau, double visibility, double tau_offset = 0.0) {
    if (field.grid == nullptr || transfer.grid == nullptr ||
        !field.grid->same_as(*transfer.grid))
        throw std::invalid_argument("coincidence_rate: field and transfer grids differ");
    const SpectralGrid& grid = *field.grid;
    const double dt = tau - tau_offset;
    const double sum = trapezoid_integral(grid, [&](std::size_t i) {
        const std::complex<double> hp = transfer.values[i];
        const std::complex<double> hm = transfer.values[grid.mirror_index(i)];
        const double f2 = std::norm(field.values[i]);
        const double phase = -2.0 * grid[i] * dt;
        const std::complex<double> osc(std::cos(phase), std::sin(phase));
        const double cross = (std::conj(hm) * hp * osc).real();
        return f2 * (std::norm(hm) + std::norm(hp) - 2.0 * visibility * cross);
    });
    return 0.25 * sum;
}

// Precomputed per-field, per-medium state for scanning many delays.
// The integration range is restricted to the symmetric band where |F|^2
// is above a relative cutoff; the dropped tail contributes < 1e-9 of the
// integral for the default field model.
class DipEvaluator {
public:
    explicit DipEvaluator(const ComplexSpectrum& field, double cutoff_rel = 1e-14)
        : grid_(field.grid) {
        if (grid_ == nullptr) throw std::invalid_argument("DipEvaluator: field has no grid");
        const std::size_t n = grid_->size();
        intensity_.resize(n);
        double peak = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            intensity_[i] = std::norm(field.values[i]);
            peak = std::max(peak, intensity_[i]);
        }
        const double cutoff = peak * cutoff_rel;
        std::size_t lo = 0;
        while (lo < n / 2 && intensity_[lo] < cutoff &&
               intensity_[grid_->mirror_index(lo)] < cutoff)
            ++lo;
        first_ = lo;
        last_ = n - 1 - lo; // symmetric band
    }

    const SpectralGrid& grid() const { return *grid_; }

    void set_transfer(const ComplexSpectrum& transfer) {
        if (transfer.grid == nullptr || !transfer.grid->same_as(*grid_))
            throw std::invalid_argument("DipEvaluator: transfer grid mismatch");
        const std::size_t n = grid_->size();
        cross_.resize(n);
        baseline_ = 0.0;
        const double d = grid_->spacing();
        for (std::size_t i = first_; i <= last_; ++i) {
            const std::complex<double> hp = transfer.values[i];
            const std::complex<double> hm = transfer.values[grid_->mirror_index(i)];
            double w = d;
            if (i == 0 || i + 1 == n) w *= 0.5;
            cross_[i] = w * intensity_[i] * std::conj(hm) * hp;
            baseline_ += 0.25 * w * intensity_[i] * (std::norm(hm) + std::norm(hp));
        }
    }

    double baseline() const { return baseline_; }

    // raw (unnormalized) rate at one delay; phases advanced by recurrence
    double rate(double tau, double visibility, double tau_offset) const {
        const double dt = tau - tau_offset;
        const double step_phase = -2.0 * grid_->spacing() * dt;
        const std::complex<double> step(std::cos(step_phase), std::sin(step_phase));
        const double start_phase = -2.0 * (*grid_)[first_] * dt;
        std::complex<double> osc(std::cos(start_phase), std::sin(start_phase));
        double cross_sum = 0.0;
        std::size_t since_renorm = 0;
        for (std::size_t i = first_; i <= last_; ++i) {
            cross_sum += (cross_[i] * osc).real();
            osc *= step;
            if (++since_renorm == 1024) { // curb phase drift in the recurrence
                const double ph = -2.0 * ((*grid_)[first_] + grid_->spacing() *
                                          static_cast<double>(i + 1 - first_)) * dt;
                osc = {std::cos(ph), std::sin(ph)};
                since_renorm = 0;
            }
        }
        return baseline_ - 0.5 * visibility * cross_sum;
    }

private:
    const SpectralGrid* grid_;
    std::vector<double> intensity_;
    std::vector<std::complex<double>> cross_;
    std::size_t first_ = 0, last_ = 0;
    double baseline_ = 0.0;
};

inline DipTrace simulate_dip(const ComplexSpectrum& field, const Medium& medium,
                             const std::vector<double>& delays, const EngineConfig& config) {
    config.validate();
    for (std::size_t i = 1; i < delays.size(); ++i)
        if (!(delays[i] > delays[i - 1]))
            throw std::invalid_argument("simulate_dip: delays must be strictly increasing");

    DipEvaluator eval(field);
    eval.set_transfer(transfer_function(medium, *field.grid));

    DipTrace trace;
    trace.delays = delays;
    trace.rates.resize(delays.size());
    trace.normalization = config.normalization;
    const double scale =
        config.normalization == Normalization::baseline_one ? 1.0 / eval.baseline() : 1.0;
    for (std::size_t i = 0; i < delays.size(); ++i)
        trace.rates[i] = scale * eval.rate(delays[i], config.visibility, config.tau_offset);
    return trace;
}

// Seeded Poisson count synthesis: mean per point is
// (peak_rate * rate + dark_coincidence_rate) * acquisition.
inline CountTrace synthesize_counts(const DipTrace& trace, double peak_rate,
                                    double dark_coincidence_rate, double acquisition,
                                    std::uint64_t seed) {
    if (!(acquisition > 0.0))
        throw std::invalid_argument("synthesize_counts: acquisition must be positive");
    std::mt19937_64 rng(seed);
    CountTrace out;
    out.delays = trace.delays;
    out.acquisition_time_per_point = acquisition;
    out.counts.resize(trace.rates.size());
    for (std::size_t i = 0; i < trace.rates.size(); ++i) {
        const double rate = trace.rates[i];
        if (!(rate >= 0.0) || !std::isfinite(rate))
            throw std::invalid_argument("synthesize_counts: rates must be finite and >= 0");
        const double mean = (peak_rate * rate + dark_coincidence_rate) * acquisition;
        if (mean < 0.0)
            throw std::invalid_argument("synthesize_counts: negative expected counts");
        if (mean == 0.0) {
            out.counts[i] = 0;
        } else {
            std::poisson_distribution<std::int64_t> poisson(mean);
            out.counts[i] = poisson(rng);
        }
    }
    return out;
}

} // namespace homsim

#endif
