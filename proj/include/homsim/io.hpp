#ifndef HOMSIM_IO_HPP
#define HOMSIM_IO_HPP

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "homsim/engine.hpp"
#include "homsim/fitting.hpp"
#include "homsim/spectra.hpp"
#include "homsim/units.hpp"

namespace homsim {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace io {

// Columns separated by whitespace or commas; '#' starts a comment.
inline std::vector<std::vector<double>> read_columns(std::istream& in, std::size_t n_cols) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        for (auto& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream ss(line);
        std::vector<double> row;
        double v;
        while (ss >> v) row.push_back(v);
        if (row.empty()) continue;
        if (row.size() < n_cols)
            throw ParseError("line " + std::to_string(lineno) + ": expected " +
                             std::to_string(n_cols) + " columns");
        row.resize(n_cols);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<std::vector<double>> read_columns_file(const std::string& path,
                                                          std::size_t n_cols) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    try {
        return read_columns(in, n_cols);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline TransmissionSpectrum read_spectrum(const std::string& path) {
    const auto rows = read_columns_file(path, 2);
    TransmissionSpectrum s;
    for (const auto& r : rows) {
        s.wavelengths_nm.push_back(r[0]);
        s.transmission.push_back(r[1]);
    }
    s.validate();
    return s;
}

inline void write_spectrum(std::ostream& out, const TransmissionSpectrum& s,
                           const std::string& value_name = "transmission") {
    out << "# wavelength_nm " << value_name << "\n";
    out << std::setprecision(12);
    for (std::size_t i = 0; i < s.wavelengths_nm.size(); ++i)
        out << s.wavelengths_nm[i] << " " << s.transmission[i] << "\n";
}

inline TabulatedMedium read_tabulated_medium(const std::string& path) {
    const auto rows = read_columns_file(path, 3);
    TabulatedMedium m;
    for (const auto& r : rows) {
        m.wavelengths_nm.push_back(r[0]);
        m.values.emplace_back(r[1], r[2]);
    }
    return m;
}

inline void write_dip_trace(std::ostream& out, const DipTrace& trace) {
    out << "# delay_fs rate\n";
    out << std::setprecision(12);
    for (std::size_t i = 0; i < trace.delays.size(); ++i)
        out << trace.delays[i] / fs << " " << trace.rates[i] << "\n";
}

inline DipTrace read_dip_trace(const std::string& path) {
    const auto rows = read_columns_file(path, 2);
    DipTrace t;
    for (const auto& r : rows) {
        t.delays.push_back(r[0] * fs);
        t.rates.push_back(r[1]);
    }
    return t;
}

inline void write_count_trace(std::ostream& out, const CountTrace& trace,
                              std::uint64_t seed, const std::string& extra_header = "") {
    out << "# delay_fs counts  (acquisition_s=" << trace.acquisition_time_per_point
        << " seed=" << seed << (extra_header.empty() ? "" : " ") << extra_header << ")\n";
    out << std::setprecision(12);
    for (std::size_t i = 0; i < trace.delays.size(); ++i)
        out << trace.delays[i] / fs << " " << trace.counts[i] << "\n";
}

// delay_scale converts the first column to seconds; for stage positions in
// micrometers pass (stage_to_delay_factor * 1e-6).
inline CountTrace read_count_trace(const std::string& path, double delay_scale = fs,
                                   double acquisition = 1.0) {
    const auto rows = read_columns_file(path, 2);
    CountTrace t;
    t.acquisition_time_per_point = acquisition;
    for (const auto& r : rows) {
        if (r[1] < 0.0) throw ParseError(path + ": negative counts");
        t.delays.push_back(r[0] * delay_scale);
        t.counts.push_back(static_cast<std::int64_t>(std::llround(r[1])));
    }
    return t;
}

inline void write_fit_report(std::ostream& out, const FitResult& fit) {
    out << "# parameter estimate sigma status\n";
    out << std::setprecision(10);
    for (std::size_t j = 0; j < fit.parameters.size(); ++j) {
        const auto& p = fit.parameters[j];
        out << p.name << " " << p.value << " " << fit.sigmas[j] << " "
            << (p.free ? "free" : "fixed") << "\n";
    }
    out << "r_squared " << fit.r_squared << "\n";
    out << "cost " << fit.cost << "\n";
    out << "iterations " << fit.n_iterations << "\n";
    out << "converged " << (fit.converged ? "true" : "false") << "\n";
}

inline void write_line_report(std::ostream& out, const std::vector<LineEstimate>& lines) {
    out << "# detuning_nm alpha_l fwhm_nm t2_thin_fs fit_ok\n";
    out << std::setprecision(8);
    for (const auto& e : lines)
        out << e.detuning_nm << " " << e.alpha_l << " " << e.fwhm_nm << " "
            << e.t2_thin_estimate / fs << " " << (e.fit_ok ? 1 : 0) << "\n";
}

} // namespace io
} // namespace homsim

#endif
