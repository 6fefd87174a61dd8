#ifndef HOMSIM_CONFIG_HPP
#define HOMSIM_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "homsim/engine.hpp"
#include "homsim/fitting.hpp"
#include "homsim/io.hpp"
#include "homsim/medium.hpp"
#include "homsim/spectral_field.hpp"

namespace homsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SynthConfig {
    double peak_rate = 10.0;          // counts/s at unit normalized rate
    double dark_rate = 0.0;           // counts/s
    double acquisition_s = 60.0;      // per point
    std::uint64_t seed = 1;
};

struct FitConfig {
    bool free_amplitude = true;
    bool free_baseline = true;
    bool free_visibility = true;
    bool free_tau_offset = true;
    bool free_t2 = true;
    bool free_detuning = false;
    bool free_alpha = false;
    bool poisson_weights = false;
    double t2_lower_fs = 1.0;
    double t2_upper_fs = 10000.0;
    std::optional<double> init_amplitude;
    std::optional<double> init_baseline;
    std::optional<double> init_visibility;
    std::optional<double> init_tau_offset_fs;
    std::vector<double> init_t2_fs; // per line; empty = use medium values
};

struct IoConfig {
    std::string delay_unit = "fs"; // "fs" or "stage_um"
    double stage_to_delay_s_per_um = 2.0e-6 / speed_of_light; // double pass
    double acquisition_s = 1.0;    // for ingested count traces
};

struct RunConfig {
    double center_wavelength_nm = 815.0;
    FilterSpec filter;
    PhaseMatchSpec phase_matching;

    Medium medium = IdentityMedium{};
    double detuning_sign = +1.0;

    std::size_t grid_points = 16384;
    double visibility = 1.0;
    double tau_min_fs = -1000.0;
    double tau_max_fs = 1000.0;
    double tau_step_fs = 20.0;
    double tau_offset_fs = 0.0;

    SynthConfig synth;
    FitConfig fit;
    IoConfig io;

    SpectralGrid make_grid() const {
        return default_grid(filter, center_wavelength_nm, grid_points);
    }

    std::vector<double> make_delays() const {
        if (!(tau_step_fs > 0.0))
            throw ConfigError("engine.tau_step_fs must be positive");
        std::vector<double> delays;
        for (double t = tau_min_fs; t <= tau_max_fs + 0.5 * tau_step_fs; t += tau_step_fs)
            delays.push_back(t * fs);
        return delays;
    }

    EngineConfig make_engine_config() const {
        EngineConfig c;
        c.visibility = visibility;
        c.tau_offset = tau_offset_fs * fs;
        return c;
    }

    double delay_scale() const {
        if (io.delay_unit == "fs") return fs;
        if (io.delay_unit == "stage_um") return io.stage_to_delay_s_per_um;
        throw ConfigError("io.delay_unit must be 'fs' or 'stage_um'");
    }
};

inline RunConfig parse_run_config(const nlohmann::json& j) {
    RunConfig cfg;
    try {
        if (j.contains("source")) {
            const auto& s = j.at("source");
            cfg.center_wavelength_nm = s.value("center_wavelength_nm", 815.0);
            if (s.contains("filter")) {
                const auto& f = s.at("filter");
                cfg.filter.center_wavelength_nm =
                    f.value("center_wavelength_nm", cfg.center_wavelength_nm);
                cfg.filter.top_width_nm = f.value("top_width_nm", 15.5);
                cfg.filter.slope_width_nm = f.value("slope_width_nm", 3.3);
                cfg.filter.magnitude_floor = f.value("magnitude_floor", 1e-6);
            } else {
                cfg.filter.center_wavelength_nm = cfg.center_wavelength_nm;
            }
            if (s.contains("phase_matching")) {
                const auto& p = s.at("phase_matching");
                cfg.phase_matching.intensity_fwhm_nm = p.value("intensity_fwhm_nm", 0.0);
                cfg.phase_matching.argument_scale = p.value("argument_scale", 0.0);
            } else {
                cfg.phase_matching.intensity_fwhm_nm = 22.0;
            }
        } else {
            cfg.filter.center_wavelength_nm = cfg.center_wavelength_nm;
            cfg.phase_matching.intensity_fwhm_nm = 22.0;
        }
        cfg.filter.validate();
        cfg.phase_matching.validate();

        if (j.contains("medium")) {
            const auto& m = j.at("medium");
            const std::string type = m.value("type", "identity");
            cfg.detuning_sign = m.value("detuning_sign", 1.0);
            if (type == "identity") {
                cfg.medium = IdentityMedium{};
            } else if (type == "lorentzian") {
                LorentzianMedium lm;
                lm.detuning_sign = cfg.detuning_sign;
                for (const auto& line : m.at("lines")) {
                    LorentzLine l;
                    l.detuning_nm = line.at("detuning_nm").get<double>();
                    l.optical_thickness = line.at("alpha_l").get<double>();
                    l.t2 = line.at("t2_fs").get<double>() * fs;
                    l.validate();
                    lm.lines.push_back(l);
                }
                if (lm.lines.empty()) throw ConfigError("medium.lines must be non-empty");
                cfg.medium = lm;
            } else if (type == "tabulated") {
                cfg.medium = io::read_tabulated_medium(m.at("file").get<std::string>());
            } else {
                throw ConfigError("medium.type must be identity, lorentzian, or tabulated");
            }
        }

        if (j.contains("engine")) {
            const auto& e = j.at("engine");
            cfg.grid_points = e.value("grid_points", std::size_t{16384});
            cfg.visibility = e.value("visibility", 1.0);
            cfg.tau_min_fs = e.value("tau_min_fs", -1000.0);
            cfg.tau_max_fs = e.value("tau_max_fs", 1000.0);
            cfg.tau_step_fs = e.value("tau_step_fs", 20.0);
            cfg.tau_offset_fs = e.value("tau_offset_fs", 0.0);
        }
        if (!(cfg.tau_step_fs > 0.0)) throw ConfigError("engine.tau_step_fs must be positive");

        if (j.contains("synth")) {
            const auto& s = j.at("synth");
            cfg.synth.peak_rate = s.value("peak_rate", 10.0);
            cfg.synth.dark_rate = s.value("dark_rate", 0.0);
            cfg.synth.acquisition_s = s.value("acquisition_s", 60.0);
            cfg.synth.seed = s.value("seed", std::uint64_t{1});
        }

        if (j.contains("fit")) {
            const auto& f = j.at("fit");
            if (f.contains("free")) {
                const auto& fr = f.at("free");
                cfg.fit.free_amplitude = fr.value("amplitude", true);
                cfg.fit.free_baseline = fr.value("baseline", true);
                cfg.fit.free_visibility = fr.value("visibility", true);
                cfg.fit.free_tau_offset = fr.value("tau_offset", true);
                cfg.fit.free_t2 = fr.value("t2", true);
                cfg.fit.free_detuning = fr.value("detuning", false);
                cfg.fit.free_alpha = fr.value("alpha_l", false);
            }
            cfg.fit.poisson_weights = f.value("poisson_weights", false);
            cfg.fit.t2_lower_fs = f.value("t2_lower_fs", 1.0);
            cfg.fit.t2_upper_fs = f.value("t2_upper_fs", 10000.0);
            if (f.contains("init")) {
                const auto& in = f.at("init");
                if (in.contains("amplitude"))
                    cfg.fit.init_amplitude = in.at("amplitude").get<double>();
                if (in.contains("baseline"))
                    cfg.fit.init_baseline = in.at("baseline").get<double>();
                if (in.contains("visibility"))
                    cfg.fit.init_visibility = in.at("visibility").get<double>();
                if (in.contains("tau_offset_fs"))
                    cfg.fit.init_tau_offset_fs = in.at("tau_offset_fs").get<double>();
                if (in.contains("t2_fs")) {
                    if (in.at("t2_fs").is_array())
                        cfg.fit.init_t2_fs = in.at("t2_fs").get<std::vector<double>>();
                    else
                        cfg.fit.init_t2_fs.assign(1, in.at("t2_fs").get<double>());
                }
            }
        }

        if (j.contains("io")) {
            const auto& i = j.at("io");
            cfg.io.delay_unit = i.value("delay_unit", std::string("fs"));
            cfg.io.stage_to_delay_s_per_um =
                i.value("stage_to_delay_s_per_um", 2.0e-6 / speed_of_light);
            cfg.io.acquisition_s = i.value("acquisition_s", 1.0);
            if (!(cfg.io.stage_to_delay_s_per_um > 0.0))
                throw ConfigError("io.stage_to_delay_s_per_um must be positive");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_run_config(j);
}

// Build the fit model described by the config for the given field and data.
// Amplitude/baseline/visibility inits fall back to data-driven guesses.
inline FitModel make_fit_model(const RunConfig& cfg, const ComplexSpectrum& field,
                               const CountTrace& data) {
    FitModel model;
    model.field = &field;
    model.detuning_sign = cfg.detuning_sign;
    if (const auto* lm = std::get_if<LorentzianMedium>(&cfg.medium)) {
        model.lines = lm->lines;
        for (std::size_t k = 0; k < model.lines.size(); ++k) {
            model.freedom.push_back(
                {cfg.fit.free_detuning, cfg.fit.free_alpha, cfg.fit.free_t2});
            if (k < cfg.fit.init_t2_fs.size())
                model.lines[k].t2 = cfg.fit.init_t2_fs[k] * fs;
        }
    } else if (std::holds_alternative<TabulatedMedium>(cfg.medium)) {
        throw ConfigError("fitting with a tabulated medium is not supported");
    }
    model.t2_lower = cfg.fit.t2_lower_fs * fs;
    model.t2_upper = cfg.fit.t2_upper_fs * fs;
    model.poisson_weights = cfg.fit.poisson_weights;

    // data-driven initial guesses
    double edge_mean = 0.0;
    std::int64_t cmin = data.counts.empty() ? 0 : data.counts.front();
    const std::size_t n_edge = std::max<std::size_t>(1, std::min<std::size_t>(5, data.counts.size()));
    for (std::size_t i = 0; i < n_edge; ++i)
        edge_mean += 0.5 * (static_cast<double>(data.counts[i]) +
                            static_cast<double>(data.counts[data.counts.size() - 1 - i]));
    edge_mean /= static_cast<double>(n_edge);
    for (auto c : data.counts) cmin = std::min(cmin, c);

    model.amplitude.free = cfg.fit.free_amplitude;
    model.amplitude.value =
        cfg.fit.init_amplitude.value_or(std::max(edge_mean, 1.0));
    model.baseline.free = cfg.fit.free_baseline;
    model.baseline.value = cfg.fit.init_baseline.value_or(0.0);
    model.baseline.lower = -std::numeric_limits<double>::infinity();
    model.visibility.free = cfg.fit.free_visibility;
    model.visibility.value = cfg.fit.init_visibility.value_or(
        std::min(1.0, std::max(0.0, 1.0 - static_cast<double>(cmin) /
                                              std::max(edge_mean, 1.0))));
    model.tau_offset.free = cfg.fit.free_tau_offset;
    model.tau_offset.value = cfg.fit.init_tau_offset_fs.value_or(cfg.tau_offset_fs) * fs;
    return model;
}

} // namespace homsim

#endif
