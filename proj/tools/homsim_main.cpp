// Command-line front end: dip simulation, count synthesis, trace fitting,
// and transmission-spectrum line analysis driven by a JSON run config.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "homsim/homsim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNoConvergence = 4;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// config echoed into every output for provenance
void write_provenance(std::ostream& out, const std::string& config_path) {
    out << "# config: " << config_path << "\n";
    std::istringstream in(slurp(config_path));
    std::string line;
    while (std::getline(in, line)) out << "#   " << line << "\n";
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw homsim::ParseError("cannot open output file " + path);
    return out;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path) {
    const homsim::RunConfig cfg = homsim::load_run_config(config_path);
    const homsim::SpectralGrid grid = cfg.make_grid();
    const homsim::ComplexSpectrum field =
        homsim::biphoton_amplitude(cfg.phase_matching, cfg.filter, grid);
    const homsim::DipTrace trace =
        homsim::simulate_dip(field, cfg.medium, cfg.make_delays(), cfg.make_engine_config());
    auto out = open_output(out_path);
    write_provenance(out, config_path);
    homsim::io::write_dip_trace(out, trace);
    return kExitOk;
}

int cmd_synth(const std::string& config_path, const std::string& out_path,
              std::uint64_t* seed_override) {
    homsim::RunConfig cfg = homsim::load_run_config(config_path);
    if (seed_override) cfg.synth.seed = *seed_override;
    const homsim::SpectralGrid grid = cfg.make_grid();
    const homsim::ComplexSpectrum field =
        homsim::biphoton_amplitude(cfg.phase_matching, cfg.filter, grid);
    const homsim::DipTrace trace =
        homsim::simulate_dip(field, cfg.medium, cfg.make_delays(), cfg.make_engine_config());
    const homsim::CountTrace counts =
        homsim::synthesize_counts(trace, cfg.synth.peak_rate, cfg.synth.dark_rate,
                                  cfg.synth.acquisition_s, cfg.synth.seed);
    auto out = open_output(out_path);
    write_provenance(out, config_path);
    std::ostringstream extra;
    extra << "peak_rate=" << cfg.synth.peak_rate << " dark_rate=" << cfg.synth.dark_rate;
    homsim::io::write_count_trace(out, counts, cfg.synth.seed, extra.str());
    return kExitOk;
}

int cmd_fit(const std::string& config_path, const std::string& data_path,
            const std::string& report_path, const std::string& trace_path) {
    const homsim::RunConfig cfg = homsim::load_run_config(config_path);
    const homsim::CountTrace data =
        homsim::io::read_count_trace(data_path, cfg.delay_scale(), cfg.io.acquisition_s);
    if (data.counts.size() < 3)
        throw homsim::ParseError(data_path + ": too few data points");

    const homsim::SpectralGrid grid = cfg.make_grid();
    const homsim::ComplexSpectrum field =
        homsim::biphoton_amplitude(cfg.phase_matching, cfg.filter, grid);
    const homsim::FitModel model = homsim::make_fit_model(cfg, field, data);
    const homsim::FitResult fit = homsim::fit_dip(model, data);

    auto out = open_output(report_path);
    write_provenance(out, config_path);
    out << "# data: " << data_path << "\n";
    homsim::io::write_fit_report(out, fit);

    if (!trace_path.empty()) {
        auto tout = open_output(trace_path);
        tout << "# delay_fs counts_data counts_fit\n";
        for (std::size_t i = 0; i < data.delays.size(); ++i)
            tout << data.delays[i] / homsim::fs << " " << data.counts[i] << " "
                 << fit.best_fit[i] << "\n";
    }
    return fit.converged ? kExitOk : kExitNoConvergence;
}

int cmd_analyze_spectrum(const std::string& config_path, const std::string& spectrum_path,
                         const std::string& filter_path, bool normalize_by_model,
                         const std::string& report_path, std::size_t max_lines) {
    const homsim::RunConfig cfg = homsim::load_run_config(config_path);
    homsim::TransmissionSpectrum spectrum = homsim::io::read_spectrum(spectrum_path);

    if (!filter_path.empty()) {
        const homsim::TransmissionSpectrum filt = homsim::io::read_spectrum(filter_path);
        spectrum = homsim::normalize_to_filter(spectrum, filt);
    } else if (normalize_by_model) {
        homsim::TransmissionSpectrum filt;
        filt.wavelengths_nm = spectrum.wavelengths_nm;
        for (double wl : spectrum.wavelengths_nm)
            filt.transmission.push_back(homsim::trapezoid_intensity_at(
                cfg.filter, cfg.center_wavelength_nm,
                homsim::nm_to_angular_detuning(wl - cfg.center_wavelength_nm,
                                               cfg.center_wavelength_nm)));
        spectrum = homsim::normalize_to_filter(spectrum, filt);
    }

    const std::vector<homsim::LineEstimate> lines = homsim::extract_lines(
        spectrum, cfg.center_wavelength_nm, max_lines, cfg.detuning_sign);

    auto out = open_output(report_path);
    write_provenance(out, config_path);
    out << "# spectrum: " << spectrum_path << "\n";
    homsim::io::write_line_report(out, lines);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"HOM dip simulation and coherence-time extraction"};
    app.require_subcommand(1);

    std::string config_path, out_path, data_path, trace_path, spectrum_path, filter_path;
    std::uint64_t seed = 0;
    bool seed_set = false, normalize_by_model = false;
    std::size_t max_lines = 8;

    auto* sim = app.add_subcommand("simulate", "Compute a normalized dip trace");
    sim->add_option("-c,--config", config_path, "run config (JSON)")->required();
    sim->add_option("-o,--output", out_path, "output trace file")->required();

    auto* synth = app.add_subcommand("synth", "Synthesize a Poisson count trace");
    synth->add_option("-c,--config", config_path, "run config (JSON)")->required();
    synth->add_option("-o,--output", out_path, "output counts file")->required();
    synth->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });

    auto* fit = app.add_subcommand("fit", "Fit a measured count trace");
    fit->add_option("-c,--config", config_path, "run config (JSON)")->required();
    fit->add_option("-d,--data", data_path, "count trace file")->required();
    fit->add_option("-o,--output", out_path, "fit report file")->required();
    fit->add_option("--trace", trace_path, "best-fit trace output file");

    auto* ana = app.add_subcommand("analyze-spectrum", "Extract lines from a spectrum");
    ana->add_option("-c,--config", config_path, "run config (JSON)")->required();
    ana->add_option("-s,--spectrum", spectrum_path, "two-column spectrum file")->required();
    ana->add_option("-o,--output", out_path, "line report file")->required();
    ana->add_option("--filter-file", filter_path, "measured filter spectrum to divide by");
    ana->add_flag("--normalize-model-filter", normalize_by_model,
                  "divide by the config's trapezoid filter");
    ana->add_option("--max-lines", max_lines, "maximum number of lines to fit");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(config_path, out_path);
        if (synth->parsed())
            return cmd_synth(config_path, out_path, seed_set ? &seed : nullptr);
        if (fit->parsed()) return cmd_fit(config_path, data_path, out_path, trace_path);
        if (ana->parsed())
            return cmd_analyze_spectrum(config_path, spectrum_path, filter_path,
                                        normalize_by_model, out_path, max_lines);
    } catch (const homsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const homsim::ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
