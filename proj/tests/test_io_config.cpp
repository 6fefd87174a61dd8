#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "homsim/config.hpp"
#include "homsim/io.hpp"

using namespace homsim;

#ifndef HOMSIM_FIXTURE_DIR
#error "HOMSIM_FIXTURE_DIR must be defined"
#endif

namespace {

std::string fixture(const std::string& name) {
    return std::string(HOMSIM_FIXTURE_DIR) + "/" + name;
}

std::string temp_file(const std::string& name) {
    return std::string("/tmp/homsim_io_") + name;
}

} // namespace

TEST_CASE("read_columns handles comments, commas, and blank lines") {
    std::istringstream in(
        "# header\n"
        "1.0, 2.0\n"
        "\n"
        "3.0 4.0  # trailing comment\n"
        "5.0\t6.0 999.0\n"); // extra columns ignored
    const auto rows = io::read_columns(in, 2);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<double>{1.0, 2.0});
    CHECK(rows[1] == std::vector<double>{3.0, 4.0});
    CHECK(rows[2] == std::vector<double>{5.0, 6.0});

    std::istringstream bad("1.0\n");
    CHECK_THROWS_AS(io::read_columns(bad, 2), ParseError);
}

TEST_CASE("dip trace round trip") {
    DipTrace t;
    for (int i = -10; i <= 10; ++i) {
        t.delays.push_back(i * 25.0 * fs);
        t.rates.push_back(0.5 + 0.01 * i);
    }
    const std::string path = temp_file("trace.txt");
    {
        std::ofstream out(path);
        io::write_dip_trace(out, t);
    }
    const DipTrace back = io::read_dip_trace(path);
    REQUIRE(back.delays.size() == t.delays.size());
    for (std::size_t i = 0; i < t.delays.size(); ++i) {
        REQUIRE(back.delays[i] == Catch::Approx(t.delays[i]).margin(1e-27));
        REQUIRE(back.rates[i] == Catch::Approx(t.rates[i]).epsilon(1e-10));
    }
}

TEST_CASE("count trace round trip preserves integer counts") {
    CountTrace t;
    t.acquisition_time_per_point = 720.0;
    for (int i = 0; i < 50; ++i) {
        t.delays.push_back((i * 10.0 - 250.0) * fs);
        t.counts.push_back(1000000 + 37 * i);
    }
    const std::string path = temp_file("counts.txt");
    {
        std::ofstream out(path);
        io::write_count_trace(out, t, 42);
    }
    const CountTrace back = io::read_count_trace(path, fs, 720.0);
    REQUIRE(back.counts == t.counts);
    REQUIRE(back.acquisition_time_per_point == 720.0);
    for (std::size_t i = 0; i < t.delays.size(); ++i)
        REQUIRE(back.delays[i] == Catch::Approx(t.delays[i]).margin(1e-27));

    // negative counts rejected
    {
        std::ofstream out(path);
        out << "0.0 -5\n";
    }
    CHECK_THROWS_AS(io::read_count_trace(path), ParseError);
}

TEST_CASE("stage position delay scale") {
    // a double-pass stage: 1 um of travel adds 2 um of path
    const std::string path = temp_file("stage.txt");
    {
        std::ofstream out(path);
        out << "0.0 100\n15.0 100\n"; // stage positions in um
    }
    const double scale = 2.0e-6 / speed_of_light;
    const CountTrace t = io::read_count_trace(path, scale);
    CHECK(t.delays[0] == 0.0);
    CHECK(t.delays[1] == Catch::Approx(15.0 * 2.0e-6 / speed_of_light).epsilon(1e-12));
    // 15 um double-pass is very nearly 100 fs
    CHECK(t.delays[1] / fs == Catch::Approx(100.0).epsilon(0.01));
}

TEST_CASE("spectrum and tabulated medium files") {
    TransmissionSpectrum s;
    for (double wl = 810.0; wl <= 820.0; wl += 0.5) {
        s.wavelengths_nm.push_back(wl);
        s.transmission.push_back(std::exp(-0.1 * (wl - 815.0) * (wl - 815.0)));
    }
    const std::string path = temp_file("spec.txt");
    {
        std::ofstream out(path);
        io::write_spectrum(out, s);
    }
    const TransmissionSpectrum back = io::read_spectrum(path);
    REQUIRE(back.wavelengths_nm.size() == s.wavelengths_nm.size());
    for (std::size_t i = 0; i < s.wavelengths_nm.size(); ++i)
        REQUIRE(back.transmission[i] == Catch::Approx(s.transmission[i]).epsilon(1e-10));

    {
        std::ofstream out(temp_file("tab.txt"));
        out << "# wl re im\n810 0.9 -0.1\n820 0.8 0.1\n";
    }
    const TabulatedMedium tab = io::read_tabulated_medium(temp_file("tab.txt"));
    REQUIRE(tab.wavelengths_nm.size() == 2);
    CHECK(tab.values[0] == std::complex<double>(0.9, -0.1));

    CHECK_THROWS_AS(io::read_spectrum("/nonexistent/file.txt"), ParseError);
}

TEST_CASE("fit report format") {
    FitResult fit;
    fit.parameters.push_back({"visibility", 0.92, true, 0.0, 1.0});
    fit.parameters.push_back({"baseline", 0.0, false, 0.0, 0.0});
    fit.sigmas = {0.004, 0.0};
    fit.r_squared = 0.988;
    fit.cost = 12.5;
    fit.n_iterations = 17;
    fit.converged = true;
    std::ostringstream out;
    io::write_fit_report(out, fit);
    const std::string text = out.str();
    CHECK(text.find("visibility 0.92 0.004 free") != std::string::npos);
    CHECK(text.find("baseline 0 0 fixed") != std::string::npos);
    CHECK(text.find("r_squared 0.988") != std::string::npos);
    CHECK(text.find("converged true") != std::string::npos);
}

TEST_CASE("full config parses the fixture files") {
    const RunConfig cfg = load_run_config(fixture("ndyag.json"));
    CHECK(cfg.center_wavelength_nm == 815.0);
    CHECK(cfg.visibility == 0.92);
    const auto* lm = std::get_if<LorentzianMedium>(&cfg.medium);
    REQUIRE(lm != nullptr);
    REQUIRE(lm->lines.size() == 5);
    CHECK(lm->lines[0].detuning_nm == 7.5);
    CHECK(lm->lines[3].optical_thickness == 7.2);
    CHECK(lm->lines[4].t2 == Catch::Approx(215.0 * fs));

    const RunConfig nano = load_run_config(fixture("nanodisc.json"));
    const auto* nl = std::get_if<LorentzianMedium>(&nano.medium);
    REQUIRE(nl != nullptr);
    REQUIRE(nl->lines.size() == 1);
    CHECK(nl->lines[0].detuning_nm == 4.4);
    CHECK(nl->lines[0].optical_thickness == 4.0);

    const RunConfig empty = load_run_config(fixture("empty.json"));
    CHECK(std::holds_alternative<IdentityMedium>(empty.medium));
}

TEST_CASE("config defaults and delay helpers") {
    const RunConfig cfg = parse_run_config(nlohmann::json::object());
    CHECK(cfg.center_wavelength_nm == 815.0);
    CHECK(cfg.filter.top_width_nm == 15.5);
    CHECK(cfg.phase_matching.intensity_fwhm_nm == 22.0);
    CHECK(cfg.grid_points == 16384);
    CHECK(cfg.delay_scale() == fs);

    const auto delays = cfg.make_delays();
    REQUIRE(delays.size() == 101); // -1000..1000 by 20
    CHECK(delays.front() == Catch::Approx(-1000.0 * fs));
    CHECK(delays.back() == Catch::Approx(1000.0 * fs));

    RunConfig stage = cfg;
    stage.io.delay_unit = "stage_um";
    CHECK(stage.delay_scale() == Catch::Approx(2.0e-6 / speed_of_light));
    stage.io.delay_unit = "bogus";
    CHECK_THROWS_AS(stage.delay_scale(), ConfigError);
}

TEST_CASE("config error paths") {
    CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), ConfigError);

    // invalid JSON
    {
        std::ofstream out(temp_file("bad.json"));
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_run_config(temp_file("bad.json")), ConfigError);

    // bad medium type
    CHECK_THROWS_AS(parse_run_config(nlohmann::json::parse(R"({"medium":{"type":"plasma"}})")),
                    ConfigError);
    // empty lorentzian line list
    CHECK_THROWS_AS(
        parse_run_config(nlohmann::json::parse(R"({"medium":{"type":"lorentzian","lines":[]}})")),
        ConfigError);
    // negative T2 propagates as a config error
    CHECK_THROWS_AS(parse_run_config(nlohmann::json::parse(
                        R"({"medium":{"type":"lorentzian","lines":[{"detuning_nm":0,"alpha_l":1,"t2_fs":-5}]}})")),
                    ConfigError);
    // zero tau step
    CHECK_THROWS_AS(parse_run_config(nlohmann::json::parse(R"({"engine":{"tau_step_fs":0}})")),
                    ConfigError);
    // over-specified phase matching
    CHECK_THROWS_AS(
        parse_run_config(nlohmann::json::parse(
            R"({"source":{"phase_matching":{"intensity_fwhm_nm":22.0,"argument_scale":1e-27}}})")),
        ConfigError);
}

TEST_CASE("make_fit_model uses config and data-driven inits") {
    const RunConfig cfg = load_run_config(fixture("nanodisc.json"));
    const SpectralGrid g = cfg.make_grid();
    FilterSpec filter = cfg.filter;
    const ComplexSpectrum field = biphoton_amplitude(cfg.phase_matching, filter, g);

    CountTrace data;
    for (int i = 0; i < 60; ++i) {
        data.delays.push_back((i * 20.0 - 600.0) * fs);
        // a fake dip: baseline 10000, minimum 2000 in the middle
        const double x = (i - 30.0) / 6.0;
        data.counts.push_back(static_cast<std::int64_t>(10000 - 8000 * std::exp(-x * x)));
    }
    const FitModel model = make_fit_model(cfg, field, data);
    REQUIRE(model.lines.size() == 1);
    CHECK(model.field == &field);
    // fixture inits t2 at 300 fs
    CHECK(model.lines[0].t2 == Catch::Approx(300.0 * fs));
    // amplitude guess tracks the trace edges, visibility the dip contrast
    CHECK(model.amplitude.value == Catch::Approx(10000.0).epsilon(0.01));
    CHECK(model.visibility.value == Catch::Approx(0.8).epsilon(0.05));

    RunConfig tab = cfg;
    TabulatedMedium m;
    m.wavelengths_nm = {800.0, 830.0};
    m.values = {{1.0, 0.0}, {1.0, 0.0}};
    tab.medium = m;
    CHECK_THROWS_AS(make_fit_model(tab, field, data), ConfigError);
}
