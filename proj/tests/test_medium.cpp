#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "homsim/medium.hpp"

using namespace homsim;

TEST_CASE("nm to angular detuning bridge") {
    CHECK(nm_to_angular_detuning(0.0, 815.0) == 0.0);
    // 2 pi c dl / l0^2 at 6 nm, 815 nm
    CHECK(nm_to_angular_detuning(6.0, 815.0) == Catch::Approx(1.70e13).epsilon(0.01));
    CHECK(nm_to_angular_detuning(-6.0, 815.0) ==
          Catch::Approx(-nm_to_angular_detuning(6.0, 815.0)));
    // sign convention flag flips the mapping
    CHECK(nm_to_angular_detuning(6.0, 815.0, -1.0) ==
          Catch::Approx(-nm_to_angular_detuning(6.0, 815.0)));
    // unit round trip
    const double nu = nm_to_angular_detuning(3.7, 815.0);
    CHECK(angular_detuning_to_nm(nu, 815.0) == Catch::Approx(3.7).epsilon(1e-12));
}

TEST_CASE("identity transfer function") {
    const SpectralGrid g = build_grid(815.0, 2e13, 256);
    const ComplexSpectrum h = transfer_function(IdentityMedium{}, g);
    for (const auto& v : h.values) REQUIRE(v == std::complex<double>(1.0, 0.0));
    const std::vector<double> t = intensity_transmission(IdentityMedium{}, g);
    for (double v : t) REQUIRE(v == 1.0);
}

TEST_CASE("single line transmission at resonance is exp(-alphaL)") {
    const SpectralGrid g = build_grid(815.0, 3e13, 4096);
    for (double alpha : {4.0, 7.2}) {
        LorentzianMedium m;
        m.lines.push_back({4.4, alpha, 130.0 * fs});
        const double omega = nm_to_angular_detuning(4.4, 815.0);
        const std::complex<double> h = lorentzian_transfer_at(m, 815.0, omega);
        CHECK(std::norm(h) == Catch::Approx(std::exp(-alpha)).epsilon(1e-9));
    }
    // spot values from the fixture media
    LorentzianMedium m4;
    m4.lines.push_back({0.0, 4.0, 130.0 * fs});
    CHECK(std::norm(lorentzian_transfer_at(m4, 815.0, 0.0)) ==
          Catch::Approx(0.0183).epsilon(1e-2));
    LorentzianMedium m72;
    m72.lines.push_back({0.0, 7.2, 710.0 * fs});
    CHECK(std::norm(lorentzian_transfer_at(m72, 815.0, 0.0)) ==
          Catch::Approx(7.5e-4).epsilon(1e-2));
}

TEST_CASE("two lines multiply") {
    const SpectralGrid g = build_grid(815.0, 3e13, 1024);
    LorentzianMedium a, b, both;
    a.lines.push_back({7.5, 1.95, 620.0 * fs});
    b.lines.push_back({-6.0, 7.2, 710.0 * fs});
    both.lines = {a.lines[0], b.lines[0]};
    const ComplexSpectrum ha = transfer_function(a, g);
    const ComplexSpectrum hb = transfer_function(b, g);
    const ComplexSpectrum hboth = transfer_function(both, g);
    for (std::size_t i = 0; i < g.size(); ++i)
        REQUIRE(std::abs(hboth.values[i] - ha.values[i] * hb.values[i]) < 1e-12);
}

TEST_CASE("passive medium bound and depth additivity") {
    const SpectralGrid g = build_grid(815.0, 3e13, 2048);
    LorentzianMedium m;
    m.lines.push_back({7.5, 1.95, 620.0 * fs});
    m.lines.push_back({3.1, 2.35, 660.0 * fs});
    m.lines.push_back({-1.55, 2.9, 415.0 * fs});
    m.lines.push_back({-6.0, 7.2, 710.0 * fs});
    m.lines.push_back({-9.9, 3.6, 215.0 * fs});
    const ComplexSpectrum h = transfer_function(m, g);
    for (const auto& v : h.values) REQUIRE(std::abs(v) <= 1.0 + 1e-12);

    // -ln|H_total|^2 = sum_k -ln|H_k|^2
    std::vector<double> depth_sum(g.size(), 0.0);
    for (const auto& line : m.lines) {
        LorentzianMedium single;
        single.lines.push_back(line);
        const ComplexSpectrum hk = transfer_function(single, g);
        for (std::size_t i = 0; i < g.size(); ++i) depth_sum[i] += -std::log(std::norm(hk.values[i]));
    }
    for (std::size_t i = 0; i < g.size(); ++i)
        REQUIRE(-std::log(std::norm(h.values[i])) ==
                Catch::Approx(depth_sum[i]).margin(1e-9));
}

TEST_CASE("weak line depth FWHM equals 2/T2") {
    const double t2 = 500.0 * fs;
    LorentzianMedium m;
    m.lines.push_back({0.0, 0.1, t2});
    const SpectralGrid g = build_grid(815.0, 40.0 / t2, 65536);
    const std::vector<double> trans = intensity_transmission(m, g);
    std::vector<double> depth(g.size());
    double peak = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        depth[i] = -std::log(trans[i]);
        peak = std::max(peak, depth[i]);
    }
    std::size_t lo = 0, hi = g.size() - 1;
    while (depth[lo] < 0.5 * peak) ++lo;
    while (depth[hi] < 0.5 * peak) --hi;
    const double fwhm = g[hi] - g[lo];
    CHECK(fwhm == Catch::Approx(2.0 / t2).epsilon(0.02));
}

TEST_CASE("tabulated medium interpolation and coverage") {
    const SpectralGrid g = build_grid(815.0, 1e13, 128);
    TabulatedMedium tab;
    // linear-in-wavelength complex values over a generous range
    for (double wl = 780.0; wl <= 850.0; wl += 0.5) {
        tab.wavelengths_nm.push_back(wl);
        tab.values.emplace_back(0.01 * (wl - 780.0), -0.005 * (wl - 780.0));
    }
    const ComplexSpectrum h = transfer_function(tab, g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double wl = g.wavelength_at(i);
        REQUIRE(h.values[i].real() == Catch::Approx(0.01 * (wl - 780.0)).margin(1e-9));
        REQUIRE(h.values[i].imag() == Catch::Approx(-0.005 * (wl - 780.0)).margin(1e-9));
    }

    TabulatedMedium narrow;
    narrow.wavelengths_nm = {814.0, 816.0};
    narrow.values = {{1.0, 0.0}, {1.0, 0.0}};
    CHECK_THROWS_AS(transfer_function(Medium{narrow}, g), std::domain_error);
}

TEST_CASE("refined grid agrees with interpolation of the coarse grid") {
    LorentzianMedium m;
    m.lines.push_back({2.0, 3.0, 300.0 * fs});
    const SpectralGrid coarse = build_grid(815.0, 2e13, 2048);
    const SpectralGrid fine = build_grid(815.0, 2e13, 4096);
    const ComplexSpectrum hc = transfer_function(m, coarse);
    const ComplexSpectrum hf = transfer_function(m, fine);
    // linear interpolation of coarse onto fine nodes, away from the edges
    const double h2 = coarse.spacing() * coarse.spacing();
    // bound |f''| by finite differences of the coarse samples
    for (std::size_t i = 1; i + 1 < fine.size(); i += 17) {
        const double nu = fine[i];
        const double pos = (nu - coarse[0]) / coarse.spacing();
        const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(pos),
                                                    coarse.size() - 2);
        const double t = pos - static_cast<double>(j);
        const std::complex<double> interp =
            hc.values[j] * (1.0 - t) + hc.values[j + 1] * t;
        std::complex<double> second{0.0, 0.0};
        if (j > 0 && j + 2 < coarse.size())
            second = hc.values[j + 2] - 2.0 * hc.values[j + 1] + hc.values[j];
        const double bound = 0.5 * std::abs(second) + 64.0 * h2 / (3e13 * 3e13);
        REQUIRE(std::abs(hf.values[i] - interp) <= bound + 1e-9);
    }
}

TEST_CASE("thin sample relation") {
    // 1 nm FWHM at 808 nm -> about 700 fs
    const double t2 = thin_sample_t2_from_fwhm(nm_width_to_hz(1.0, 808.0));
    CHECK(t2 / fs == Catch::Approx(693.0).epsilon(0.02));
    // 12 nm at 818 nm -> about 59 fs
    const double t2_nano = thin_sample_t2_from_fwhm(nm_width_to_hz(12.0, 818.0));
    CHECK(t2_nano / fs == Catch::Approx(59.0).epsilon(0.03));
    // inverse proportionality limit
    CHECK(thin_sample_t2_from_fwhm(1e20) < 1e-19);
    CHECK_THROWS_AS(thin_sample_t2_from_fwhm(0.0), std::invalid_argument);
}

TEST_CASE("line parameter validation") {
    LorentzLine bad_alpha{0.0, -1.0, 100.0 * fs};
    CHECK_THROWS_AS(bad_alpha.validate(), std::invalid_argument);
    LorentzLine bad_t2{0.0, 1.0, 0.0};
    CHECK_THROWS_AS(bad_t2.validate(), std::invalid_argument);
    LorentzianMedium empty;
    const SpectralGrid g = build_grid(815.0, 1e13, 64);
    CHECK_THROWS_AS(transfer_function(Medium{empty}, g), std::invalid_argument);
}
